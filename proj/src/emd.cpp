#include "usparse/emd.hpp"

#include <cmath>

#include "usparse/error.hpp"

namespace usparse {

VertexHeap::VertexHeap(const SparsifierState& state)
    : state_(&state), versions_(state.graph().vertex_count(), 0) {
  for (VertexId u = 0; u < versions_.size(); ++u) {
    heap_.push({std::fabs(state.vertex_disc(u)), u, 0});
  }
}

void VertexHeap::update(VertexId u) {
  heap_.push({std::fabs(state_->vertex_disc(u)), u, ++versions_[u]});
}

VertexId VertexHeap::top() {
  while (heap_.top().version != versions_[heap_.top().vertex]) heap_.pop();
  return heap_.top().vertex;
}

double gain(EdgeId e, double candidate_p, const SparsifierState& state) {
  const auto& edge = state.graph().edge(e);
  double g = 0.0;
  for (VertexId x : {edge.u, edge.v}) {
    const double before = state.vertex_disc(x) / state.pi(x);
    const double after = (state.vertex_disc(x) - candidate_p) / state.pi(x);
    g += before * before - after * after;
  }
  return g;
}

double candidate_probability(EdgeId e, const SparsifierState& state, double h) {
  const auto& edge = state.graph().edge(e);
  const double stp = degree_step(0.0, state.vertex_disc(edge.u), state.vertex_disc(edge.v),
                                 state.pi(edge.u), state.pi(edge.v));
  return apply_update(0.0, stp, h);
}

EPhaseStats e_phase(SparsifierState& state, double h) {
  const auto& g = state.graph();
  VertexHeap heap(state);
  EPhaseStats stats;
  for (EdgeId e : state.backbone_edges()) {
    const double prior = state.prob(e);
    state.remove(e);
    heap.update(g.edge(e).u);
    heap.update(g.edge(e).v);
    const VertexId top = heap.top();

    // Reinserting e unchanged is always on the table, so the phase never
    // worsens D_1; ties keep e, then prefer the smaller edge id.
    EdgeId best = e;
    double best_p = prior;
    double best_gain = gain(e, prior, state);
    auto consider = [&](EdgeId cand, double p) {
      const double gc = gain(cand, p, state);
      const bool better = gc > best_gain ||
                          (gc == best_gain && best != e && cand != e && cand < best);
      if (better) {
        best = cand;
        best_p = p;
        best_gain = gc;
      }
    };
    consider(e, candidate_probability(e, state, h));
    for (EdgeId cand : g.incident(top)) {
      if (state.in_backbone(cand) || cand == e) continue;
      consider(cand, candidate_probability(cand, state, h));
    }

    state.insert(best, best_p);
    heap.update(g.edge(best).u);
    heap.update(g.edge(best).v);
    ++stats.examined;
    if (best != e) ++stats.swaps;
  }
  state.recompute();
  return stats;
}

EmdResult emd_run(const UncertainGraph& g, const BackboneGraph& backbone,
                  const EmdOptions& options) {
  if (!(options.h >= 0.0 && options.h <= 1.0)) throw DomainError("h must be in [0,1]");
  if (options.tau && !(*options.tau > 0.0)) throw DomainError("tau must be positive");
  SparsifierState state(g, backbone, options.mode);
  GdbOptions m_phase;
  m_phase.h = options.h;
  m_phase.rule.kind = options.mode == DiscrepancyMode::Absolute ? RuleKind::DegreeAbsolute
                                                                : RuleKind::DegreeRelative;
  m_phase.max_sweeps = options.max_sweeps;

  EmdResult result;
  result.d1_history.push_back(state.d1());
  const double tau = options.tau.value_or(1e-6 * result.d1_history.front() + 1e-12);
  m_phase.tau = tau > 0.0 ? std::optional<double>(tau) : std::nullopt;
  for (std::size_t iter = 0; iter < options.max_iters; ++iter) {
    const auto stats = e_phase(state, options.h);
    result.total_swaps += stats.swaps;
    gdb_sweeps(state, m_phase);
    ++result.iterations;
    const double before = result.d1_history.back();
    const double after = state.d1();
    result.d1_history.push_back(after);
    if (std::fabs(before - after) <= tau) {
      result.converged = true;
      break;
    }
  }
  result.graph = state.to_graph();
  result.backbone = {g.vertex_count(), state.backbone_edges(), backbone.source};
  return result;
}

}  // namespace usparse
