#include "usparse/gdb.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>
#include <fmt/format.h>

#include "usparse/error.hpp"

namespace usparse {

using boost::multiprecision::cpp_rational;

Rule Rule::parse(const std::string& text) {
  if (text == "degree-abs") return {RuleKind::DegreeAbsolute, 1};
  if (text == "degree-rel") return {RuleKind::DegreeRelative, 1};
  if (text == "cut-all") return {RuleKind::CutAll, 0};
  if (text.rfind("cut-k:", 0) == 0) {
    try {
      const long k = std::stol(text.substr(6));
      if (k >= 1) return {RuleKind::CutK, static_cast<std::size_t>(k)};
    } catch (const std::exception&) {
    }
  }
  throw DomainError(fmt::format("unknown rule '{}'", text));
}

std::string Rule::to_string() const {
  switch (kind) {
    case RuleKind::DegreeAbsolute:
      return "degree-abs";
    case RuleKind::DegreeRelative:
      return "degree-rel";
    case RuleKind::CutK:
      return fmt::format("cut-k:{}", k);
    case RuleKind::CutAll:
      return "cut-all";
  }
  return {};
}

// --- state ------------------------------------------------------------------

SparsifierState::SparsifierState(const UncertainGraph& g, const BackboneGraph& backbone,
                                 DiscrepancyMode mode)
    : graph_(&g),
      mode_(mode),
      probs_(g.edge_count(), 0.0),
      member_(g.edge_count(), 0),
      degree_(expected_degrees(g)),
      pi_(g.vertex_count(), 1.0) {
  validate_backbone(g, backbone);
  for (EdgeId e : backbone.edges) {
    member_[e] = 1;
    probs_[e] = g.edge(e).p;
  }
  backbone_size_ = backbone.edges.size();
  for (VertexId u = 0; u < g.vertex_count(); ++u) pi_[u] = usparse::pi(u, mode, g);
  recompute();
}

std::vector<EdgeId> SparsifierState::backbone_edges() const {
  std::vector<EdgeId> out;
  out.reserve(backbone_size_);
  for (EdgeId e = 0; e < member_.size(); ++e) {
    if (member_[e]) out.push_back(e);
  }
  return out;
}

void SparsifierState::shift(EdgeId e, double delta_p) {
  const auto& edge = graph_->edge(e);
  probs_[e] += delta_p;
  vertex_disc_[edge.u] -= delta_p;
  vertex_disc_[edge.v] -= delta_p;
  mass_gap_ -= delta_p;
}

void SparsifierState::set_prob(EdgeId e, double p) {
  if (!member_[e]) throw DomainError(fmt::format("edge {} is not in the backbone", e));
  const auto& edge = graph_->edge(e);
  const double delta_p = p - probs_[e];
  probs_[e] = p;
  vertex_disc_[edge.u] -= delta_p;
  vertex_disc_[edge.v] -= delta_p;
  mass_gap_ -= delta_p;
}

void SparsifierState::remove(EdgeId e) {
  if (!member_[e]) throw DomainError(fmt::format("edge {} is not in the backbone", e));
  shift(e, -probs_[e]);
  probs_[e] = 0.0;
  member_[e] = 0;
  --backbone_size_;
}

void SparsifierState::insert(EdgeId e, double p) {
  if (member_[e]) throw DomainError(fmt::format("edge {} is already in the backbone", e));
  member_[e] = 1;
  ++backbone_size_;
  shift(e, p);
  probs_[e] = p;
}

void SparsifierState::recompute() {
  vertex_disc_ = degree_;
  mass_gap_ = 0.0;
  for (EdgeId e = 0; e < probs_.size(); ++e) {
    const auto& edge = graph_->edge(e);
    vertex_disc_[edge.u] -= probs_[e];
    vertex_disc_[edge.v] -= probs_[e];
    mass_gap_ += edge.p - probs_[e];
  }
}

double SparsifierState::bookkeeping_error() const {
  SparsifierState fresh = *this;
  fresh.recompute();
  double err = std::fabs(fresh.mass_gap_ - mass_gap_);
  for (std::size_t u = 0; u < vertex_disc_.size(); ++u) {
    err = std::max(err, std::fabs(fresh.vertex_disc_[u] - vertex_disc_[u]));
  }
  return err;
}

double SparsifierState::d1() const {
  std::vector<double> disc = degree_;
  for (EdgeId e = 0; e < probs_.size(); ++e) {
    disc[graph_->edge(e).u] -= probs_[e];
    disc[graph_->edge(e).v] -= probs_[e];
  }
  double total = 0.0;
  for (std::size_t u = 0; u < disc.size(); ++u) {
    const double d = disc[u] / pi_[u];
    total += d * d;
  }
  return total;
}

double SparsifierState::delta1_absolute() const {
  std::vector<double> disc = degree_;
  for (EdgeId e = 0; e < probs_.size(); ++e) {
    disc[graph_->edge(e).u] -= probs_[e];
    disc[graph_->edge(e).v] -= probs_[e];
  }
  double total = 0.0;
  for (double d : disc) total += std::fabs(d);
  return total;
}

UncertainGraph SparsifierState::to_graph() const {
  std::vector<Edge> edges;
  edges.reserve(backbone_size_);
  for (EdgeId e = 0; e < probs_.size(); ++e) {
    if (member_[e]) {
      const auto& src = graph_->edge(e);
      edges.push_back({src.u, src.v, std::clamp(probs_[e], 0.0, 1.0)});
    }
  }
  return UncertainGraph(graph_->vertex_count(), std::move(edges), ProbabilityDomain::Closed);
}

// --- update rules -------------------------------------------------------------

double pi(VertexId u, DiscrepancyMode mode, const UncertainGraph& g) {
  if (mode == DiscrepancyMode::Absolute) return 1.0;
  const double d = expected_degree(g, u);
  return d > 0.0 ? d : 1.0;
}

double degree_step(double /*p_hat*/, double disc_u, double disc_v, double pi_u, double pi_v) {
  return (pi_v * disc_u + pi_u * disc_v) / (pi_u + pi_v);
}

BigInt binom_sum(long n, long k) {
  if (k < 0) return 0;
  if (n < 0) throw DomainError(fmt::format("binom_sum undefined for n={}", n));
  BigInt term = 1;
  BigInt total = 1;
  const long top = std::min(k, n);
  for (long i = 1; i <= top; ++i) {
    term = term * (n - i + 1) / i;
    total += term;
  }
  return total;
}

CutStepWeights cut_step_weights(std::size_t n, std::size_t k) {
  if (k < 1) throw DomainError("k must be at least 1");
  if (k > n) throw DomainError(fmt::format("k={} exceeds the vertex count {}", k, n));
  if (k == 1) return {0.5, 0.0};
  if (n < 4) throw DomainError(fmt::format("k={} needs at least 4 vertices, got {}", k, n));
  const long nn = static_cast<long>(n);
  const long kk = static_cast<long>(k);
  const BigInt near = binom_sum(nn - 3, kk - 1);
  const BigInt far = binom_sum(nn - 4, kk - 2);
  const BigInt both = binom_sum(nn - 2, kk - 1);
  const cpp_rational weight_degree(near, 2 * both);
  const cpp_rational weight_far(4 * far, 2 * both);
  return {weight_degree.convert_to<double>(), weight_far.convert_to<double>()};
}

double delta_hat(EdgeId e, const SparsifierState& state) {
  const auto& edge = state.graph().edge(e);
  // Incident gaps at u and v count e twice; add it back once.
  return state.mass_gap() - state.vertex_disc(edge.u) - state.vertex_disc(edge.v) +
         state.edge_gap(e);
}

double cut_step(double p_hat, double disc_u, double disc_v, double delta_hat_e,
                const CutStepWeights& weights) {
  (void)p_hat;
  return weights.weight_degree * (disc_u + disc_v) + weights.weight_far * delta_hat_e;
}

double cut_step(double p_hat, double disc_u, double disc_v, double delta_hat_e, std::size_t n,
                std::size_t k) {
  return cut_step(p_hat, disc_u, disc_v, delta_hat_e, cut_step_weights(n, k));
}

double ncut_step(EdgeId e, const SparsifierState& state) {
  return state.mass_gap() - state.edge_gap(e);
}

double apply_update(double p_hat, double stp, double h) {
  const double full = std::clamp(p_hat + stp, 0.0, 1.0);
  if (edge_entropy(full) > edge_entropy(p_hat)) return std::clamp(p_hat + h * stp, 0.0, 1.0);
  return full;
}

// --- objectives ---------------------------------------------------------------

namespace {

double cut_discrepancy(const SparsifierState& state, const std::vector<char>& in_set) {
  double delta = 0.0;
  const auto& g = state.graph();
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    if (in_set[g.edge(e).u] != in_set[g.edge(e).v]) delta += state.edge_gap(e);
  }
  return delta;
}

std::size_t cut_depth(const Rule& rule, std::size_t n) {
  return rule.kind == RuleKind::CutAll ? n : std::min(rule.k, n);
}

}  // namespace

double objective(const SparsifierState& state, const Rule& rule, std::size_t samples_per_size,
                 std::uint64_t seed) {
  if (rule.is_degree_rule() || (rule.kind == RuleKind::CutK && rule.k == 1)) return state.d1();
  if (samples_per_size == 0) throw DomainError("cut objectives need a sample budget");
  const std::size_t n = state.graph().vertex_count();
  const std::size_t depth = cut_depth(rule, n);
  Rng rng(seed);
  double total = 0.0;
  std::vector<char> in_set(n, 0);
  for (std::size_t size = 1; size <= depth; ++size) {
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < samples_per_size; ++s) {
      const auto members = sample_k_subset(n, size, rng);
      for (VertexId u : members) in_set[u] = 1;
      const double d = cut_discrepancy(state, in_set);
      sum_sq += d * d;
      for (VertexId u : members) in_set[u] = 0;
    }
    const double count = binom_sum(static_cast<long>(n), static_cast<long>(size))
                             .convert_to<double>() -
                         binom_sum(static_cast<long>(n), static_cast<long>(size) - 1)
                             .convert_to<double>();
    total += count * sum_sq / static_cast<double>(samples_per_size);
  }
  return total;
}

double exact_cut_objective(const SparsifierState& state, std::size_t k) {
  const std::size_t n = state.graph().vertex_count();
  if (n > 24) throw DomainError("exhaustive cut objective limited to 24 vertices");
  double total = 0.0;
  std::vector<char> in_set(n, 0);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) > k) continue;
    for (std::size_t u = 0; u < n; ++u) in_set[u] = static_cast<char>(mask >> u & 1U);
    const double d = cut_discrepancy(state, in_set);
    total += d * d;
  }
  return total;
}

// --- driver -------------------------------------------------------------------

GdbResult gdb_sweeps(SparsifierState& state, const GdbOptions& options) {
  if (!(options.h >= 0.0 && options.h <= 1.0)) throw DomainError("h must be in [0,1]");
  if (options.tau && !(*options.tau > 0.0)) throw DomainError("tau must be positive");
  const Rule& rule = options.rule;
  if (!rule.is_degree_rule() && state.mode() != DiscrepancyMode::Absolute) {
    throw DomainError("cut rules operate on absolute discrepancies");
  }
  const std::size_t n = state.graph().vertex_count();
  std::optional<CutStepWeights> weights;
  if (rule.kind == RuleKind::CutK) weights = cut_step_weights(n, rule.k);

  GdbResult result;
  result.d1_history.push_back(state.d1());
  const double tau = options.tau.value_or(1e-6 * result.d1_history.front() + 1e-12);
  const auto edges = state.backbone_edges();
  const auto& g = state.graph();

  for (std::size_t sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (EdgeId e : edges) {
      const VertexId u = g.edge(e).u;
      const VertexId v = g.edge(e).v;
      const double p_hat = state.prob(e);
      double stp = 0.0;
      switch (rule.kind) {
        case RuleKind::DegreeAbsolute:
        case RuleKind::DegreeRelative:
          stp = degree_step(p_hat, state.vertex_disc(u), state.vertex_disc(v), state.pi(u),
                            state.pi(v));
          break;
        case RuleKind::CutK:
          stp = cut_step(p_hat, state.vertex_disc(u), state.vertex_disc(v), delta_hat(e, state),
                         *weights);
          break;
        case RuleKind::CutAll:
          stp = ncut_step(e, state);
          break;
      }
      state.set_prob(e, apply_update(p_hat, stp, options.h));
    }
    state.recompute();
    ++result.sweeps;
    const double before = result.d1_history.back();
    const double after = state.d1();
    result.d1_history.push_back(after);
    if (std::fabs(before - after) <= tau) {
      result.converged = true;
      break;
    }
  }
  result.graph = state.to_graph();
  return result;
}

GdbResult gdb_run(const UncertainGraph& g, const BackboneGraph& backbone,
                  const GdbOptions& options) {
  SparsifierState state(g, backbone, options.rule.mode());
  return gdb_sweeps(state, options);
}

}  // namespace usparse
