#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "usparse/backbone.hpp"
#include "usparse/benchmarks.hpp"
#include "usparse/error.hpp"
#include "usparse/union_find.hpp"

namespace usparse {

NiWeights to_ni_weights(const UncertainGraph& g) {
  if (g.edge_count() == 0) throw DomainError("NI weights need a nonempty edge set");
  NiWeights out;
  out.p_min = 1.0;
  for (const auto& e : g.edges()) out.p_min = std::min(out.p_min, e.p);
  out.graph.vertex_count = g.vertex_count();
  out.graph.edges.reserve(g.edge_count());
  for (const auto& e : g.edges()) {
    const double w = std::max(1.0, std::floor(e.p / out.p_min + 0.5));
    out.graph.edges.push_back({e.u, e.v, w});
  }
  return out;
}

double ni_inverse(double new_weight, double p_min) { return std::min(new_weight * p_min, 1.0); }

double ni_initial_epsilon(std::size_t n, std::size_t m, double alpha) {
  const double ln = std::log(static_cast<double>(n));
  return std::sqrt(static_cast<double>(n) * ln * ln / (alpha * static_cast<double>(m)));
}

NiCoreResult ni_core(const WeightedGraph& gw, double epsilon, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const std::size_t m = gw.edges.size();
  const double ln_n = gw.vertex_count > 1 ? std::log(static_cast<double>(gw.vertex_count)) : 0.0;
  NiCoreResult out;
  out.new_weight.assign(m, 0.0);
  out.finish_round.assign(m, 0);
  std::vector<double> residual(m);
  std::vector<char> available(m, 1);
  std::vector<EdgeId> pool(m);
  for (EdgeId e = 0; e < m; ++e) {
    residual[e] = gw.edges[e].w;
    pool[e] = e;
  }
  Rng rng(seed);
  std::vector<EdgeId> previous;
  std::size_t round = 0;

  while (!pool.empty()) {
    // Edges of the previous forest still available stay in this one.
    UnionFind uf(gw.vertex_count);
    std::vector<EdgeId> forest;
    std::vector<char> in_forest(m, 0);
    for (EdgeId e : previous) {
      if (available[e] && uf.unite(gw.edges[e].u, gw.edges[e].v)) {
        forest.push_back(e);
        in_forest[e] = 1;
      }
    }
    std::sort(pool.begin(), pool.end(), [&](EdgeId a, EdgeId b) {
      return residual[a] != residual[b] ? residual[a] > residual[b] : a < b;
    });
    for (EdgeId e : pool) {
      if (!in_forest[e] && uf.unite(gw.edges[e].u, gw.edges[e].v)) {
        forest.push_back(e);
        in_forest[e] = 1;
      }
    }
    // The forest is unchanged until one of its edges runs out, so advance
    // all those rounds at once.
    double span = residual[forest.front()];
    for (EdgeId e : forest) span = std::min(span, residual[e]);
    const std::size_t first = round + 1;
    round += static_cast<std::size_t>(span);

    std::sort(forest.begin(), forest.end());
    for (EdgeId e : forest) {
      residual[e] -= span;
      if (residual[e] > 0.0) continue;
      out.finish_round[e] = round;
      const double ell =
          std::min(ln_n / (epsilon * epsilon * static_cast<double>(round)), 1.0);
      if (rng.bernoulli(ell)) {
        out.kept.push_back(e);
        out.new_weight[e] = gw.edges[e].w / ell;
      }
      available[e] = 0;
    }
    out.forests.push_back({first, round, forest});
    std::erase_if(pool, [&](EdgeId e) { return available[e] == 0; });
    previous = std::move(forest);
  }
  std::sort(out.kept.begin(), out.kept.end());
  return out;
}

NiReport ni_sparsify(const UncertainGraph& g, double alpha, double theta, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0,1]");
  if (!(theta > 1.0)) throw DomainError("theta must exceed 1");
  const std::size_t m = g.edge_count();
  const std::size_t target = target_edge_count(alpha, m);
  NiReport report;
  if (target >= m) {
    report.graph = UncertainGraph(g.vertex_count(), {g.edges().begin(), g.edges().end()},
                                  ProbabilityDomain::Closed);
    return report;
  }
  const auto weights = to_ni_weights(g);
  const std::uint64_t core_seed = derive_seed(seed, 0);
  constexpr std::size_t kMaxRuns = 100;

  double eps = ni_initial_epsilon(g.vertex_count(), m, alpha);
  auto run = ni_core(weights.graph, eps, core_seed);
  report.calibration_runs = 1;
  if (run.kept.size() > target) {
    while (run.kept.size() > target) {
      if (report.calibration_runs >= kMaxRuns) {
        throw DomainError("NI calibration failed to bracket the target size in 100 steps");
      }
      eps *= theta;
      run = ni_core(weights.graph, eps, core_seed);
      ++report.calibration_runs;
    }
  } else {
    while (run.kept.size() < target) {
      if (report.calibration_runs >= kMaxRuns) {
        throw DomainError("NI calibration failed to bracket the target size in 100 steps");
      }
      auto next = ni_core(weights.graph, eps / theta, core_seed);
      ++report.calibration_runs;
      if (next.kept.size() > target) break;
      eps /= theta;
      run = std::move(next);
    }
  }
  report.epsilon = eps;
  report.core_edges = run.kept.size();

  std::vector<char> chosen(m, 0);
  for (EdgeId e : run.kept) chosen[e] = 1;
  std::size_t count = run.kept.size();
  Rng rng(derive_seed(seed, 1));
  probability_top_up(g, chosen, count, target, rng);

  std::vector<Edge> edges;
  edges.reserve(target);
  for (EdgeId e = 0; e < m; ++e) {
    if (!chosen[e]) continue;
    const auto& src = g.edge(e);
    const double p = run.new_weight[e] > 0.0 ? ni_inverse(run.new_weight[e], weights.p_min) : src.p;
    edges.push_back({src.u, src.v, p});
  }
  report.graph = UncertainGraph(g.vertex_count(), std::move(edges), ProbabilityDomain::Closed);
  return report;
}

}  // namespace usparse
