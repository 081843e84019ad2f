#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "usparse/backbone.hpp"
#include "usparse/benchmarks.hpp"
#include "usparse/error.hpp"

namespace usparse {

namespace {

constexpr VertexId kNoCluster = std::numeric_limits<VertexId>::max();
constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

}  // namespace

WeightedGraph to_ss_weights(const UncertainGraph& g) {
  WeightedGraph out;
  out.vertex_count = g.vertex_count();
  out.edges.reserve(g.edge_count());
  for (const auto& e : g.edges()) out.edges.push_back({e.u, e.v, e.p >= 1.0 ? 0.0 : -std::log(e.p)});
  return out;
}

double spanner_size_bound(std::size_t n, std::size_t t) {
  const double td = static_cast<double>(t);
  return td * std::pow(static_cast<double>(n), 1.0 + 1.0 / td);
}

std::size_t ss_initial_t(std::size_t n, double budget) {
  std::size_t argmin = 1;
  for (std::size_t t = 1; t <= kMaxStretchParameter; ++t) {
    if (spanner_size_bound(n, t) <= budget) return t;
    if (spanner_size_bound(n, t) < spanner_size_bound(n, argmin)) argmin = t;
  }
  return argmin;
}

std::vector<EdgeId> ss_core(const WeightedGraph& gw, std::size_t t, std::uint64_t seed) {
  if (t < 1) throw DomainError("stretch parameter t must be at least 1");
  const std::size_t n = gw.vertex_count;
  const std::size_t m = gw.edges.size();
  auto lighter = [&](EdgeId a, EdgeId b) {
    if (b == kNoEdge) return true;
    const double wa = gw.edges[a].w;
    const double wb = gw.edges[b].w;
    return wa != wb ? wa < wb : a < b;
  };
  auto other = [&](EdgeId e, VertexId x) {
    return gw.edges[e].u == x ? gw.edges[e].v : gw.edges[e].u;
  };

  std::vector<std::vector<EdgeId>> adjacency(n);
  for (EdgeId e = 0; e < m; ++e) {
    adjacency[gw.edges[e].u].push_back(e);
    adjacency[gw.edges[e].v].push_back(e);
  }
  std::vector<char> alive(m, 1), in_spanner(m, 0);
  std::vector<VertexId> cluster(n);
  for (VertexId v = 0; v < n; ++v) cluster[v] = v;

  // Scratch: lightest alive edge from the current vertex to each cluster.
  std::vector<EdgeId> lightest(n, kNoEdge);
  std::vector<VertexId> touched;
  auto scan = [&](VertexId v) {
    touched.clear();
    for (EdgeId e : adjacency[v]) {
      if (!alive[e]) continue;
      const VertexId c = cluster[other(e, v)];
      if (lightest[c] == kNoEdge) touched.push_back(c);
      if (lighter(e, lightest[c])) lightest[c] = e;
    }
  };
  auto clear_scan = [&] {
    for (VertexId c : touched) lightest[c] = kNoEdge;
  };
  auto drop_edges_to = [&](VertexId v, VertexId c) {
    for (EdgeId e : adjacency[v]) {
      if (alive[e] && cluster[other(e, v)] == c) alive[e] = 0;
    }
  };

  Rng rng(seed);
  const double keep = std::pow(static_cast<double>(n), -1.0 / static_cast<double>(t));
  for (std::size_t iter = 1; iter < t; ++iter) {
    std::vector<char> sampled(n, 0);
    for (VertexId c = 0; c < n; ++c) {
      // Centers are the cluster ids; visit each live center once in id order.
      if (cluster[c] == c) sampled[c] = rng.bernoulli(keep) ? 1 : 0;
    }
    std::vector<VertexId> next(n, kNoCluster);
    for (VertexId v = 0; v < n; ++v) {
      if (cluster[v] != kNoCluster && sampled[cluster[v]]) next[v] = cluster[v];
    }
    for (VertexId v = 0; v < n; ++v) {
      if (cluster[v] == kNoCluster || sampled[cluster[v]]) continue;
      scan(v);
      EdgeId best = kNoEdge;
      VertexId best_cluster = kNoCluster;
      for (VertexId c : touched) {
        if (sampled[c] && lighter(lightest[c], best)) {
          best = lightest[c];
          best_cluster = c;
        }
      }
      if (best == kNoEdge) {
        // No sampled neighbour: keep one edge per adjacent cluster and leave.
        for (VertexId c : touched) in_spanner[lightest[c]] = 1;
        for (EdgeId e : adjacency[v]) alive[e] = 0;
      } else {
        in_spanner[best] = 1;
        next[v] = best_cluster;
        for (VertexId c : touched) {
          if (c != best_cluster && lighter(lightest[c], best)) {
            in_spanner[lightest[c]] = 1;
            drop_edges_to(v, c);
          }
        }
        drop_edges_to(v, best_cluster);
      }
      clear_scan();
    }
    cluster = std::move(next);
    for (EdgeId e = 0; e < m; ++e) {
      if (!alive[e]) continue;
      const VertexId cu = cluster[gw.edges[e].u];
      const VertexId cv = cluster[gw.edges[e].v];
      if (cu == kNoCluster || cv == kNoCluster || cu == cv) alive[e] = 0;
    }
  }

  // Join every vertex to each adjacent remaining cluster.
  for (VertexId v = 0; v < n; ++v) {
    scan(v);
    for (VertexId c : touched) in_spanner[lightest[c]] = 1;
    clear_scan();
  }

  std::vector<EdgeId> out;
  for (EdgeId e = 0; e < m; ++e) {
    if (in_spanner[e]) out.push_back(e);
  }
  return out;
}

SsReport ss_sparsify(const UncertainGraph& g, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0,1]");
  const std::size_t m = g.edge_count();
  const std::size_t target = target_edge_count(alpha, m);
  SsReport report;
  if (target >= m) {
    report.graph = UncertainGraph(g.vertex_count(), {g.edges().begin(), g.edges().end()},
                                  ProbabilityDomain::Closed);
    report.spanner.resize(m);
    for (EdgeId e = 0; e < m; ++e) report.spanner[e] = e;
    return report;
  }
  const auto weights = to_ss_weights(g);
  std::size_t t = ss_initial_t(g.vertex_count(), alpha * static_cast<double>(m));
  for (;;) {
    report.spanner = ss_core(weights, t, derive_seed(seed, t));
    ++report.calibration_runs;
    if (report.spanner.size() <= target || t >= kMaxStretchParameter) break;
    ++t;
  }
  report.t = t;

  std::vector<char> chosen(m, 0);
  for (EdgeId e : report.spanner) chosen[e] = 1;
  std::size_t count = report.spanner.size();
  if (count > target) {
    // Drop the least probable edges outside a maximum spanning forest first.
    report.trimmed = true;
    const auto forest = max_spanning_forest(g, report.spanner);
    std::vector<char> in_forest(m, 0);
    for (EdgeId e : forest) in_forest[e] = 1;
    std::vector<EdgeId> order = report.spanner;
    std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
      if (in_forest[a] != in_forest[b]) return in_forest[a] < in_forest[b];
      const double pa = g.edge(a).p;
      const double pb = g.edge(b).p;
      return pa != pb ? pa < pb : a > b;
    });
    for (EdgeId e : order) {
      if (count == target) break;
      chosen[e] = 0;
      --count;
    }
  }
  Rng rng(derive_seed(seed, 1000));
  probability_top_up(g, chosen, count, target, rng);

  std::vector<Edge> edges;
  edges.reserve(target);
  for (EdgeId e = 0; e < m; ++e) {
    if (chosen[e]) edges.push_back(g.edge(e));
  }
  report.graph = UncertainGraph(g.vertex_count(), std::move(edges), ProbabilityDomain::Closed);
  return report;
}

}  // namespace usparse
