#include "usparse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "usparse/error.hpp"
#include "usparse/union_find.hpp"

namespace usparse {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

QueryKind parse_query(const std::string& text) {
  if (text == "pr") return QueryKind::PageRank;
  if (text == "sp") return QueryKind::ShortestPath;
  if (text == "rl") return QueryKind::Reliability;
  if (text == "cc") return QueryKind::ClusteringCoefficient;
  throw DomainError(fmt::format("unknown query '{}' (expected pr, sp, rl or cc)", text));
}

std::string query_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::PageRank: return "pr";
    case QueryKind::ShortestPath: return "sp";
    case QueryKind::Reliability: return "rl";
    case QueryKind::ClusteringCoefficient: return "cc";
  }
  return "?";
}

bool is_pair_query(QueryKind kind) {
  return kind == QueryKind::ShortestPath || kind == QueryKind::Reliability;
}

double QueryDistribution::cdf(double x) const {
  if (values.empty()) return 0.0;
  const auto below = std::upper_bound(values.begin(), values.end(), x) - values.begin();
  return static_cast<double>(below) / static_cast<double>(values.size());
}

double QueryDistribution::mean() const {
  if (values.empty()) return kNaN;
  double total = 0.0;
  for (double v : values) total += v;
  return total / static_cast<double>(values.size());
}

std::size_t worker_count() {
  if (const char* env = std::getenv("USPARSE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && parsed > 0) return static_cast<std::size_t>(parsed);
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

std::vector<QueryUnit> default_units(const UncertainGraph& g, QueryKind kind,
                                     std::size_t n_pairs, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  std::vector<QueryUnit> units;
  if (!is_pair_query(kind)) {
    units.reserve(n);
    for (VertexId u = 0; u < n; ++u) units.push_back({u, u});
    return units;
  }
  if (n < 2) return units;
  Rng rng(seed);
  units.reserve(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto s = static_cast<VertexId>(rng.below(n));
    auto t = static_cast<VertexId>(rng.below(n - 1));
    if (t >= s) ++t;
    units.push_back({s, t});
  }
  return units;
}

std::vector<double> pagerank_world(const UncertainGraph& g, const DeterministicWorld& world) {
  constexpr double kDamping = 0.85;
  const std::size_t n = world.vertex_count;
  if (n == 0) return {};
  const WorldAdjacency adj(g, world);
  const double base = 1.0 / static_cast<double>(n);
  std::vector<double> rank(n, base), next(n);
  for (int iter = 0; iter < 200; ++iter) {
    double dangling = 0.0;
    for (VertexId u = 0; u < n; ++u) {
      if (adj.neighbors(u).empty()) dangling += rank[u];
    }
    const double spread = ((1.0 - kDamping) + kDamping * dangling) * base;
    std::fill(next.begin(), next.end(), spread);
    for (VertexId u = 0; u < n; ++u) {
      const auto nb = adj.neighbors(u);
      if (nb.empty()) continue;
      const double share = kDamping * rank[u] / static_cast<double>(nb.size());
      for (VertexId v : nb) next[v] += share;
    }
    double change = 0.0;
    for (std::size_t u = 0; u < n; ++u) change += std::fabs(next[u] - rank[u]);
    rank.swap(next);
    if (change < 1e-10) break;
  }
  return rank;
}

double clustering_coefficient_world(const WorldAdjacency& adjacency, VertexId u) {
  const auto nb = adjacency.neighbors(u);
  const std::size_t d = nb.size();
  if (d < 2) return 0.0;
  std::size_t links = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const auto other = adjacency.neighbors(nb[i]);
    // Count neighbours of nb[i] that are also neighbours of u and come later.
    for (std::size_t j = i + 1; j < d; ++j) {
      if (std::binary_search(other.begin(), other.end(), nb[j])) ++links;
    }
  }
  return 2.0 * static_cast<double>(links) / static_cast<double>(d * (d - 1));
}

std::vector<int> hop_distances(const WorldAdjacency& adjacency, VertexId s) {
  std::vector<int> dist(adjacency.vertex_count(), -1);
  std::vector<VertexId> frontier{s};
  dist[s] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const VertexId u = frontier[head];
    for (VertexId v : adjacency.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        frontier.push_back(v);
      }
    }
  }
  return dist;
}

namespace {

// Values of every unit in one world; NaN marks "no value" (disconnected SP).
void evaluate_world(const UncertainGraph& g, const DeterministicWorld& world, QueryKind kind,
                    std::span<const QueryUnit> units,
                    const std::map<VertexId, std::vector<std::size_t>>& by_source,
                    double* out) {
  switch (kind) {
    case QueryKind::PageRank: {
      const auto rank = pagerank_world(g, world);
      for (std::size_t i = 0; i < units.size(); ++i) out[i] = rank[units[i].s];
      break;
    }
    case QueryKind::ClusteringCoefficient: {
      const WorldAdjacency adj(g, world);
      for (std::size_t i = 0; i < units.size(); ++i) {
        out[i] = clustering_coefficient_world(adj, units[i].s);
      }
      break;
    }
    case QueryKind::Reliability: {
      UnionFind uf(world.vertex_count);
      for (EdgeId id : world.present) uf.unite(g.edge(id).u, g.edge(id).v);
      for (std::size_t i = 0; i < units.size(); ++i) {
        out[i] = uf.find(units[i].s) == uf.find(units[i].t) ? 1.0 : 0.0;
      }
      break;
    }
    case QueryKind::ShortestPath: {
      const WorldAdjacency adj(g, world);
      for (const auto& [s, members] : by_source) {
        const auto dist = hop_distances(adj, s);
        for (std::size_t i : members) {
          const int d = dist[units[i].t];
          out[i] = d < 0 ? kNaN : static_cast<double>(d);
        }
      }
      break;
    }
  }
}

}  // namespace

std::vector<QueryDistribution> mc_distributions(const UncertainGraph& g, QueryKind kind,
                                                std::span<const QueryUnit> units,
                                                std::size_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw DomainError("n_samples must be at least 1");
  const std::size_t n = g.vertex_count();
  for (const auto& unit : units) {
    if (unit.s >= n || (is_pair_query(kind) && unit.t >= n)) {
      throw DomainError(fmt::format("query unit ({}, {}) out of range [0, {})", unit.s, unit.t, n));
    }
  }
  std::map<VertexId, std::vector<std::size_t>> by_source;
  if (kind == QueryKind::ShortestPath) {
    for (std::size_t i = 0; i < units.size(); ++i) by_source[units[i].s].push_back(i);
  }

  const std::size_t width = units.size();
  std::vector<double> table(n_samples * width);
  const std::size_t workers = std::min(worker_count(), n_samples);
  auto work = [&](std::size_t worker) {
    for (std::size_t i = worker; i < n_samples; i += workers) {
      Rng rng(derive_seed(seed, i));
      const auto world = sample_world(g, rng);
      evaluate_world(g, world, kind, units, by_source, table.data() + i * width);
    }
  };
  if (workers <= 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }

  std::vector<QueryDistribution> out(width);
  for (std::size_t u = 0; u < width; ++u) {
    auto& dist = out[u];
    dist.kind = kind;
    dist.unit = units[u];
    dist.sample_count = n_samples;
    dist.values.reserve(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) {
      const double v = table[i * width + u];
      if (!std::isnan(v)) dist.values.push_back(v);
    }
    std::sort(dist.values.begin(), dist.values.end());
  }
  return out;
}

double earth_movers_distance(const QueryDistribution& f1, const QueryDistribution& f2) {
  if (f1.empty() || f2.empty()) throw DomainError("earth mover's distance of an empty distribution");
  std::vector<double> grid;
  grid.reserve(f1.values.size() + f2.values.size());
  std::merge(f1.values.begin(), f1.values.end(), f2.values.begin(), f2.values.end(),
             std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double total = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    total += std::fabs(f1.cdf(grid[i - 1]) - f2.cdf(grid[i - 1])) * (grid[i] - grid[i - 1]);
  }
  return total;
}

double unbiased_variance(std::span<const double> values) {
  if (values.size() < 2) return kNaN;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(values.size() - 1);
}

std::vector<double> variance_protocol(const UncertainGraph& g, QueryKind kind,
                                      std::span<const QueryUnit> units, std::size_t n_samples,
                                      std::size_t n_runs, std::uint64_t seed) {
  if (n_runs < 2) throw DomainError("variance protocol needs at least 2 runs");
  std::vector<std::vector<double>> estimates(units.size());
  for (std::size_t r = 0; r < n_runs; ++r) {
    const auto dists = mc_distributions(g, kind, units, n_samples, derive_seed(seed, r));
    for (std::size_t u = 0; u < units.size(); ++u) {
      if (!dists[u].empty()) estimates[u].push_back(dists[u].mean());
    }
  }
  std::vector<double> out(units.size());
  for (std::size_t u = 0; u < units.size(); ++u) out[u] = unbiased_variance(estimates[u]);
  return out;
}

double relative_entropy(const UncertainGraph& g, const UncertainGraph& g2) {
  const double h = graph_entropy(g);
  if (!(h > 0.0)) throw DomainError("relative entropy undefined: original graph has zero entropy");
  return graph_entropy(g2) / h;
}

EmdSummary emd_report(const UncertainGraph& g, const UncertainGraph& g2, QueryKind kind,
                      std::span<const QueryUnit> units, std::size_t n_samples,
                      std::uint64_t seed, std::optional<std::uint64_t> seed2) {
  if (g.vertex_count() != g2.vertex_count()) {
    throw DomainError(fmt::format("vertex counts differ: {} vs {}", g.vertex_count(),
                                  g2.vertex_count()));
  }
  const auto d1 = mc_distributions(g, kind, units, n_samples, seed);
  const auto d2 = mc_distributions(g2, kind, units, n_samples, seed2.value_or(seed));
  EmdSummary summary;
  std::vector<double> kept;
  for (std::size_t u = 0; u < units.size(); ++u) {
    EmdUnitRow row{units[u], d1[u].mean(), d2[u].mean(), kNaN, false};
    if (d1[u].empty() || d2[u].empty()) {
      row.excluded = true;
      ++summary.excluded;
    } else {
      row.distance = earth_movers_distance(d1[u], d2[u]);
      kept.push_back(row.distance);
    }
    summary.rows.push_back(row);
  }
  if (kept.empty()) {
    summary.mean = summary.median = summary.max = kNaN;
    return summary;
  }
  double total = 0.0;
  for (double v : kept) total += v;
  summary.mean = total / static_cast<double>(kept.size());
  std::sort(kept.begin(), kept.end());
  const std::size_t mid = kept.size() / 2;
  summary.median = kept.size() % 2 ? kept[mid] : 0.5 * (kept[mid - 1] + kept[mid]);
  summary.max = kept.back();
  return summary;
}

}  // namespace usparse
