#include "usparse/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <queue>

#include "usparse/error.hpp"
#include "usparse/union_find.hpp"

namespace usparse {

UncertainGraph::UncertainGraph(std::size_t vertex_count, std::vector<Edge> edges,
                               ProbabilityDomain domain)
    : vertex_count_(vertex_count), edges_(std::move(edges)) {
  for (auto& e : edges_) {
    if (e.u == e.v) throw DomainError(fmt::format("self-loop at vertex {}", e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.v >= vertex_count_) {
      throw DomainError(fmt::format("vertex {} out of range [0, {})", e.v, vertex_count_));
    }
    const bool ok = domain == ProbabilityDomain::Open ? (e.p > 0.0 && e.p <= 1.0)
                                                      : (e.p >= 0.0 && e.p <= 1.0);
    if (!ok) {
      throw DomainError(fmt::format("probability {} of edge ({}, {}) outside {}", e.p, e.u, e.v,
                                    domain == ProbabilityDomain::Open ? "(0,1]" : "[0,1]"));
    }
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return std::tie(a.u, a.v) < std::tie(b.u, b.v); });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw DomainError(fmt::format("duplicate edge ({}, {})", edges_[i].u, edges_[i].v));
    }
  }

  offsets_.assign(vertex_count_ + 1, 0);
  for (const auto& e : edges_) {
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < vertex_count_; ++i) offsets_[i + 1] += offsets_[i];
  incidence_.resize(2 * edges_.size());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    incidence_[cursor[edges_[id].u]++] = id;
    incidence_[cursor[edges_[id].v]++] = id;
  }
}

std::optional<EdgeId> UncertainGraph::find_edge(VertexId u, VertexId v) const {
  if (u > v) std::swap(u, v);
  auto it = std::lower_bound(
      edges_.begin(), edges_.end(), std::pair{u, v},
      [](const Edge& e, const std::pair<VertexId, VertexId>& key) {
        return std::tie(e.u, e.v) < std::tie(key.first, key.second);
      });
  if (it == edges_.end() || it->u != u || it->v != v) return std::nullopt;
  return static_cast<EdgeId>(it - edges_.begin());
}

std::size_t UncertainGraph::component_count() const {
  UnionFind uf(vertex_count_);
  std::size_t components = vertex_count_;
  for (const auto& e : edges_) {
    if (uf.unite(e.u, e.v)) --components;
  }
  return components;
}

VertexSet::VertexSet(std::vector<VertexId> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool VertexSet::contains(VertexId u) const {
  return std::binary_search(members_.begin(), members_.end(), u);
}

WorldAdjacency::WorldAdjacency(const UncertainGraph& g, const DeterministicWorld& world)
    : offsets_(world.vertex_count + 1, 0) {
  for (EdgeId id : world.present) {
    const auto& e = g.edge(id);
    ++offsets_[e.u + 1];
    ++offsets_[e.v + 1];
  }
  for (std::size_t i = 0; i < world.vertex_count; ++i) offsets_[i + 1] += offsets_[i];
  targets_.resize(offsets_.back());
  std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
  // present is ascending, so both endpoint lists come out sorted.
  for (EdgeId id : world.present) {
    const auto& e = g.edge(id);
    targets_[cursor[e.u]++] = e.v;
  }
  for (EdgeId id : world.present) {
    const auto& e = g.edge(id);
    targets_[cursor[e.v]++] = e.u;
  }
  for (std::size_t u = 0; u < world.vertex_count; ++u) {
    std::sort(targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]),
              targets_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]));
  }
}

double edge_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double graph_entropy(const UncertainGraph& g) {
  double h = 0.0;
  for (const auto& e : g.edges()) h += edge_entropy(e.p);
  return h;
}

static void check_vertex(const UncertainGraph& g, VertexId u) {
  if (u >= g.vertex_count()) {
    throw DomainError(fmt::format("vertex {} out of range [0, {})", u, g.vertex_count()));
  }
}

double expected_degree(const UncertainGraph& g, VertexId u) {
  check_vertex(g, u);
  double d = 0.0;
  for (EdgeId id : g.incident(u)) d += g.edge(id).p;
  return d;
}

std::vector<double> expected_degrees(const UncertainGraph& g) {
  std::vector<double> d(g.vertex_count(), 0.0);
  for (VertexId u = 0; u < g.vertex_count(); ++u) {
    for (EdgeId id : g.incident(u)) d[u] += g.edge(id).p;
  }
  return d;
}

namespace {

double cut_size_with_mask(const UncertainGraph& g, const std::vector<char>& in_set) {
  double c = 0.0;
  for (const auto& e : g.edges()) {
    if (in_set[e.u] != in_set[e.v]) c += e.p;
  }
  return c;
}

std::vector<char> membership(std::size_t n, std::span<const VertexId> members) {
  std::vector<char> in_set(n, 0);
  for (VertexId u : members) in_set[u] = 1;
  return in_set;
}

}  // namespace

double expected_cut_size(const UncertainGraph& g, const VertexSet& s) {
  for (VertexId u : s.members()) check_vertex(g, u);
  // Incident sums are exact for singletons and match expected_degree bitwise.
  if (s.size() == 1) return expected_degree(g, s.members()[0]);
  return cut_size_with_mask(g, membership(g.vertex_count(), s.members()));
}

double discrepancy(const UncertainGraph& g, const UncertainGraph& g2, const VertexSet& s,
                   DiscrepancyMode mode) {
  if (g.vertex_count() != g2.vertex_count()) {
    throw DomainError("discrepancy needs graphs over the same vertex set");
  }
  const double original = expected_cut_size(g, s);
  const double delta = original - expected_cut_size(g2, s);
  if (mode == DiscrepancyMode::Absolute) return delta;
  if (original <= 0.0) throw DomainError("undefined relative discrepancy: zero original cut");
  return delta / original;
}

std::vector<VertexId> sample_k_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<VertexId> chosen;
  chosen.reserve(k);
  std::vector<char> taken(n, 0);
  for (std::size_t j = n - k; j < n; ++j) {
    const auto t = static_cast<VertexId>(rng.below(j + 1));
    const auto pick = taken[t] ? static_cast<VertexId>(j) : t;
    taken[pick] = 1;
    chosen.push_back(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

double sampled_k_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2,
                                 std::size_t k, std::size_t n_cuts, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  if (g2.vertex_count() != n) throw DomainError("graphs differ in vertex count");
  if (k < 1 || k > n) throw DomainError(fmt::format("k={} outside [1, {}]", k, n));
  if (n_cuts < 1) throw DomainError("n_cuts must be positive");
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < n_cuts; ++i) {
    const auto members = sample_k_subset(n, k, rng);
    const auto mask = membership(n, members);
    total += std::fabs(cut_size_with_mask(g, mask) - cut_size_with_mask(g2, mask));
  }
  return total / static_cast<double>(n_cuts);
}

double sampled_cut_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2,
                                   std::size_t n_cuts, std::uint64_t seed) {
  const std::size_t n = g.vertex_count();
  if (g2.vertex_count() != n) throw DomainError("graphs differ in vertex count");
  if (n == 0) return 0.0;
  if (n_cuts < 1) throw DomainError("n_cuts must be positive");
  Rng rng(seed);
  double total = 0.0;
  for (std::size_t i = 0; i < n_cuts; ++i) {
    const std::size_t k = 1 + rng.below(n);
    const auto mask = membership(n, sample_k_subset(n, k, rng));
    total += std::fabs(cut_size_with_mask(g, mask) - cut_size_with_mask(g2, mask));
  }
  return total / static_cast<double>(n_cuts);
}

double degree_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2) {
  if (g2.vertex_count() != g.vertex_count()) throw DomainError("graphs differ in vertex count");
  if (g.vertex_count() == 0) return 0.0;
  const auto d = expected_degrees(g);
  const auto d2 = expected_degrees(g2);
  double total = 0.0;
  for (std::size_t u = 0; u < d.size(); ++u) total += std::fabs(d[u] - d2[u]);
  return total / static_cast<double>(d.size());
}

DeterministicWorld sample_world(const UncertainGraph& g, Rng& rng) {
  DeterministicWorld world{g.vertex_count(), {}};
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (rng.bernoulli(g.edge(id).p)) world.present.push_back(id);
  }
  return world;
}

double exact_query_probability(const UncertainGraph& g, const WorldPredicate& predicate) {
  const std::size_t m = g.edge_count();
  if (m > kExactOracleEdgeCap) {
    throw DomainError(fmt::format("exact enumeration refuses {} edges (cap {})", m,
                                  kExactOracleEdgeCap));
  }
  double total = 0.0;
  DeterministicWorld world{g.vertex_count(), {}};
  world.present.reserve(m);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    world.present.clear();
    double pr = 1.0;
    for (EdgeId id = 0; id < m; ++id) {
      const double p = g.edge(id).p;
      if (mask >> id & 1U) {
        world.present.push_back(id);
        pr *= p;
      } else {
        pr *= 1.0 - p;
      }
    }
    if (pr > 0.0 && predicate(g, world)) total += pr;
  }
  return total;
}

bool world_reachable(const UncertainGraph& g, const DeterministicWorld& world, VertexId s,
                     VertexId t) {
  UnionFind uf(world.vertex_count);
  for (EdgeId id : world.present) uf.unite(g.edge(id).u, g.edge(id).v);
  return uf.find(s) == uf.find(t);
}

bool world_connected(const UncertainGraph& g, const DeterministicWorld& world) {
  if (world.vertex_count <= 1) return true;
  UnionFind uf(world.vertex_count);
  std::size_t components = world.vertex_count;
  for (EdgeId id : world.present) {
    if (uf.unite(g.edge(id).u, g.edge(id).v)) --components;
  }
  return components == 1;
}

std::size_t target_edge_count(double alpha, std::size_t edge_count) {
  // nearbyint honours the default round-half-to-even mode.
  return static_cast<std::size_t>(std::nearbyint(alpha * static_cast<double>(edge_count)));
}

}  // namespace usparse
