#include "usparse/backbone.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "usparse/error.hpp"
#include "usparse/union_find.hpp"

namespace usparse {

namespace {

constexpr std::size_t kStallPasses = 100;

std::vector<EdgeId> collect(const std::vector<char>& chosen) {
  std::vector<EdgeId> out;
  for (EdgeId id = 0; id < chosen.size(); ++id) {
    if (chosen[id]) out.push_back(id);
  }
  return out;
}

}  // namespace

std::vector<EdgeId> max_spanning_forest(const UncertainGraph& g,
                                        std::span<const EdgeId> available) {
  std::vector<EdgeId> order(available.begin(), available.end());
  std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) {
    const double pa = g.edge(a).p;
    const double pb = g.edge(b).p;
    return pa != pb ? pa > pb : a < b;
  });
  UnionFind uf(g.vertex_count());
  std::vector<EdgeId> forest;
  for (EdgeId id : order) {
    if (uf.unite(g.edge(id).u, g.edge(id).v)) forest.push_back(id);
  }
  return forest;
}

std::vector<std::vector<EdgeId>> iterated_spanning_forests(const UncertainGraph& g,
                                                           std::size_t max_forests) {
  std::vector<EdgeId> remaining(g.edge_count());
  std::iota(remaining.begin(), remaining.end(), EdgeId{0});
  std::vector<std::vector<EdgeId>> forests;
  while (forests.size() < max_forests && !remaining.empty()) {
    auto forest = max_spanning_forest(g, remaining);
    std::vector<char> taken(g.edge_count(), 0);
    for (EdgeId id : forest) taken[id] = 1;
    std::erase_if(remaining, [&](EdgeId id) { return taken[id] != 0; });
    forests.push_back(std::move(forest));
  }
  return forests;
}

double default_alpha_prime(const UncertainGraph& g, double alpha) {
  if (g.edge_count() == 0) return 0.0;
  std::size_t forest_edges = 0;
  for (const auto& f : iterated_spanning_forests(g, 6)) forest_edges += f.size();
  return std::min(0.5 * alpha,
                  static_cast<double>(forest_edges) / static_cast<double>(g.edge_count()));
}

double connectivity_floor(const UncertainGraph& g) {
  if (g.edge_count() == 0) return 0.0;
  const std::size_t forest = g.vertex_count() - g.component_count();
  return static_cast<double>(forest) / static_cast<double>(g.edge_count());
}

void probability_top_up(const UncertainGraph& g, std::vector<char>& chosen,
                        std::size_t& chosen_count, std::size_t target, Rng& rng) {
  std::vector<EdgeId> pool;
  for (EdgeId id = 0; id < g.edge_count(); ++id) {
    if (!chosen[id]) pool.push_back(id);
  }
  std::size_t stalled = 0;
  while (chosen_count < target && !pool.empty()) {
    rng.shuffle(pool.begin(), pool.end());
    bool admitted = false;
    for (EdgeId id : pool) {
      if (chosen_count == target) break;
      if (rng.bernoulli(g.edge(id).p)) {
        chosen[id] = 1;
        ++chosen_count;
        admitted = true;
      }
    }
    std::erase_if(pool, [&](EdgeId id) { return chosen[id] != 0; });
    stalled = admitted ? 0 : stalled + 1;
    if (stalled >= kStallPasses) {
      std::sort(pool.begin(), pool.end(), [&](EdgeId a, EdgeId b) {
        const double pa = g.edge(a).p;
        const double pb = g.edge(b).p;
        return pa != pb ? pa > pb : a < b;
      });
      for (EdgeId id : pool) {
        if (chosen_count == target) break;
        chosen[id] = 1;
        ++chosen_count;
      }
      break;
    }
  }
}

void validate_backbone(const UncertainGraph& g, const BackboneGraph& backbone) {
  if (backbone.vertex_count != g.vertex_count()) {
    throw DomainError("backbone vertex count differs from the graph");
  }
  for (std::size_t i = 0; i < backbone.edges.size(); ++i) {
    const EdgeId id = backbone.edges[i];
    if (id >= g.edge_count()) throw DomainError(fmt::format("backbone edge id {} out of range", id));
    if (i > 0 && backbone.edges[i - 1] >= id) {
      throw DomainError("backbone edge ids must be ascending and unique");
    }
  }
}

BackboneGraph build_backbone(const UncertainGraph& g, double alpha, double alpha_prime,
                             std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0,1]");
  const double floor = connectivity_floor(g);
  const std::size_t m = g.edge_count();
  const std::size_t target = target_edge_count(alpha, m);
  const std::size_t forest_size = g.vertex_count() - g.component_count();
  if (target < forest_size) {
    throw DomainError(fmt::format(
        "alpha={} keeps {} edges but a spanning forest needs {} (alpha >= {:.6g}); a smaller "
        "backbone cannot preserve connectivity",
        alpha, target, forest_size, floor));
  }
  if (alpha_prime > alpha) throw DomainError("alpha' must not exceed alpha");

  std::vector<char> chosen(m, 0);
  std::size_t count = 0;
  std::vector<EdgeId> remaining(m);
  std::iota(remaining.begin(), remaining.end(), EdgeId{0});
  const double spanning_goal = alpha_prime * static_cast<double>(m);

  // The first tree is unconditional; further forests until alpha' |E| (the
  // original |E| throughout). A forest that would overshoot the target is
  // truncated in Kruskal order.
  bool first = true;
  while (!remaining.empty() && count < target &&
         (first || static_cast<double>(count) < spanning_goal)) {
    first = false;
    const auto forest = max_spanning_forest(g, remaining);
    if (forest.empty()) break;
    for (EdgeId id : forest) {
      if (count == target) break;
      chosen[id] = 1;
      ++count;
    }
    std::erase_if(remaining, [&](EdgeId id) { return chosen[id] != 0; });
  }

  Rng rng(seed);
  probability_top_up(g, chosen, count, target, rng);
  return {g.vertex_count(), collect(chosen), BackboneGraph::Source::Spanning};
}

BackboneGraph random_backbone(const UncertainGraph& g, double alpha, std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0,1]");
  const std::size_t target = target_edge_count(alpha, g.edge_count());
  std::vector<char> chosen(g.edge_count(), 0);
  std::size_t count = 0;
  Rng rng(seed);
  probability_top_up(g, chosen, count, target, rng);
  return {g.vertex_count(), collect(chosen), BackboneGraph::Source::Random};
}

}  // namespace usparse
