#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "test_util.hpp"
#include "usparse/backbone.hpp"
#include "usparse/error.hpp"
#include "usparse/union_find.hpp"

using namespace usparse;
using usparse::testing::random_graph;

namespace {

std::vector<EdgeId> all_edges(const UncertainGraph& g) {
  std::vector<EdgeId> ids(g.edge_count());
  std::iota(ids.begin(), ids.end(), EdgeId{0});
  return ids;
}

bool connected_over(const UncertainGraph& g, const std::vector<EdgeId>& edges) {
  UnionFind uf(g.vertex_count());
  std::size_t comps = g.vertex_count();
  for (EdgeId e : edges) comps -= uf.unite(g.edge(e).u, g.edge(e).v) ? 1 : 0;
  return comps == 1;
}

// Prim-free oracle: weight of a maximum spanning forest found by trying every
// subset of edges (tiny graphs only).
double brute_force_max_forest_weight(const UncertainGraph& g) {
  const std::size_t m = g.edge_count();
  double best = 0.0;
  for (std::uint32_t mask = 0; mask < (1U << m); ++mask) {
    UnionFind uf(g.vertex_count());
    bool acyclic = true;
    double w = 0.0;
    for (EdgeId e = 0; e < m && acyclic; ++e) {
      if (!(mask >> e & 1U)) continue;
      acyclic = uf.unite(g.edge(e).u, g.edge(e).v);
      w += g.edge(e).p;
    }
    if (acyclic) best = std::max(best, w);
  }
  return best;
}

UncertainGraph complete_graph(std::size_t n, double p) {
  std::vector<Edge> edges;
  for (VertexId u = 0; u < n; ++u) {
    for (VertexId v = u + 1; v < n; ++v) edges.push_back({u, v, p});
  }
  return UncertainGraph(n, std::move(edges));
}

}  // namespace

TEST(SpanningForest, TriangleKeepsHeaviest) {
  const UncertainGraph g(3, {{0, 1, 0.9}, {1, 2, 0.5}, {0, 2, 0.1}});
  auto f = max_spanning_forest(g, all_edges(g));
  std::vector<double> ps;
  for (EdgeId e : f) ps.push_back(g.edge(e).p);
  EXPECT_EQ(ps, (std::vector<double>{0.9, 0.5}));
}

TEST(SpanningForest, TreeIsItsOwnForest) {
  const UncertainGraph g(4, {{0, 1, 0.2}, {1, 2, 0.7}, {1, 3, 0.4}});
  auto f = max_spanning_forest(g, all_edges(g));
  std::sort(f.begin(), f.end());
  EXPECT_EQ(f, all_edges(g));
}

TEST(SpanningForest, EqualCycleTakesLexicographicallySmallest) {
  // Canonical order: (0,1) (0,3) (1,2) (2,3); the first three close no cycle.
  const UncertainGraph g(4, {{0, 1, 0.5}, {1, 2, 0.5}, {2, 3, 0.5}, {0, 3, 0.5}});
  auto f = max_spanning_forest(g, all_edges(g));
  EXPECT_EQ(f, (std::vector<EdgeId>{0, 1, 2}));
}

TEST(SpanningForest, WeightMatchesBruteForce) {
  for (std::uint64_t seed = 1; seed <= 15; ++seed) {
    const auto g = random_graph(6, 10, seed);
    double w = 0.0;
    for (EdgeId e : max_spanning_forest(g, all_edges(g))) w += g.edge(e).p;
    EXPECT_NEAR(w, brute_force_max_forest_weight(g), 1e-12) << "seed " << seed;
  }
}

TEST(SpanningForest, IteratedForestsAreDisjoint) {
  const auto g = random_graph(40, 300, 2);
  const auto forests = iterated_spanning_forests(g, 10);
  std::set<EdgeId> seen;
  for (const auto& f : forests) {
    for (EdgeId e : f) EXPECT_TRUE(seen.insert(e).second) << "edge " << e << " repeated";
  }
}

TEST(AlphaPrime, CompleteGraphSixForests) {
  // Equal weights, ties by id: each forest is a star that isolates its centre,
  // so the six forests hold 99 + 98 + ... + 94 edges, roughly 6 * 99.
  const auto g = complete_graph(100, 0.5);
  EXPECT_NEAR(default_alpha_prime(g, 0.5), 579.0 / 4950.0, 1e-15);
  EXPECT_NEAR(default_alpha_prime(g, 0.5), 594.0 / 4950.0, 0.03 * 594.0 / 4950.0);
}

TEST(AlphaPrime, TreeCappedByHalfAlpha) {
  const UncertainGraph g(4, {{0, 1, 0.2}, {1, 2, 0.7}, {1, 3, 0.4}});
  EXPECT_DOUBLE_EQ(default_alpha_prime(g, 0.9), 0.45);
}

TEST(AlphaPrime, PositiveOnConnectedGraphs) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EXPECT_GT(default_alpha_prime(random_graph(30, 100, seed), 0.3), 0.0);
  }
}

TEST(Backbone, FloorGivesExactlyOneMaximumSpanningTree) {
  const auto g = random_graph(30, 120, 3);
  const double floor = connectivity_floor(g);
  const auto b = build_backbone(g, floor, floor, 1);
  auto tree = max_spanning_forest(g, all_edges(g));
  std::sort(tree.begin(), tree.end());
  EXPECT_EQ(b.edges, tree);
}

TEST(Backbone, FullRatioKeepsEverything) {
  const auto g = random_graph(30, 120, 3);
  EXPECT_EQ(build_backbone(g, 1.0, 0.5, 1).edges, all_edges(g));
  EXPECT_EQ(random_backbone(g, 1.0, 1).edges, all_edges(g));
}

TEST(Backbone, SizeAndConnectivityProperties) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto g = random_graph(50, 200 + 10 * seed, seed);
    for (double alpha : {0.3, 0.5, 0.8}) {
      const auto b = build_backbone(g, alpha, default_alpha_prime(g, alpha), seed);
      EXPECT_EQ(b.edges.size(), target_edge_count(alpha, g.edge_count()));
      EXPECT_TRUE(connected_over(g, b.edges));
      EXPECT_NO_THROW(validate_backbone(g, b));
      EXPECT_EQ(b.source, BackboneGraph::Source::Spanning);
    }
  }
}

TEST(Backbone, BelowConnectivityFloorExplains) {
  const auto g = random_graph(50, 400, 1);
  try {
    build_backbone(g, 0.001, 0.0005, 1);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("connectivity"), std::string::npos) << e.what();
  }
}

TEST(Backbone, AlphaPrimeAboveAlphaFails) {
  const auto g = random_graph(20, 80, 1);
  EXPECT_THROW(build_backbone(g, 0.4, 0.5, 1), DomainError);
}

TEST(Backbone, RandomBackboneDeterministicAndSized) {
  const auto g = random_graph(40, 250, 6);
  const auto a = random_backbone(g, 0.3, 9);
  const auto b = random_backbone(g, 0.3, 9);
  EXPECT_EQ(a.edges, b.edges);
  EXPECT_EQ(a.edges.size(), target_edge_count(0.3, g.edge_count()));
  EXPECT_EQ(a.source, BackboneGraph::Source::Random);
}

TEST(Backbone, RandomBackboneUniformWhenProbabilitiesEqual) {
  const auto g = complete_graph(5, 0.5);  // 10 edges
  std::vector<int> hits(g.edge_count(), 0);
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    for (EdgeId e : random_backbone(g, 0.3, r).edges) ++hits[e];
  }
  // Each edge is in a uniform 3-subset of 10 with probability 0.3.
  const double sigma = std::sqrt(runs * 0.3 * 0.7);
  for (int h : hits) EXPECT_NEAR(h, runs * 0.3, 5 * sigma);
}

TEST(TopUp, AdmitsTinyProbabilitiesEventually) {
  std::vector<Edge> edges;
  for (VertexId u = 0; u + 1 < 20; ++u) edges.push_back({u, u + 1, 1e-12});
  const UncertainGraph g(20, std::move(edges));
  std::vector<char> chosen(g.edge_count(), 0);
  std::size_t count = 0;
  Rng rng(1);
  probability_top_up(g, chosen, count, 7, rng);
  EXPECT_EQ(count, 7u);
  EXPECT_EQ(std::count(chosen.begin(), chosen.end(), 1), 7);
}
