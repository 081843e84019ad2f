#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>

#include "test_util.hpp"
#include "usparse/backbone.hpp"
#include "usparse/error.hpp"
#include "usparse/gdb.hpp"

using namespace usparse;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;
using usparse::testing::random_graph;

namespace {

BackboneGraph full_backbone(const UncertainGraph& g) {
  BackboneGraph b{g.vertex_count(), {}, BackboneGraph::Source::Spanning};
  for (EdgeId e = 0; e < g.edge_count(); ++e) b.edges.push_back(e);
  return b;
}

BackboneGraph subset_backbone(const UncertainGraph& g, std::vector<EdgeId> edges) {
  return {g.vertex_count(), std::move(edges), BackboneGraph::Source::Spanning};
}

// Binomial sums from an explicit Pascal triangle.
cpp_int pascal_sum(long n, long k) {
  if (k < 0) return 0;
  std::vector<std::vector<cpp_int>> c(n + 1);
  for (long i = 0; i <= n; ++i) {
    c[i].assign(i + 1, 1);
    for (long j = 1; j < i; ++j) c[i][j] = c[i - 1][j - 1] + c[i - 1][j];
  }
  cpp_int total = 0;
  for (long j = 0; j <= std::min(k, n); ++j) total += c[n][j];
  return total;
}

// Exact rational evaluation of the general k-cut step, rounded once.
double cut_step_oracle(double du, double dv, double dh, long n, long k) {
  const cpp_rational num = cpp_rational(pascal_sum(n - 3, k - 1)) * (cpp_rational(du) + cpp_rational(dv)) +
                           4 * cpp_rational(pascal_sum(n - 4, k - 2)) * cpp_rational(dh);
  const cpp_rational den = 2 * cpp_rational(pascal_sum(n - 2, k - 1));
  return static_cast<double>(num / den);
}

// Discrepancy of u recomputed from the graph and the state's probabilities.
std::vector<double> disc_from_scratch(const SparsifierState& s) {
  const auto& g = s.graph();
  std::vector<double> d(g.vertex_count(), 0.0);
  for (EdgeId e = 0; e < g.edge_count(); ++e) {
    d[g.edge(e).u] += g.edge(e).p - s.prob(e);
    d[g.edge(e).v] += g.edge(e).p - s.prob(e);
  }
  return d;
}

}  // namespace

TEST(Pi, Modes) {
  const UncertainGraph g(4, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 0.5}});
  EXPECT_EQ(pi(0, DiscrepancyMode::Absolute, g), 1.0);
  EXPECT_EQ(pi(0, DiscrepancyMode::Relative, g), 2.5);
  const UncertainGraph h(3, {{0, 1, 0.5}});
  EXPECT_EQ(pi(2, DiscrepancyMode::Relative, h), 1.0);
}

TEST(DegreeStep, SingleEdgeWorkedExample) {
  const double stp = degree_step(0.2, 0.6, 0.0, 1.0, 1.0);
  EXPECT_EQ(stp, 0.3);
  EXPECT_EQ(0.2 + stp, 0.5);
  EXPECT_EQ(apply_update(0.2, stp, 1.0), 0.5);
}

TEST(DegreeStep, FixedPointAndSymmetry) {
  EXPECT_EQ(degree_step(0.4, 0.0, 0.0, 1.0, 1.0), 0.0);
  EXPECT_EQ(degree_step(0.4, 0.4, -0.4, 1.0, 1.0), 0.0);
}

TEST(DegreeStep, MinimizesWeightedPairObjective) {
  // The step x minimizes (a - x)^2 / pi_u + (b - x)^2 / pi_v.
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform() * 4 - 2, b = rng.uniform() * 4 - 2;
    const double pu = 0.1 + rng.uniform() * 5, pv = 0.1 + rng.uniform() * 5;
    const double x = degree_step(0.5, a, b, pu, pv);
    const double grad = -2 * (a - x) / pu - 2 * (b - x) / pv;
    EXPECT_NEAR(grad, 0.0, 1e-9);
  }
}

TEST(BinomSum, Examples) {
  EXPECT_EQ(binom_sum(5, 2), 16);
  EXPECT_EQ(binom_sum(7, -1), 0);
  EXPECT_EQ(binom_sum(4, 9), 16);
  EXPECT_EQ(binom_sum(9, 0), 1);
}

TEST(BinomSum, MatchesPascalTriangle) {
  for (long n = 0; n <= 60; n += 3) {
    for (long k = -1; k <= n + 2; ++k) EXPECT_EQ(binom_sum(n, k), pascal_sum(n, k)) << n << "," << k;
  }
}

TEST(CutStep, KOneReducesToDegreeStep) {
  Rng rng(17);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform() * 2 - 1, b = rng.uniform() * 2 - 1, dh = rng.uniform() * 10 - 5;
    const std::size_t n = 2 + rng.below(200);
    EXPECT_EQ(cut_step(0.3, a, b, dh, n, 1), degree_step(0.3, a, b, 1.0, 1.0));
  }
}

TEST(CutStep, KTwoClosedForm) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform() - 0.5, b = rng.uniform() - 0.5, dh = rng.uniform() * 3 - 1;
    const std::size_t n = 4 + rng.below(100);
    const double nn = static_cast<double>(n);
    const double expect = ((nn - 2) * (a + b) + 4 * dh) / (2 * nn - 2);
    EXPECT_NEAR(cut_step(0.1, a, b, dh, n, 2), expect, 1e-12 * (1 + std::fabs(expect)));
  }
}

TEST(CutStep, MatchesExactRationalOracle) {
  Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    const long n = 4 + static_cast<long>(rng.below(60));
    const long k = 1 + static_cast<long>(rng.below(3));
    const double a = rng.uniform() - 0.5, b = rng.uniform() - 0.5, dh = rng.uniform() * 4 - 2;
    const double expect = cut_step_oracle(a, b, dh, n, k);
    EXPECT_NEAR(cut_step(0.0, a, b, dh, static_cast<std::size_t>(n), static_cast<std::size_t>(k)),
                expect, 1e-12 * (1 + std::fabs(expect)));
  }
}

TEST(CutStep, RejectsTooFewVertices) {
  EXPECT_THROW(cut_step_weights(3, 2), DomainError);
  EXPECT_THROW(cut_step_weights(5, 6), DomainError);
  EXPECT_THROW(cut_step_weights(5, 0), DomainError);
}

TEST(DeltaHat, TwoDisjointEdges) {
  const UncertainGraph g(4, {{0, 1, 0.7}, {2, 3, 0.4}});
  SparsifierState s(g, subset_backbone(g, {0}), DiscrepancyMode::Absolute);
  EXPECT_NEAR(delta_hat(0, s), 0.4, 1e-15);
}

TEST(DeltaHat, FullBackboneIsZero) {
  const auto g = random_graph(12, 30, 2);
  SparsifierState s(g, full_backbone(g), DiscrepancyMode::Absolute);
  for (EdgeId e = 0; e < g.edge_count(); ++e) EXPECT_NEAR(delta_hat(e, s), 0.0, 1e-12);
}

TEST(DeltaHat, MatchesDirectSumAfterMixedUpdates) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto g = random_graph(9, 20, seed);
    std::vector<EdgeId> kept;
    for (EdgeId e = 0; e < g.edge_count(); e += 2) kept.push_back(e);
    SparsifierState s(g, subset_backbone(g, kept), DiscrepancyMode::Absolute);
    Rng rng(seed);
    for (EdgeId e : kept) s.set_prob(e, rng.uniform());
    for (EdgeId e = 0; e < g.edge_count(); ++e) {
      const auto& x = g.edge(e);
      double direct = 0.0;
      for (EdgeId f = 0; f < g.edge_count(); ++f) {
        const auto& y = g.edge(f);
        if (y.u == x.u || y.u == x.v || y.v == x.u || y.v == x.v) continue;
        direct += y.p - s.prob(f);
      }
      EXPECT_NEAR(delta_hat(e, s), direct, 1e-12);
    }
  }
}

TEST(NcutStep, Examples) {
  const UncertainGraph g(4, {{0, 1, 0.5}, {2, 3, 0.8}});
  SparsifierState s(g, full_backbone(g), DiscrepancyMode::Absolute);
  EXPECT_NEAR(ncut_step(0, s), 0.0, 1e-15);
  s.set_prob(1, 0.5);
  EXPECT_NEAR(ncut_step(0, s), 0.3, 1e-15);
}

TEST(NcutStep, MatchesDirectSum) {
  const auto g = random_graph(8, 14, 4);
  SparsifierState s(g, subset_backbone(g, {0, 3, 5, 9}), DiscrepancyMode::Absolute);
  s.set_prob(0, 0.1);
  s.set_prob(5, 0.95);
  for (EdgeId e : {0u, 3u, 5u, 9u}) {
    double direct = 0.0;
    for (EdgeId f = 0; f < g.edge_count(); ++f) {
      if (f != e) direct += g.edge(f).p - s.prob(f);
    }
    EXPECT_NEAR(ncut_step(e, s), direct, 1e-12);
  }
}

TEST(NcutStep, UnclampedUpdateAddsMassGap) {
  const UncertainGraph g(6, {{0, 1, 0.9}, {2, 3, 0.2}, {4, 5, 0.1}});
  SparsifierState s(g, subset_backbone(g, {0, 1}), DiscrepancyMode::Absolute);
  // Edge 1 at 0.2 receives the missing 0.1 from the dropped edge; the step
  // lowers nothing and raises entropy, so h = 1 keeps it whole.
  const double gap = ncut_step(1, s);
  const double p = apply_update(s.prob(1), gap, 1.0);
  EXPECT_NEAR(p - s.prob(1), 0.1, 1e-15);
}

TEST(ApplyUpdate, Examples) {
  EXPECT_EQ(apply_update(0.9, 0.3, 0.0), 1.0);
  EXPECT_EQ(apply_update(0.9, 0.3, 0.7), 1.0);
  EXPECT_EQ(apply_update(0.5, 0.0, 0.3), 0.5);
  EXPECT_NEAR(apply_update(0.2, 0.3, 0.05), 0.215, 1e-15);
}

TEST(ApplyUpdate, ZeroHFreezesEntropyRaisingSteps) {
  Rng rng(8);
  for (int i = 0; i < 10000; ++i) {
    const double p = rng.uniform();
    const double stp = rng.uniform() * 2 - 1;
    const double full = std::clamp(p + stp, 0.0, 1.0);
    const double out = apply_update(p, stp, 0.0);
    if (edge_entropy(full) > edge_entropy(p)) {
      EXPECT_EQ(out, p);
    } else {
      EXPECT_EQ(out, full);
    }
    EXPECT_GE(out, 0.0);
    EXPECT_LE(out, 1.0);
  }
}

TEST(State, IncrementalBookkeepingMatchesScratch) {
  const auto g = random_graph(40, 200, 6);
  const auto b = build_backbone(g, 0.4, default_alpha_prime(g, 0.4), 6);
  SparsifierState s(g, b, DiscrepancyMode::Absolute);
  Rng rng(1);
  for (int i = 0; i < 5000; ++i) {
    const EdgeId e = b.edges[rng.below(b.edges.size())];
    s.set_prob(e, rng.uniform());
  }
  EXPECT_LT(s.bookkeeping_error(), 1e-9);
  const auto d = disc_from_scratch(s);
  for (VertexId u = 0; u < g.vertex_count(); ++u) EXPECT_NEAR(s.vertex_disc(u), d[u], 1e-9);
}

TEST(Objective, SumOfSquaredDiscrepancies) {
  // Path 0-1-2, keep only edge (0,1) at 0.4: disc = (0.1, 0.1 + 0.2, 0.2).
  const UncertainGraph g(3, {{0, 1, 0.5}, {1, 2, 0.2}});
  SparsifierState s(g, subset_backbone(g, {0}), DiscrepancyMode::Absolute);
  s.set_prob(0, 0.4);
  EXPECT_NEAR(objective(s, Rule{}), 0.01 + 0.09 + 0.04, 1e-15);
  SparsifierState full(g, full_backbone(g), DiscrepancyMode::Absolute);
  EXPECT_LT(objective(full, Rule{}), 1e-20);
}

TEST(Objective, ExhaustiveCutObjectiveMatchesDefinition) {
  const auto g = random_graph(6, 10, 3);
  SparsifierState s(g, subset_backbone(g, {0, 2, 4, 6}), DiscrepancyMode::Absolute);
  const auto g2 = s.to_graph();
  for (std::size_t k = 1; k <= 6; ++k) {
    double direct = 0.0;
    for (std::uint32_t mask = 1; mask < 64; ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) > k) continue;
      std::vector<VertexId> members;
      for (VertexId u = 0; u < 6; ++u) {
        if (mask >> u & 1U) members.push_back(u);
      }
      const double d = discrepancy(g, g2, VertexSet(members), DiscrepancyMode::Absolute);
      direct += d * d;
    }
    EXPECT_NEAR(exact_cut_objective(s, k), direct, 1e-10);
  }
  EXPECT_NEAR(exact_cut_objective(s, 1), s.d1(), 1e-12);
}

TEST(Objective, SampledCutObjectiveNearExhaustive) {
  const auto g = random_graph(5, 8, 12);
  SparsifierState s(g, subset_backbone(g, {0, 1, 5}), DiscrepancyMode::Absolute);
  const double exact = exact_cut_objective(s, 2);
  const double sampled = objective(s, Rule{RuleKind::CutK, 2}, 40000, 3);
  EXPECT_NEAR(sampled, exact, 0.03 * exact);
  EXPECT_THROW(objective(s, Rule{RuleKind::CutK, 2}), DomainError);
}

TEST(Rules, ParseRoundTrip) {
  for (const char* text : {"degree-abs", "degree-rel", "cut-k:3", "cut-all"}) {
    EXPECT_EQ(Rule::parse(text).to_string(), text);
  }
  EXPECT_THROW(Rule::parse("cut-k:0"), DomainError);
  EXPECT_THROW(Rule::parse("bogus"), DomainError);
}

TEST(Gdb, FullBackboneIsFixedPoint) {
  const auto g = random_graph(20, 60, 2);
  const auto r = gdb_run(g, full_backbone(g), GdbOptions{});
  EXPECT_LT(r.d1_history.back(), 1e-20);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.sweeps, 1u);
  for (EdgeId e = 0; e < g.edge_count(); ++e) EXPECT_NEAR(r.graph.edge(e).p, g.edge(e).p, 1e-12);
}

TEST(Gdb, MonotoneAndStructurePreserving) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto g = random_graph(50, 300, seed);
    const auto b = build_backbone(g, 0.3, default_alpha_prime(g, 0.3), seed);
    for (double h : {0.0, 0.05, 1.0}) {
      GdbOptions opt;
      opt.h = h;
      const auto r = gdb_run(g, b, opt);
      for (std::size_t i = 1; i < r.d1_history.size(); ++i) {
        EXPECT_LE(r.d1_history[i], r.d1_history[i - 1] + 1e-9);
      }
      ASSERT_EQ(r.graph.edge_count(), b.edges.size());
      for (std::size_t i = 0; i < b.edges.size(); ++i) {
        EXPECT_EQ(r.graph.edge(i).u, g.edge(b.edges[i]).u);
        EXPECT_EQ(r.graph.edge(i).v, g.edge(b.edges[i]).v);
        EXPECT_GE(r.graph.edge(i).p, 0.0);
        EXPECT_LE(r.graph.edge(i).p, 1.0);
      }
    }
  }
}

TEST(Gdb, CutKOneMatchesDegreeRuleExactly) {
  const auto g = random_graph(40, 200, 9);
  const auto b = build_backbone(g, 0.3, default_alpha_prime(g, 0.3), 9);
  GdbOptions deg;
  GdbOptions cut;
  cut.rule = Rule{RuleKind::CutK, 1};
  const auto a = gdb_run(g, b, deg);
  const auto c = gdb_run(g, b, cut);
  ASSERT_EQ(a.graph.edge_count(), c.graph.edge_count());
  for (EdgeId e = 0; e < a.graph.edge_count(); ++e) EXPECT_EQ(a.graph.edge(e).p, c.graph.edge(e).p);
}

TEST(Gdb, CutRulesStayInRange) {
  const auto g = random_graph(30, 120, 4);
  const auto b = build_backbone(g, 0.4, default_alpha_prime(g, 0.4), 4);
  for (const char* rule : {"cut-k:2", "cut-k:5", "cut-all"}) {
    GdbOptions opt;
    opt.rule = Rule::parse(rule);
    const auto r = gdb_run(g, b, opt);
    EXPECT_EQ(r.graph.edge_count(), b.edges.size());
    for (const auto& e : r.graph.edges()) {
      EXPECT_GE(e.p, 0.0);
      EXPECT_LE(e.p, 1.0);
    }
  }
}

TEST(Gdb, RelativeModeRuns) {
  const auto g = random_graph(30, 120, 4);
  const auto b = build_backbone(g, 0.4, default_alpha_prime(g, 0.4), 4);
  GdbOptions opt;
  opt.rule = Rule::parse("degree-rel");
  const auto r = gdb_run(g, b, opt);
  EXPECT_LE(r.d1_history.back(), r.d1_history.front());
}

TEST(Gdb, RejectsBadParameters) {
  const auto g = random_graph(10, 20, 1);
  GdbOptions opt;
  opt.h = 1.5;
  EXPECT_THROW(gdb_run(g, full_backbone(g), opt), DomainError);
  opt.h = 0.5;
  opt.tau = 0.0;
  EXPECT_THROW(gdb_run(g, full_backbone(g), opt), DomainError);
  BackboneGraph bad{g.vertex_count(), {3, 2}, BackboneGraph::Source::Spanning};
  EXPECT_THROW(gdb_run(g, bad, GdbOptions{}), DomainError);
}
