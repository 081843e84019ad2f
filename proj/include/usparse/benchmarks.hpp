#pragma once

#include <cstdint>
#include <vector>

#include "usparse/graph.hpp"

namespace usparse {

/// Deterministic weighted view of an uncertain graph. edges[i] corresponds to
/// EdgeId i of the source graph.
struct WeightedGraph {
  struct WeightedEdge {
    VertexId u;
    VertexId v;
    double w;
  };
  std::size_t vertex_count = 0;
  std::vector<WeightedEdge> edges;
};

// --- cut-based benchmark (NI) ---------------------------------------------

struct NiWeights {
  WeightedGraph graph;  // integer weights >= 1
  double p_min = 1.0;
};

/// w_e = max(1, round-half-up(p_e / p_min)).
NiWeights to_ni_weights(const UncertainGraph& g);

/// min(w' * p_min, 1).
double ni_inverse(double new_weight, double p_min);

struct NiForestRecord {
  std::size_t first_round;
  std::size_t last_round;  // the forest repeats unchanged over [first, last]
  std::vector<EdgeId> edges;
};

struct NiCoreResult {
  std::vector<EdgeId> kept;             // ascending
  std::vector<double> new_weight;       // per EdgeId; 0 when not kept
  std::vector<std::size_t> finish_round;  // round at which the residual weight hit 0
  std::vector<NiForestRecord> forests;
};

/// Contiguous spanning forests decrement residual weights; an edge whose
/// residual reaches 0 at round r is kept with probability
/// min(ln n / (eps^2 r), 1) and then weighs w_e / that probability.
NiCoreResult ni_core(const WeightedGraph& gw, double epsilon, std::uint64_t seed);

/// sqrt(n ln^2 n / (alpha |E|)).
double ni_initial_epsilon(std::size_t n, std::size_t m, double alpha);

struct NiReport {
  UncertainGraph graph;
  double epsilon = 0.0;
  std::size_t calibration_runs = 0;
  std::size_t core_edges = 0;
};

NiReport ni_sparsify(const UncertainGraph& g, double alpha, double theta, std::uint64_t seed);

// --- spanner benchmark (SS) --------------------------------------------------

/// w_e = -ln p_e.
WeightedGraph to_ss_weights(const UncertainGraph& g);

/// Clustering (2t-1)-spanner; returns ascending edge ids.
std::vector<EdgeId> ss_core(const WeightedGraph& gw, std::size_t t, std::uint64_t seed);

/// t * n^(1 + 1/t).
double spanner_size_bound(std::size_t n, std::size_t t);

inline constexpr std::size_t kMaxStretchParameter = 50;

/// Smallest t in [1, 50] whose size bound fits `budget`, else the minimizer.
std::size_t ss_initial_t(std::size_t n, double budget);

struct SsReport {
  UncertainGraph graph;
  std::size_t t = 1;
  std::vector<EdgeId> spanner;  // before trimming and top-up
  std::size_t calibration_runs = 0;
  bool trimmed = false;
};

SsReport ss_sparsify(const UncertainGraph& g, double alpha, std::uint64_t seed);

}  // namespace usparse
