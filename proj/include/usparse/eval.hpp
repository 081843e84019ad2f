#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "usparse/graph.hpp"

namespace usparse {

enum class QueryKind { PageRank, ShortestPath, Reliability, ClusteringCoefficient };

/// "pr", "sp", "rl" or "cc".
QueryKind parse_query(const std::string& text);
std::string query_name(QueryKind kind);
/// SP and RL are evaluated on vertex pairs, PR and CC on single vertices.
bool is_pair_query(QueryKind kind);

/// A vertex (t unused) or a vertex pair.
struct QueryUnit {
  VertexId s = 0;
  VertexId t = 0;
};

/// Empirical distribution of one unit's query result across sampled worlds.
struct QueryDistribution {
  QueryKind kind = QueryKind::Reliability;
  QueryUnit unit;
  std::vector<double> values;  // ascending
  std::size_t sample_count = 0;  // worlds sampled, including ones without a value

  bool empty() const { return values.empty(); }
  /// Fraction of values <= x.
  double cdf(double x) const;
  double mean() const;
};

/// Worker count from USPARSE_THREADS, else the hardware concurrency.
std::size_t worker_count();

/// Every vertex for PR/CC; `n_pairs` random pairs with distinct endpoints for SP/RL.
std::vector<QueryUnit> default_units(const UncertainGraph& g, QueryKind kind,
                                     std::size_t n_pairs, std::uint64_t seed);

/// Power iteration with damping 0.85 on the world's undirected edges; the
/// mass of vertices without edges is spread uniformly.
std::vector<double> pagerank_world(const UncertainGraph& g, const DeterministicWorld& world);

/// 0 for degree < 2.
double clustering_coefficient_world(const WorldAdjacency& adjacency, VertexId u);

/// Hop distances from s; -1 for unreachable vertices.
std::vector<int> hop_distances(const WorldAdjacency& adjacency, VertexId s);

/// Sample i uses the world drawn from derive_seed(seed, i), so the result is
/// the same for any worker count. SP records a value only when the pair is
/// connected.
std::vector<QueryDistribution> mc_distributions(const UncertainGraph& g, QueryKind kind,
                                                std::span<const QueryUnit> units,
                                                std::size_t n_samples, std::uint64_t seed);

/// sum_i |F1(x_{i-1}) - F2(x_{i-1})| (x_i - x_{i-1}) over the merged ascending
/// grid of observed values.
double earth_movers_distance(const QueryDistribution& f1, const QueryDistribution& f2);

/// Sample variance with divisor size - 1.
double unbiased_variance(std::span<const double> values);

/// Per unit: variance across n_runs independent estimates of the mean query
/// value. NaN for units with fewer than two runs producing a value.
std::vector<double> variance_protocol(const UncertainGraph& g, QueryKind kind,
                                      std::span<const QueryUnit> units, std::size_t n_samples,
                                      std::size_t n_runs, std::uint64_t seed);

/// H(g2) / H(g).
double relative_entropy(const UncertainGraph& g, const UncertainGraph& g2);

struct EmdUnitRow {
  QueryUnit unit;
  double mean_original = 0.0;  // NaN when empty
  double mean_sparsified = 0.0;
  double distance = 0.0;  // NaN when excluded
  bool excluded = false;
};

struct EmdSummary {
  std::vector<EmdUnitRow> rows;
  double mean = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t excluded = 0;
};

/// Per-unit distance between the distributions of g and g2. Both are sampled
/// with `seed` unless `seed2` gives g2 its own stream. Units empty in either
/// graph are excluded from the summary.
EmdSummary emd_report(const UncertainGraph& g, const UncertainGraph& g2, QueryKind kind,
                      std::span<const QueryUnit> units, std::size_t n_samples,
                      std::uint64_t seed, std::optional<std::uint64_t> seed2 = std::nullopt);

}  // namespace usparse
