#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "usparse/rng.hpp"

namespace usparse {

using VertexId = std::uint32_t;
using EdgeId = std::uint32_t;

struct Edge {
  VertexId u;
  VertexId v;
  double p;
};

/// Original graphs carry probabilities in (0,1]; sparsified outputs may
/// contain edges driven to zero, so they are validated against [0,1].
enum class ProbabilityDomain { Open, Closed };

/**
 * Undirected simple graph with an existence probability per edge.
 *
 * Edges are stored in canonical (min, max) orientation and sorted
 * lexicographically; an EdgeId is the position in that order. Immutable after
 * construction.
 */
class UncertainGraph {
 public:
  UncertainGraph() = default;
  UncertainGraph(std::size_t vertex_count, std::vector<Edge> edges,
                 ProbabilityDomain domain = ProbabilityDomain::Open);

  std::size_t vertex_count() const { return vertex_count_; }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }

  /// Edge ids incident to u, in ascending order.
  std::span<const EdgeId> incident(VertexId u) const {
    return {incidence_.data() + offsets_[u], incidence_.data() + offsets_[u + 1]};
  }
  std::size_t degree(VertexId u) const { return offsets_[u + 1] - offsets_[u]; }

  std::optional<EdgeId> find_edge(VertexId u, VertexId v) const;

  /// Number of connected components of the deterministic structure.
  std::size_t component_count() const;

 private:
  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> incidence_;
};

class VertexSet {
 public:
  VertexSet() = default;
  VertexSet(std::vector<VertexId> members);

  std::span<const VertexId> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool contains(VertexId u) const;

 private:
  std::vector<VertexId> members_;  // sorted, unique
};

enum class DiscrepancyMode { Absolute, Relative };

/// One sampled possible world: the edges of the source graph that materialized.
struct DeterministicWorld {
  std::size_t vertex_count = 0;
  std::vector<EdgeId> present;  // ascending edge ids of the source graph
};

/// CSR adjacency of a deterministic world.
class WorldAdjacency {
 public:
  WorldAdjacency(const UncertainGraph& g, const DeterministicWorld& world);

  std::size_t vertex_count() const { return offsets_.size() - 1; }
  std::span<const VertexId> neighbors(VertexId u) const {
    return {targets_.data() + offsets_[u], targets_.data() + offsets_[u + 1]};
  }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<VertexId> targets_;  // sorted per vertex
};

// --- entropy / degree / cut accounting ---------------------------------

/// Bernoulli entropy in bits, with 0 log 0 = 0.
double edge_entropy(double p);
double graph_entropy(const UncertainGraph& g);

double expected_degree(const UncertainGraph& g, VertexId u);
std::vector<double> expected_degrees(const UncertainGraph& g);

double expected_cut_size(const UncertainGraph& g, const VertexSet& s);

/// delta_A(S) or delta_R(S) of g2 against the original g.
double discrepancy(const UncertainGraph& g, const UncertainGraph& g2, const VertexSet& s,
                   DiscrepancyMode mode);

/// Uniform k-subset of [0, n) (Floyd's algorithm), returned sorted.
std::vector<VertexId> sample_k_subset(std::size_t n, std::size_t k, Rng& rng);

/// Mean |delta_A(S)| over n_cuts independently drawn uniform k-subsets.
double sampled_k_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2,
                                 std::size_t k, std::size_t n_cuts, std::uint64_t seed);

/// Mean |delta_A(S)| over n_cuts draws, each choosing k uniformly in [1, n]
/// and then a uniform k-subset.
double sampled_cut_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2,
                                   std::size_t n_cuts, std::uint64_t seed);

/// Mean |delta_A(u)| over all vertices.
double degree_discrepancy_mae(const UncertainGraph& g, const UncertainGraph& g2);

// --- possible worlds --------------------------------------------------------

DeterministicWorld sample_world(const UncertainGraph& g, Rng& rng);

using WorldPredicate = std::function<bool(const UncertainGraph&, const DeterministicWorld&)>;

inline constexpr std::size_t kExactOracleEdgeCap = 25;

/// Sum of Pr(G) over all 2^|E| worlds satisfying the predicate.
double exact_query_probability(const UncertainGraph& g, const WorldPredicate& predicate);

bool world_reachable(const UncertainGraph& g, const DeterministicWorld& world, VertexId s,
                     VertexId t);
bool world_connected(const UncertainGraph& g, const DeterministicWorld& world);

// --- synthetic graphs --------------------------------------------------------

struct ProbabilitySampler {
  enum class Kind { Constant, Uniform, TruncatedExponential };
  Kind kind = Kind::Uniform;
  double a = 0.05;  // constant value | lower bound | mean
  double b = 1.0;   // upper bound (uniform only)

  double operator()(Rng& rng) const;

  /// "const:<p>", "uniform:<lo>:<hi>" or "exp:<mean>".
  static ProbabilitySampler parse(const std::string& text);
  std::string to_string() const;
};

std::size_t synthetic_edge_target(std::size_t n, double target_density);

/// Random spanning tree plus uniformly random extra pairs, up to
/// ceil(target_density * n(n-1)/2) edges.
UncertainGraph generate_synthetic(std::size_t n, double target_density,
                                  const ProbabilitySampler& sampler, std::uint64_t seed);

// --- edge-list I/O -----------------------------------------------------------

UncertainGraph parse_graph(std::istream& in, ProbabilityDomain domain = ProbabilityDomain::Open);
UncertainGraph load_graph(const std::string& path,
                          ProbabilityDomain domain = ProbabilityDomain::Open);
void write_graph(std::ostream& out, const UncertainGraph& g);
void save_graph(const std::string& path, const UncertainGraph& g);

/// Round-half-to-even of alpha * edge_count.
std::size_t target_edge_count(double alpha, std::size_t edge_count);

}  // namespace usparse
