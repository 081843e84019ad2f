#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <vector>

#include "usparse/gdb.hpp"

namespace usparse {

/// Max-heap of vertices keyed by |delta_A(u)|. Updates push a fresh entry and
/// bump the vertex's version; stale entries are dropped lazily at top().
class VertexHeap {
 public:
  explicit VertexHeap(const SparsifierState& state);

  void update(VertexId u);
  VertexId top();
  std::size_t stale_entries() const { return heap_.size() - versions_.size(); }

 private:
  struct Entry {
    double key;
    VertexId vertex;
    std::uint32_t version;
    bool operator<(const Entry& other) const {
      // Larger key first; among equal keys the smaller vertex id.
      return key != other.key ? key < other.key : vertex > other.vertex;
    }
  };

  const SparsifierState* state_;
  std::vector<std::uint32_t> versions_;
  std::priority_queue<Entry> heap_;
};

/// D_1 improvement of inserting the currently excluded edge e at
/// `candidate_p`, measured in the state's discrepancy mode.
double gain(EdgeId e, double candidate_p, const SparsifierState& state);

/// Probability the clamped, entropy-gated degree rule assigns to an excluded
/// edge.
double candidate_probability(EdgeId e, const SparsifierState& state, double h);

struct EPhaseStats {
  std::size_t examined = 0;
  std::size_t swaps = 0;
};

/// One pass of edge swaps over the backbone, keeping its cardinality.
EPhaseStats e_phase(SparsifierState& state, double h);

struct EmdOptions {
  double h = 0.05;
  DiscrepancyMode mode = DiscrepancyMode::Absolute;
  /// Default: 1e-6 times the initial D_1.
  std::optional<double> tau;
  std::size_t max_iters = 20;
  std::size_t max_sweeps = 100;
};

struct EmdResult {
  UncertainGraph graph;
  BackboneGraph backbone;
  /// D_1 before the first iteration followed by D_1 after every iteration.
  std::vector<double> d1_history;
  std::size_t iterations = 0;
  std::size_t total_swaps = 0;
  bool converged = false;
};

EmdResult emd_run(const UncertainGraph& g, const BackboneGraph& backbone,
                  const EmdOptions& options);

}  // namespace usparse
