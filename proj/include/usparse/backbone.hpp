#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "usparse/graph.hpp"
#include "usparse/rng.hpp"

namespace usparse {

/// Unweighted edge subset of an uncertain graph, chosen before probability
/// assignment.
struct BackboneGraph {
  enum class Source { Spanning, Random };

  std::size_t vertex_count = 0;
  std::vector<EdgeId> edges;  // ascending ids into the source graph
  Source source = Source::Spanning;
};

/// Kruskal on descending p, ties by canonical edge order. Returns the chosen
/// edges in the order Kruskal accepted them.
std::vector<EdgeId> max_spanning_forest(const UncertainGraph& g,
                                        std::span<const EdgeId> available);

/// Edge-disjoint maximum spanning forests, peeled one after another.
/// Stops after max_forests rounds or when no edges remain.
std::vector<std::vector<EdgeId>> iterated_spanning_forests(const UncertainGraph& g,
                                                           std::size_t max_forests);

/// min(alpha / 2, |first six forests| / |E|).
double default_alpha_prime(const UncertainGraph& g, double alpha);

/// Smallest alpha that keeps the deterministic structure's connectivity.
double connectivity_floor(const UncertainGraph& g);

/// Throws unless the backbone's edge ids are ascending, unique and in range.
void validate_backbone(const UncertainGraph& g, const BackboneGraph& backbone);

BackboneGraph build_backbone(const UncertainGraph& g, double alpha, double alpha_prime,
                             std::uint64_t seed);

BackboneGraph random_backbone(const UncertainGraph& g, double alpha, std::uint64_t seed);

/// Passes over `candidates` in shuffled order admitting each edge with its
/// probability until `chosen` holds `target` edges. After 100 fruitless passes
/// the highest-probability remaining edges are admitted deterministically.
void probability_top_up(const UncertainGraph& g, std::vector<char>& chosen,
                        std::size_t& chosen_count, std::size_t target, Rng& rng);

}  // namespace usparse
