#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "usparse/backbone.hpp"
#include "usparse/graph.hpp"

namespace usparse {

/**
 * Dense bounded-variable primal simplex for
 *
 *     max c^T x  s.t.  A x <= b,  0 <= x <= upper,  with b >= 0,
 *
 * started from the all-slack basis. Entering columns follow Dantzig's rule
 * and switch to Bland's rule after a run of degenerate pivots.
 */
class BoundedSimplex {
 public:
  struct Result {
    std::vector<double> x;
    std::vector<double> duals;  // one per row, y >= 0 at optimality
    double objective = 0.0;
    std::size_t iterations = 0;
  };

  /// `a` is row-major rows x cols.
  BoundedSimplex(std::size_t rows, std::size_t cols, std::vector<double> a, std::vector<double> b,
                 std::vector<double> c, std::vector<double> upper);

  Result solve(std::size_t max_iterations);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> a_;
  std::vector<double> b_;
  std::vector<double> c_;
  std::vector<double> upper_;
};

/// Incidence system of a backbone: rows are vertices, columns backbone edges,
/// target the original expected degrees.
struct IncidenceSystem {
  std::size_t rows = 0;
  std::vector<std::pair<VertexId, VertexId>> columns;  // endpoints per backbone edge
  std::vector<double> target;
};

IncidenceSystem incidence_system(const UncertainGraph& g, const BackboneGraph& backbone);

struct LpOptions {
  std::size_t edge_cap = 2000;
  std::size_t max_iterations = 500000;
  /// Solve with the columns in reverse order (a different pivoting path).
  bool reverse_columns = false;
};

struct LpSolution {
  std::vector<double> probs;  // aligned with backbone.edges
  std::vector<double> duals;  // per vertex
  double objective = 0.0;     // sum of probs
  double dual_objective = 0.0;
  std::size_t iterations = 0;
};

/// Maximizes the retained probability mass subject to no vertex exceeding its
/// original expected degree; the optimum minimizes the summed absolute degree
/// discrepancy over the backbone.
LpSolution solve_optimal_assignment(const UncertainGraph& g, const BackboneGraph& backbone,
                                    const LpOptions& options = {});

/// Dual objective b^T y + sum_j max(0, 1 - (A^T y)_j) for a dual vector y.
double lp_dual_bound(const IncidenceSystem& system, std::span<const double> duals);

/// Mean |delta_A(u)| over all vertices under the assignment.
double lp_mae(const UncertainGraph& g, std::span<const double> probs,
              const BackboneGraph& backbone);

UncertainGraph assignment_graph(const UncertainGraph& g, const BackboneGraph& backbone,
                                std::span<const double> probs);

}  // namespace usparse
