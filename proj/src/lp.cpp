#include "usparse/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "usparse/error.hpp"

namespace usparse {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr std::size_t kDegenerateSwitch = 50;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BoundedSimplex::BoundedSimplex(std::size_t rows, std::size_t cols, std::vector<double> a,
                               std::vector<double> b, std::vector<double> c,
                               std::vector<double> upper)
    : rows_(rows), cols_(cols), a_(std::move(a)), b_(std::move(b)), c_(std::move(c)),
      upper_(std::move(upper)) {
  if (a_.size() != rows_ * cols_ || b_.size() != rows_ || c_.size() != cols_ ||
      upper_.size() != cols_) {
    throw DomainError("simplex dimension mismatch");
  }
  for (double bi : b_) {
    if (bi < 0.0) throw DomainError("simplex needs a non-negative right-hand side");
  }
}

BoundedSimplex::Result BoundedSimplex::solve(std::size_t max_iterations) {
  const std::size_t total = cols_ + rows_;
  // Tableau B^{-1} [A | I], reduced costs, and variable values.
  std::vector<double> t(rows_ * total, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    std::copy_n(a_.begin() + static_cast<std::ptrdiff_t>(i * cols_), cols_,
                t.begin() + static_cast<std::ptrdiff_t>(i * total));
    t[i * total + cols_ + i] = 1.0;
  }
  std::vector<double> z(total, 0.0);
  std::copy(c_.begin(), c_.end(), z.begin());
  std::vector<double> upper(total, kInf);
  std::copy(upper_.begin(), upper_.end(), upper.begin());
  std::vector<double> x(total, 0.0);
  std::vector<std::size_t> basis(rows_);
  std::vector<char> is_basic(total, 0), at_upper(total, 0);
  for (std::size_t i = 0; i < rows_; ++i) {
    basis[i] = cols_ + i;
    is_basic[cols_ + i] = 1;
    x[cols_ + i] = b_[i];
  }

  auto refresh_basic_values = [&] {
    std::vector<double> rhs = b_;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (!is_basic[j] && at_upper[j]) {
        for (std::size_t i = 0; i < rows_; ++i) rhs[i] -= a_[i * cols_ + j] * upper[j];
      }
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      double v = 0.0;
      for (std::size_t i = 0; i < rows_; ++i) v += t[r * total + cols_ + i] * rhs[i];
      x[basis[r]] = v;
    }
  };

  Result result;
  std::size_t degenerate_run = 0;
  for (;;) {
    // Entering column.
    std::size_t q = total;
    double best = 0.0;
    const bool bland = degenerate_run >= kDegenerateSwitch;
    for (std::size_t j = 0; j < total; ++j) {
      if (is_basic[j]) continue;
      const bool eligible = at_upper[j] ? z[j] < -kCostTol : z[j] > kCostTol;
      if (!eligible) continue;
      if (bland) {
        q = j;
        break;
      }
      if (std::fabs(z[j]) > best) {
        best = std::fabs(z[j]);
        q = j;
      }
    }
    if (q == total) break;
    if (result.iterations >= max_iterations) {
      throw DomainError(fmt::format("simplex iteration cap {} exceeded", max_iterations));
    }
    ++result.iterations;

    // Ratio test; the entering variable's own bound flip competes.
    const double dir = at_upper[q] ? -1.0 : 1.0;
    double step = upper[q];
    std::size_t leave = rows_;
    for (std::size_t i = 0; i < rows_; ++i) {
      const double alpha = dir * t[i * total + q];
      const std::size_t bv = basis[i];
      double limit;
      if (alpha > kPivotTol) {
        limit = std::max(0.0, x[bv]) / alpha;
      } else if (alpha < -kPivotTol && upper[bv] < kInf) {
        limit = std::max(0.0, upper[bv] - x[bv]) / -alpha;
      } else {
        continue;
      }
      const bool tie = std::fabs(limit - step) <= 1e-12 * std::max(1.0, step);
      if ((limit < step && !tie) || (tie && leave != rows_ && bv < basis[leave])) {
        step = limit;
        leave = i;
      }
    }
    if (step == kInf) throw DomainError("simplex: unbounded direction");
    degenerate_run = step <= 1e-12 ? degenerate_run + 1 : 0;

    for (std::size_t i = 0; i < rows_; ++i) x[basis[i]] -= dir * step * t[i * total + q];
    x[q] += dir * step;

    if (leave == rows_) {
      at_upper[q] = !at_upper[q];
      x[q] = at_upper[q] ? upper[q] : 0.0;
      continue;
    }

    const std::size_t out = basis[leave];
    const bool to_upper = dir * t[leave * total + q] < 0.0;
    at_upper[out] = to_upper ? 1 : 0;
    x[out] = to_upper ? upper[out] : 0.0;
    is_basic[out] = 0;

    double* pivot_row = &t[leave * total];
    const double pivot = pivot_row[q];
    for (std::size_t j = 0; j < total; ++j) pivot_row[j] /= pivot;
    for (std::size_t i = 0; i < rows_; ++i) {
      if (i == leave) continue;
      double* row = &t[i * total];
      const double factor = row[q];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < total; ++j) row[j] -= factor * pivot_row[j];
    }
    const double zq = z[q];
    for (std::size_t j = 0; j < total; ++j) z[j] -= zq * pivot_row[j];
    basis[leave] = q;
    is_basic[q] = 1;
    at_upper[q] = 0;

    if (result.iterations % 200 == 0) refresh_basic_values();
  }
  refresh_basic_values();

  result.x.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(cols_));
  for (std::size_t j = 0; j < cols_; ++j) result.x[j] = std::clamp(result.x[j], 0.0, upper_[j]);
  result.duals.resize(rows_);
  for (std::size_t i = 0; i < rows_; ++i) result.duals[i] = -z[cols_ + i];
  for (std::size_t j = 0; j < cols_; ++j) result.objective += c_[j] * result.x[j];
  return result;
}

IncidenceSystem incidence_system(const UncertainGraph& g, const BackboneGraph& backbone) {
  validate_backbone(g, backbone);
  IncidenceSystem sys;
  sys.rows = g.vertex_count();
  sys.target = expected_degrees(g);
  sys.columns.reserve(backbone.edges.size());
  for (EdgeId e : backbone.edges) sys.columns.emplace_back(g.edge(e).u, g.edge(e).v);
  return sys;
}

double lp_dual_bound(const IncidenceSystem& system, std::span<const double> duals) {
  double bound = 0.0;
  for (std::size_t i = 0; i < system.rows; ++i) bound += system.target[i] * duals[i];
  for (const auto& [u, v] : system.columns) bound += std::max(0.0, 1.0 - duals[u] - duals[v]);
  return bound;
}

LpSolution solve_optimal_assignment(const UncertainGraph& g, const BackboneGraph& backbone,
                                    const LpOptions& options) {
  const auto sys = incidence_system(g, backbone);
  const std::size_t cols = sys.columns.size();
  if (cols > options.edge_cap) {
    throw DomainError(fmt::format(
        "LP oracle refuses a backbone of {} edges (cap {}); use gdb or emd at this scale", cols,
        options.edge_cap));
  }
  // Drop vertices with no backbone edge; their rows are empty.
  std::vector<std::size_t> row_of(sys.rows, SIZE_MAX);
  std::vector<VertexId> vertex_of;
  for (const auto& [u, v] : sys.columns) {
    for (VertexId w : {u, v}) {
      if (row_of[w] == SIZE_MAX) {
        row_of[w] = vertex_of.size();
        vertex_of.push_back(w);
      }
    }
  }
  const std::size_t rows = vertex_of.size();
  std::vector<double> a(rows * cols, 0.0), b(rows), c(cols, 1.0), upper(cols, 1.0);
  for (std::size_t r = 0; r < rows; ++r) b[r] = std::max(0.0, sys.target[vertex_of[r]]);
  for (std::size_t j = 0; j < cols; ++j) {
    const std::size_t col = options.reverse_columns ? cols - 1 - j : j;
    a[row_of[sys.columns[j].first] * cols + col] = 1.0;
    a[row_of[sys.columns[j].second] * cols + col] = 1.0;
  }
  BoundedSimplex simplex(rows, cols, std::move(a), std::move(b), std::move(c), std::move(upper));
  auto solved = simplex.solve(options.max_iterations);

  LpSolution out;
  out.iterations = solved.iterations;
  out.probs.resize(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    out.probs[j] = solved.x[options.reverse_columns ? cols - 1 - j : j];
  }
  out.duals.assign(sys.rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) out.duals[vertex_of[r]] = std::max(0.0, solved.duals[r]);
  for (double p : out.probs) out.objective += p;
  out.dual_objective = lp_dual_bound(sys, out.duals);
  return out;
}

double lp_mae(const UncertainGraph& g, std::span<const double> probs,
              const BackboneGraph& backbone) {
  if (probs.size() != backbone.edges.size()) throw DomainError("assignment size mismatch");
  if (g.vertex_count() == 0) return 0.0;
  auto disc = expected_degrees(g);
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const auto& e = g.edge(backbone.edges[j]);
    disc[e.u] -= probs[j];
    disc[e.v] -= probs[j];
  }
  double total = 0.0;
  for (double d : disc) total += std::fabs(d);
  return total / static_cast<double>(disc.size());
}

UncertainGraph assignment_graph(const UncertainGraph& g, const BackboneGraph& backbone,
                                std::span<const double> probs) {
  if (probs.size() != backbone.edges.size()) throw DomainError("assignment size mismatch");
  std::vector<Edge> edges;
  edges.reserve(probs.size());
  for (std::size_t j = 0; j < probs.size(); ++j) {
    const auto& e = g.edge(backbone.edges[j]);
    edges.push_back({e.u, e.v, std::clamp(probs[j], 0.0, 1.0)});
  }
  return UncertainGraph(g.vertex_count(), std::move(edges), ProbabilityDomain::Closed);
}

}  // namespace usparse
