#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "usparse/backbone.hpp"
#include "usparse/graph.hpp"

namespace usparse {

using BigInt = boost::multiprecision::cpp_int;

enum class RuleKind { DegreeAbsolute, DegreeRelative, CutK, CutAll };

/// Which coordinate update the descent applies. CutK carries k; CutK with
/// k=1 behaves exactly like DegreeAbsolute.
struct Rule {
  RuleKind kind = RuleKind::DegreeAbsolute;
  std::size_t k = 1;

  DiscrepancyMode mode() const {
    return kind == RuleKind::DegreeRelative ? DiscrepancyMode::Relative
                                            : DiscrepancyMode::Absolute;
  }
  bool is_degree_rule() const {
    return kind == RuleKind::DegreeAbsolute || kind == RuleKind::DegreeRelative;
  }

  /// "degree-abs", "degree-rel", "cut-k:<k>" or "cut-all".
  static Rule parse(const std::string& text);
  std::string to_string() const;
};

/**
 * Working probabilities of a sparsification run.
 *
 * Every original edge has a working probability; edges outside the backbone
 * sit at zero. Per-vertex absolute discrepancy d_u - sum of incident working
 * probabilities and the global mass gap sum_e (p_e - p_hat_e) are maintained
 * incrementally.
 */
class SparsifierState {
 public:
  SparsifierState(const UncertainGraph& g, const BackboneGraph& backbone, DiscrepancyMode mode);

  const UncertainGraph& graph() const { return *graph_; }
  DiscrepancyMode mode() const { return mode_; }

  double prob(EdgeId e) const { return probs_[e]; }
  bool in_backbone(EdgeId e) const { return member_[e] != 0; }
  std::size_t backbone_size() const { return backbone_size_; }
  std::vector<EdgeId> backbone_edges() const;

  double vertex_disc(VertexId u) const { return vertex_disc_[u]; }
  double pi(VertexId u) const { return pi_[u]; }
  double original_degree(VertexId u) const { return degree_[u]; }
  double mass_gap() const { return mass_gap_; }
  /// p_e - p_hat_e.
  double edge_gap(EdgeId e) const { return graph_->edge(e).p - probs_[e]; }

  /// Sets the working probability of a backbone edge.
  void set_prob(EdgeId e, double p);
  void remove(EdgeId e);
  void insert(EdgeId e, double p);

  /// D_1 = sum over vertices of (delta_A(u) / pi(u))^2, from scratch.
  double d1() const;
  /// sum over vertices of |delta_A(u)|, from scratch.
  double delta1_absolute() const;

  /// Rebuilds the incremental bookkeeping from the working probabilities.
  void recompute();
  /// Largest deviation of the incremental bookkeeping from a fresh recomputation.
  double bookkeeping_error() const;

  /// Sparsified graph: backbone edges with their working probabilities.
  UncertainGraph to_graph() const;

 private:
  void shift(EdgeId e, double delta_p);

  const UncertainGraph* graph_;
  DiscrepancyMode mode_;
  std::vector<double> probs_;
  std::vector<char> member_;
  std::size_t backbone_size_ = 0;
  std::vector<double> degree_;
  std::vector<double> pi_;
  std::vector<double> vertex_disc_;
  double mass_gap_ = 0.0;
};

/// 1 under Absolute; the original expected degree under Relative, falling
/// back to 1 for zero-degree vertices.
double pi(VertexId u, DiscrepancyMode mode, const UncertainGraph& g);

double degree_step(double p_hat, double disc_u, double disc_v, double pi_u, double pi_v);

/// 0 for k < 0, else sum_{i=0}^{min(k,n)} C(n, i).
BigInt binom_sum(long n, long k);

/// The k-cut step is stp = weight_degree * (disc_u + disc_v) + weight_far * delta_hat.
struct CutStepWeights {
  double weight_degree;
  double weight_far;
};

/// Exact rational evaluation of the two binomial ratios, rounded once.
CutStepWeights cut_step_weights(std::size_t n, std::size_t k);

/// Sum of p_e - p_hat_e over original edges sharing no endpoint with e.
double delta_hat(EdgeId e, const SparsifierState& state);

double cut_step(double p_hat, double disc_u, double disc_v, double delta_hat_e, std::size_t n,
                std::size_t k);
double cut_step(double p_hat, double disc_u, double disc_v, double delta_hat_e,
                const CutStepWeights& weights);

/// Mass gap over all original edges except e (removed edges count at zero).
double ncut_step(EdgeId e, const SparsifierState& state);

/// Full clamped step, or the h-attenuated step when the full step would
/// raise the edge's entropy.
double apply_update(double p_hat, double stp, double h);

/// Exact D_1 for degree rules. For cut rules, an estimate of
/// sum_{i<=k} sum_{|S|=i} delta_A(S)^2 from `samples_per_size` uniform
/// subsets per cardinality.
double objective(const SparsifierState& state, const Rule& rule,
                 std::size_t samples_per_size = 0, std::uint64_t seed = 0);

/// Exhaustive sum_{i<=k} sum_{|S|=i} delta_A(S)^2; small graphs only.
double exact_cut_objective(const SparsifierState& state, std::size_t k);

struct GdbOptions {
  double h = 0.05;
  Rule rule{};
  /// Default: 1e-6 times the initial D_1, plus 1e-12 so that an already exact
  /// start does not chase rounding residue.
  std::optional<double> tau;
  std::size_t max_sweeps = 100;
};

struct GdbResult {
  UncertainGraph graph;
  /// D_1 before the first sweep followed by D_1 after every sweep.
  std::vector<double> d1_history;
  std::size_t sweeps = 0;
  bool converged = false;
};

/// Runs sweeps on an existing state (warm start). Returns the D_1 history.
GdbResult gdb_sweeps(SparsifierState& state, const GdbOptions& options);

GdbResult gdb_run(const UncertainGraph& g, const BackboneGraph& backbone,
                  const GdbOptions& options);

}  // namespace usparse
