#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "usparse/gdb.hpp"
#include "usparse/graph.hpp"

namespace usparse {

using Json = nlohmann::ordered_json;

/// Everything needed to reproduce one sparsification run.
struct RunConfig {
  std::string input;
  std::string output;
  std::string method = "gdb";  // gdb | emd | lp | ni | ss
  double alpha = 0.3;
  std::optional<double> alpha_prime;
  std::string backbone = "spanning";  // spanning | random
  std::string mode = "abs";           // abs | rel
  std::string k = "1";                // integer or "all"
  double h = 0.05;
  std::optional<double> tau;
  std::optional<double> theta;  // ni only, default 1.1
  std::uint64_t seed = 1;
  std::size_t max_sweeps = 100;
  std::size_t max_iters = 20;

  /// Throws DomainError on inconsistent method-specific settings.
  void validate() const;
  Rule rule() const;

  Json to_json() const;
  static RunConfig from_json(const Json& j);
};

struct SparsifyOutcome {
  UncertainGraph graph;
  Json details;  // method-specific diagnostics
};

SparsifyOutcome run_sparsifier(const UncertainGraph& g, const RunConfig& config);

/// Sum over vertices of (d_u - d'_u)^2.
double degree_d1(const UncertainGraph& g, const UncertainGraph& g2);

/// Parses the command line and dispatches. Returns the process exit code:
/// 0 success, 1 domain or usage error, 2 I/O error.
int run_cli(int argc, char** argv);

}  // namespace usparse
