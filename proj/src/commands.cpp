#include "usparse/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "usparse/backbone.hpp"
#include "usparse/benchmarks.hpp"
#include "usparse/emd.hpp"
#include "usparse/error.hpp"
#include "usparse/eval.hpp"
#include "usparse/lp.hpp"

namespace usparse {

namespace {

bool is_method(const std::string& m) {
  return m == "gdb" || m == "emd" || m == "lp" || m == "ni" || m == "ss";
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path));
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw DomainError(fmt::format("{}: {}", path, e.what()));
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw IoError(fmt::format("write to {} failed", path));
}

std::string csv_number(double v) { return std::isnan(v) ? "nan" : fmt::format("{}", v); }

Json number_or_null(double v) { return std::isnan(v) ? Json() : Json(v); }

BackboneGraph make_backbone(const UncertainGraph& g, const RunConfig& c) {
  if (c.backbone == "random") return random_backbone(g, c.alpha, c.seed);
  const double ap = c.alpha_prime.value_or(default_alpha_prime(g, c.alpha));
  return build_backbone(g, c.alpha, ap, c.seed);
}

double mean_ignoring_nan(const std::vector<double>& v) {
  double total = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    total += x;
    ++count;
  }
  return count ? total / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void RunConfig::validate() const {
  if (!is_method(method)) {
    throw DomainError(fmt::format("unknown method '{}' (expected gdb, emd, lp, ni or ss)", method));
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must be in (0,1]");
  if (backbone != "spanning" && backbone != "random") {
    throw DomainError(fmt::format("unknown backbone '{}' (expected spanning or random)", backbone));
  }
  if (mode != "abs" && mode != "rel") {
    throw DomainError(fmt::format("unknown mode '{}' (expected abs or rel)", mode));
  }
  const Rule r = rule();
  if (method == "emd" && !r.is_degree_rule()) {
    throw DomainError("emd supports only the degree rule (k=1)");
  }
  if (method == "lp" && mode != "abs") throw DomainError("lp minimizes absolute discrepancy only");
  if (theta && method != "ni") throw DomainError("theta applies only to method ni");
  if (theta && !(*theta > 1.0)) throw DomainError("theta must exceed 1");
  if (!(h >= 0.0 && h <= 1.0)) throw DomainError("h must be in [0,1]");
  if (tau && !(*tau > 0.0)) throw DomainError("tau must be positive");
  if (alpha_prime && !(*alpha_prime > 0.0 && *alpha_prime <= alpha)) {
    throw DomainError("alpha_prime must be in (0, alpha]");
  }
}

Rule RunConfig::rule() const {
  if (k == "all") {
    if (mode == "rel") throw DomainError("cut rules use absolute discrepancy; drop --mode rel");
    return Rule{RuleKind::CutAll, 0};
  }
  std::size_t kk = 0;
  try {
    std::size_t pos = 0;
    const long parsed = std::stol(k, &pos);
    if (pos != k.size() || parsed < 1) throw std::invalid_argument(k);
    kk = static_cast<std::size_t>(parsed);
  } catch (const std::exception&) {
    throw DomainError(fmt::format("k must be a positive integer or 'all', got '{}'", k));
  }
  if (kk == 1) return Rule{mode == "rel" ? RuleKind::DegreeRelative : RuleKind::DegreeAbsolute, 1};
  if (mode == "rel") throw DomainError("cut rules use absolute discrepancy; drop --mode rel");
  return Rule{RuleKind::CutK, kk};
}

Json RunConfig::to_json() const {
  Json j;
  j["input"] = input;
  j["output"] = output;
  j["method"] = method;
  j["alpha"] = alpha;
  j["alpha_prime"] = alpha_prime ? Json(*alpha_prime) : Json();
  j["backbone"] = backbone;
  j["mode"] = mode;
  j["k"] = k;
  j["h"] = h;
  j["tau"] = tau ? Json(*tau) : Json();
  j["theta"] = theta ? Json(*theta) : Json();
  j["seed"] = seed;
  j["max_sweeps"] = max_sweeps;
  j["max_iters"] = max_iters;
  return j;
}

RunConfig RunConfig::from_json(const Json& j) {
  RunConfig c;
  try {
    c.input = j.at("input").get<std::string>();
    c.output = j.value("output", std::string());
    c.method = j.value("method", c.method);
    c.alpha = j.value("alpha", c.alpha);
    if (j.contains("alpha_prime") && !j["alpha_prime"].is_null()) {
      c.alpha_prime = j["alpha_prime"].get<double>();
    }
    c.backbone = j.value("backbone", c.backbone);
    c.mode = j.value("mode", c.mode);
    c.k = j.value("k", c.k);
    c.h = j.value("h", c.h);
    if (j.contains("tau") && !j["tau"].is_null()) c.tau = j["tau"].get<double>();
    if (j.contains("theta") && !j["theta"].is_null()) c.theta = j["theta"].get<double>();
    c.seed = j.value("seed", c.seed);
    c.max_sweeps = j.value("max_sweeps", c.max_sweeps);
    c.max_iters = j.value("max_iters", c.max_iters);
  } catch (const Json::exception& e) {
    throw DomainError(fmt::format("invalid run config: {}", e.what()));
  }
  return c;
}

double degree_d1(const UncertainGraph& g, const UncertainGraph& g2) {
  if (g.vertex_count() != g2.vertex_count()) throw DomainError("graphs differ in vertex count");
  const auto d = expected_degrees(g);
  const auto d2 = expected_degrees(g2);
  double total = 0.0;
  for (std::size_t u = 0; u < d.size(); ++u) total += (d[u] - d2[u]) * (d[u] - d2[u]);
  return total;
}

SparsifyOutcome run_sparsifier(const UncertainGraph& g, const RunConfig& c) {
  c.validate();
  SparsifyOutcome out;
  Json& d = out.details;
  if (c.method == "gdb") {
    GdbOptions opt;
    opt.h = c.h;
    opt.rule = c.rule();
    opt.tau = c.tau;
    opt.max_sweeps = c.max_sweeps;
    auto res = gdb_run(g, make_backbone(g, c), opt);
    d["rule"] = opt.rule.to_string();
    d["sweeps"] = res.sweeps;
    d["converged"] = res.converged;
    d["objective_initial"] = res.d1_history.front();
    d["objective_final"] = res.d1_history.back();
    out.graph = std::move(res.graph);
  } else if (c.method == "emd") {
    EmdOptions opt;
    opt.h = c.h;
    opt.mode = c.rule().mode();
    opt.tau = c.tau;
    opt.max_iters = c.max_iters;
    opt.max_sweeps = c.max_sweeps;
    auto res = emd_run(g, make_backbone(g, c), opt);
    d["iterations"] = res.iterations;
    d["swaps"] = res.total_swaps;
    d["converged"] = res.converged;
    d["objective_initial"] = res.d1_history.front();
    d["objective_final"] = res.d1_history.back();
    out.graph = std::move(res.graph);
  } else if (c.method == "lp") {
    const auto backbone = make_backbone(g, c);
    const auto sol = solve_optimal_assignment(g, backbone);
    d["primal_objective"] = sol.objective;
    d["dual_objective"] = sol.dual_objective;
    d["pivots"] = sol.iterations;
    out.graph = assignment_graph(g, backbone, sol.probs);
  } else if (c.method == "ni") {
    auto rep = ni_sparsify(g, c.alpha, c.theta.value_or(1.1), c.seed);
    d["epsilon"] = rep.epsilon;
    d["calibration_runs"] = rep.calibration_runs;
    d["core_edges"] = rep.core_edges;
    out.graph = std::move(rep.graph);
  } else {
    auto rep = ss_sparsify(g, c.alpha, c.seed);
    d["t"] = rep.t;
    d["spanner_edges"] = rep.spanner.size();
    d["calibration_runs"] = rep.calibration_runs;
    d["trimmed"] = rep.trimmed;
    out.graph = std::move(rep.graph);
  }
  return out;
}

namespace {

// --- subcommands -------------------------------------------------------------

struct GenerateArgs {
  std::size_t n = 100;
  double density = 0.2;
  std::string probs = "uniform:0.05:1";
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_generate(const GenerateArgs& a) {
  const auto g = generate_synthetic(a.n, a.density, ProbabilitySampler::parse(a.probs), a.seed);
  save_graph(a.output, g);
  return 0;
}

struct SparsifyArgs {
  RunConfig config;
  std::string config_path;
  std::string manifest;
};

int cmd_sparsify(SparsifyArgs a) {
  RunConfig c = a.config;
  if (!a.config_path.empty()) {
    const Json j = read_json(a.config_path);
    c = RunConfig::from_json(j.contains("config") ? j["config"] : j);
    if (!a.config.output.empty()) c.output = a.config.output;
  }
  if (c.input.empty()) throw DomainError("no input graph given (-i or --config)");
  if (c.output.empty()) throw DomainError("no output path given (-o)");
  c.validate();
  const auto g = load_graph(c.input);
  const auto start = std::chrono::steady_clock::now();
  auto outcome = run_sparsifier(g, c);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  save_graph(c.output, outcome.graph);

  Json m;
  m["config"] = c.to_json();
  Json r;
  r["vertices"] = g.vertex_count();
  r["input_edges"] = g.edge_count();
  r["output_edges"] = outcome.graph.edge_count();
  r["d1"] = degree_d1(g, outcome.graph);
  r["entropy_before"] = graph_entropy(g);
  r["entropy_after"] = graph_entropy(outcome.graph);
  r["details"] = outcome.details;
  m["result"] = r;
  m["wall_time_s"] = elapsed.count();
  write_text(a.manifest.empty() ? c.output + ".json" : a.manifest, m.dump(2) + "\n");
  return 0;
}

struct EvalArgs {
  std::string original;
  std::string sparsified;
  std::string query = "rl";
  std::size_t samples = 500;
  std::size_t pairs = 1000;
  std::size_t runs = 0;
  std::uint64_t seed = 1;
  std::string output;
  std::string summary;
};

int cmd_eval(const EvalArgs& a) {
  const QueryKind kind = parse_query(a.query);
  const auto g = load_graph(a.original);
  const auto g2 = load_graph(a.sparsified, ProbabilityDomain::Closed);
  if (g.vertex_count() != g2.vertex_count()) {
    throw DomainError(fmt::format("vertex counts differ: {} vs {}", g.vertex_count(),
                                  g2.vertex_count()));
  }
  if (a.samples < 10) {
    std::cerr << fmt::format("warning: {} sample(s) per estimate; expect high variance\n",
                             a.samples);
  }
  const auto units = default_units(g, kind, a.pairs, derive_seed(a.seed, 1));
  const auto report = emd_report(g, g2, kind, units, a.samples, derive_seed(a.seed, 2));
  // Same graph, independent worlds: the Monte-Carlo noise floor.
  const auto floor = emd_report(g, g, kind, units, a.samples, derive_seed(a.seed, 2), derive_seed(a.seed, 3));

  std::string csv = "unit_s,unit_t,mean_original,mean_sparsified,dem\n";
  for (const auto& row : report.rows) {
    csv += fmt::format("{},{},{},{},{}\n", row.unit.s, row.unit.t, csv_number(row.mean_original),
                       csv_number(row.mean_sparsified), csv_number(row.distance));
  }
  write_text(a.output, csv);

  Json s;
  s["config"] = {{"original", a.original}, {"sparsified", a.sparsified}, {"query", a.query},
                 {"samples", a.samples},   {"pairs", a.pairs},           {"runs", a.runs},
                 {"seed", a.seed}};
  s["units"] = units.size();
  s["dem_mean"] = number_or_null(report.mean);
  s["dem_median"] = number_or_null(report.median);
  s["dem_max"] = number_or_null(report.max);
  s["excluded_units"] = report.excluded;
  s["noise_floor_mean"] = number_or_null(floor.mean);
  s["relative_entropy"] = relative_entropy(g, g2);
  if (a.runs >= 2) {
    const double v1 = mean_ignoring_nan(
        variance_protocol(g, kind, units, a.samples, a.runs, derive_seed(a.seed, 4)));
    const double v2 = mean_ignoring_nan(
        variance_protocol(g2, kind, units, a.samples, a.runs, derive_seed(a.seed, 4)));
    s["variance_original"] = number_or_null(v1);
    s["variance_sparsified"] = number_or_null(v2);
    s["relative_variance"] = number_or_null(v1 > 0.0 ? v2 / v1 : std::nan(""));
  }
  write_text(a.summary.empty() ? a.output + ".json" : a.summary, s.dump(2) + "\n");
  return 0;
}

struct CompareArgs {
  std::string input;
  std::vector<double> alphas{0.3};
  std::vector<std::string> methods{"gdb"};
  std::vector<std::string> queries{"rl"};
  std::size_t samples = 500;
  std::size_t runs = 100;
  std::size_t pairs = 1000;
  std::size_t cuts = 1000;
  double h = 0.05;
  std::string backbone = "spanning";
  std::uint64_t seed = 1;
  std::string output;
};

int cmd_compare(const CompareArgs& a) {
  const auto g = load_graph(a.input);
  std::vector<QueryKind> kinds;
  for (const auto& q : a.queries) kinds.push_back(parse_query(q));
  for (const auto& m : a.methods) {
    if (!is_method(m)) throw DomainError(fmt::format("unknown method '{}'", m));
  }

  // Original-graph variance per query, shared by every cell.
  std::map<QueryKind, double> base_variance;
  std::map<QueryKind, std::vector<QueryUnit>> units;
  for (QueryKind kind : kinds) {
    units[kind] = default_units(g, kind, a.pairs, derive_seed(a.seed, 1));
    if (a.runs >= 2) {
      base_variance[kind] = mean_ignoring_nan(
          variance_protocol(g, kind, units[kind], a.samples, a.runs, derive_seed(a.seed, 4)));
    }
  }

  std::string csv =
      "method,alpha,query,status,edges,mae_degree,mae_cut,relative_entropy,dem_mean,"
      "relative_variance,error\n";
  for (const auto& method : a.methods) {
    for (double alpha : a.alphas) {
      RunConfig c;
      c.input = a.input;
      c.method = method;
      c.alpha = alpha;
      c.h = a.h;
      c.backbone = a.backbone;
      c.seed = a.seed;
      std::optional<UncertainGraph> out;
      std::string error;
      try {
        out = run_sparsifier(g, c).graph;
      } catch (const std::exception& e) {
        error = e.what();
      }
      for (std::size_t qi = 0; qi < kinds.size(); ++qi) {
        const QueryKind kind = kinds[qi];
        if (!out) {
          std::string quoted = error;
          for (auto& ch : quoted) {
            if (ch == '"' || ch == '\n') ch = '\'';
          }
          csv += fmt::format("{},{},{},failed,,,,,,,\"{}\"\n", method, alpha, a.queries[qi],
                             quoted);
          continue;
        }
        const auto rep = emd_report(g, *out, kind, units[kind], a.samples, derive_seed(a.seed, 2));
        double rel_var = std::nan("");
        if (a.runs >= 2) {
          const double v2 = mean_ignoring_nan(variance_protocol(
              *out, kind, units[kind], a.samples, a.runs, derive_seed(a.seed, 4)));
          if (base_variance[kind] > 0.0) rel_var = v2 / base_variance[kind];
        }
        csv += fmt::format("{},{},{},ok,{},{},{},{},{},{},\n", method, alpha, a.queries[qi],
                           out->edge_count(), csv_number(degree_discrepancy_mae(g, *out)),
                           csv_number(sampled_cut_discrepancy_mae(g, *out, a.cuts,
                                                                  derive_seed(a.seed, 5))),
                           csv_number(relative_entropy(g, *out)), csv_number(rep.mean),
                           csv_number(rel_var));
      }
    }
  }
  write_text(a.output, csv);
  return 0;
}

struct OracleArgs {
  std::string input;
  std::string query = "rl";
  VertexId s = 0;
  VertexId t = 1;
  std::size_t mc = 0;
  std::uint64_t seed = 1;
};

int cmd_oracle(const OracleArgs& a) {
  const auto g = load_graph(a.input);
  WorldPredicate predicate;
  if (a.query == "rl") {
    if (a.s >= g.vertex_count() || a.t >= g.vertex_count()) {
      throw DomainError(fmt::format("pair ({}, {}) out of range [0, {})", a.s, a.t,
                                    g.vertex_count()));
    }
    predicate = [s = a.s, t = a.t](const UncertainGraph& gg, const DeterministicWorld& w) {
      return world_reachable(gg, w, s, t);
    };
  } else if (a.query == "conn") {
    predicate = world_connected;
  } else {
    throw DomainError(fmt::format("unknown oracle query '{}' (expected rl or conn)", a.query));
  }
  Json j;
  j["query"] = a.query;
  j["exact"] = exact_query_probability(g, predicate);
  if (a.mc > 0) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < a.mc; ++i) {
      Rng rng(derive_seed(a.seed, i));
      if (predicate(g, sample_world(g, rng))) ++hits;
    }
    j["monte_carlo"] = static_cast<double>(hits) / static_cast<double>(a.mc);
    j["samples"] = a.mc;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Sparsify and evaluate uncertain graphs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a random connected uncertain graph");
  generate->add_option("-n,--vertices", gen.n, "Vertex count");
  generate->add_option("-d,--density", gen.density, "Target edge density in (0,1]");
  generate->add_option("-p,--probs", gen.probs, "const:<p>, uniform:<lo>:<hi> or exp:<mean>");
  generate->add_option("--seed", gen.seed);
  generate->add_option("-o,--output", gen.output)->required();

  SparsifyArgs sp;
  std::optional<double> alpha_prime, tau, theta;
  auto* sparsify = app.add_subcommand("sparsify", "Sparsify a graph");
  sparsify->add_option("-i,--input", sp.config.input);
  sparsify->add_option("-o,--output", sp.config.output);
  sparsify->add_option("-m,--method", sp.config.method, "gdb, emd, lp, ni or ss");
  sparsify->add_option("-a,--alpha", sp.config.alpha, "Fraction of edges to keep");
  sparsify->add_option("--alpha-prime", alpha_prime, "Spanning-forest share of the backbone");
  sparsify->add_option("--backbone", sp.config.backbone, "spanning or random");
  sparsify->add_option("--mode", sp.config.mode, "abs or rel");
  sparsify->add_option("-k,--k", sp.config.k, "Cut size of the update rule, or 'all'");
  sparsify->add_option("--entropy-h", sp.config.h, "Entropy parameter in [0,1]");
  sparsify->add_option("--tau", tau, "Convergence threshold");
  sparsify->add_option("--theta", theta, "NI calibration factor (> 1)");
  sparsify->add_option("--seed", sp.config.seed);
  sparsify->add_option("--max-sweeps", sp.config.max_sweeps);
  sparsify->add_option("--max-iters", sp.config.max_iters);
  sparsify->add_option("--config", sp.config_path, "Re-run the configuration of a manifest");
  sparsify->add_option("--manifest", sp.manifest, "Manifest path (default <output>.json)");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Compare query distributions of two graphs");
  eval->add_option("-i,--input", ev.original, "Original graph")->required();
  eval->add_option("-s,--sparsified", ev.sparsified, "Sparsified graph")->required();
  eval->add_option("-q,--query", ev.query, "pr, sp, rl or cc");
  eval->add_option("--samples", ev.samples, "Worlds per estimate");
  eval->add_option("--pairs", ev.pairs, "Random vertex pairs for sp and rl");
  eval->add_option("--runs", ev.runs, "Repetitions for the variance protocol (0 skips it)");
  eval->add_option("--seed", ev.seed);
  eval->add_option("-o,--output", ev.output, "Per-unit CSV")->required();
  eval->add_option("--summary", ev.summary, "JSON summary (default <output>.json)");

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Sweep methods, ratios and queries");
  compare->add_option("-i,--input", cmp.input)->required();
  compare->add_option("--alphas", cmp.alphas)->delimiter(',');
  compare->add_option("--methods", cmp.methods)->delimiter(',');
  compare->add_option("--queries", cmp.queries)->delimiter(',');
  compare->add_option("--samples", cmp.samples);
  compare->add_option("--runs", cmp.runs);
  compare->add_option("--pairs", cmp.pairs);
  compare->add_option("--cuts", cmp.cuts, "Random cuts for the cut discrepancy");
  compare->add_option("--entropy-h", cmp.h);
  compare->add_option("--backbone", cmp.backbone);
  compare->add_option("--seed", cmp.seed);
  compare->add_option("-o,--output", cmp.output)->required();

  OracleArgs orc;
  auto* oracle = app.add_subcommand("oracle", "Exact query probability by world enumeration");
  oracle->add_option("-i,--input", orc.input)->required();
  oracle->add_option("-q,--query", orc.query, "rl (s-t reachability) or conn (connectivity)");
  oracle->add_option("--s", orc.s);
  oracle->add_option("--t", orc.t);
  oracle->add_option("--mc", orc.mc, "Also estimate with this many sampled worlds");
  oracle->add_option("--seed", orc.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*sparsify) {
      sp.config.alpha_prime = alpha_prime;
      sp.config.tau = tau;
      sp.config.theta = theta;
      return cmd_sparsify(sp);
    }
    if (*eval) return cmd_eval(ev);
    if (*compare) return cmd_compare(cmp);
    if (*oracle) return cmd_oracle(orc);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace usparse
