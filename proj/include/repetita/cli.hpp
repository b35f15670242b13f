#pragma once

// Command-line front end:
//
//   repetita -graph Abilene.graph -demands Abilene.demands -solver defoCP
//            -t 1 -scenario SingleSolverRun
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "repetita/bridge.hpp"
#include "repetita/core.hpp"
#include "repetita/io.hpp"
#include "repetita/mcf.hpp"
#include "repetita/scenarios.hpp"
#include "repetita/solvers/milp_export.hpp"
#include "repetita/solvers/registry.hpp"
#include "repetita/weights.hpp"

namespace repetita {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRuntimeError = 2;

inline constexpr const char* kDefaultSolverSpecsPath =
    "external_solvers/solvers-specs.txt";
inline constexpr const char* kSolverSpecsEnv = "REPETITA_SOLVERS_SPECS";

// Solvers handled by the front end instead of a scenario.
inline constexpr const char* kMilpExportSolver = "milp-export";
inline constexpr const char* kLpBoundSolver = "lpbound";

class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct CliInvocation {
  std::string graph_path;
  std::string demands_path;
  std::string solver_name;
  double time_limit_seconds = 30;
  std::string scenario_name;
  std::optional<std::string> out_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> weight_heuristic;
  std::optional<double> epsilon;
  std::optional<std::int64_t> iterations;
  int jobs = 1;
  bool help = false;
};

inline std::string usage() {
  return "usage: repetita -graph <file> -demands <file|dir> -solver <name>\n"
         "                -scenario <name> [-t <seconds>] [-out <file>]\n"
         "                [-seed <n>] [-weights unit|invcap|optimized]\n"
         "                [-epsilon <e>] [-iterations <n>] [-jobs <n>]\n"
         "\n"
         "mandatory: -graph -demands -solver -scenario\n"
         "scenarios: SingleSolverRun MaxCongestion Overhead Robustness\n"
         "solvers:   identity igpwo sr2seg-exact sr2seg-heur srlns defoCP\n"
         "           milp-export lpbound, plus external solvers listed in\n"
         "           $" + std::string(kSolverSpecsEnv) + " (default " +
         kDefaultSolverSpecsPath + ")\n"
         "-iterations replaces the time limit by an iteration count, which\n"
         "makes randomized solvers reproducible.\n";
}

namespace detail {

template <typename T>
T parse_flag_number(const std::string& flag, const std::string& value) {
  T out{};
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || p != value.data() + value.size()) {
    throw UsageError("invalid value for " + flag + ": '" + value + "'");
  }
  return out;
}

}  // namespace detail

inline CliInvocation parse_args(const std::vector<std::string>& args) {
  CliInvocation inv;
  std::map<std::string, std::string> values;
  static const std::vector<std::string> kFlags = {
      "graph", "demands", "solver",  "t",          "scenario", "out",
      "seed",  "weights", "epsilon", "iterations", "jobs"};
  for (std::size_t i = 0; i < args.size(); ++i) {
    std::string flag = args[i];
    if (flag.starts_with("--")) {
      flag = flag.substr(2);
    } else if (flag.starts_with("-") && flag.size() > 1) {
      flag = flag.substr(1);
    } else {
      throw UsageError("unexpected argument '" + args[i] + "'");
    }
    if (flag == "h" || flag == "help") {
      inv.help = true;
      return inv;
    }
    if (std::find(kFlags.begin(), kFlags.end(), flag) == kFlags.end()) {
      throw UsageError("unknown flag '" + args[i] + "'");
    }
    if (i + 1 >= args.size()) throw UsageError("missing value for -" + flag);
    values[flag] = args[++i];
  }

  std::string missing;
  for (const char* f : {"graph", "demands", "solver", "scenario"}) {
    if (!values.contains(f)) missing += std::string(missing.empty() ? "" : " ") + "-" + f;
  }
  if (!missing.empty()) {
    throw UsageError("missing mandatory flags: " + missing +
                     " (mandatory: -graph -demands -solver -scenario)");
  }
  inv.graph_path = values["graph"];
  inv.demands_path = values["demands"];
  inv.solver_name = values["solver"];
  inv.scenario_name = values["scenario"];
  if (values.contains("t")) {
    inv.time_limit_seconds = detail::parse_flag_number<double>("-t", values["t"]);
    if (!(inv.time_limit_seconds > 0) || !std::isfinite(inv.time_limit_seconds)) {
      throw UsageError("-t must be positive");
    }
  }
  if (values.contains("out")) inv.out_path = values["out"];
  if (values.contains("seed")) {
    inv.seed = detail::parse_flag_number<std::uint64_t>("-seed", values["seed"]);
  }
  if (values.contains("weights")) {
    inv.weight_heuristic = values["weights"];
    if (!parse_weight_heuristic(*inv.weight_heuristic)) {
      throw UsageError("unknown weight heuristic '" + *inv.weight_heuristic + "'");
    }
  }
  if (values.contains("epsilon")) {
    inv.epsilon = detail::parse_flag_number<double>("-epsilon", values["epsilon"]);
    if (!(*inv.epsilon > 0 && *inv.epsilon < 1)) {
      throw UsageError("-epsilon must lie in ]0, 1[");
    }
  }
  if (values.contains("iterations")) {
    inv.iterations =
        detail::parse_flag_number<std::int64_t>("-iterations", values["iterations"]);
    if (*inv.iterations <= 0) throw UsageError("-iterations must be positive");
  }
  if (values.contains("jobs")) {
    inv.jobs = detail::parse_flag_number<int>("-jobs", values["jobs"]);
    if (inv.jobs < 1) throw UsageError("-jobs must be at least 1");
  }
  return inv;
}

inline CliInvocation parse_args(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_args(args);
}

// Registry with the built-in solvers and the external ones from the specs
// file. A missing default specs file is fine; a missing file named through the
// environment is a configuration error.
inline SolverRegistry build_registry() {
  SolverRegistry registry = SolverRegistry::with_builtins();
  const char* env = std::getenv(kSolverSpecsEnv);
  const std::string path = env ? env : kDefaultSolverSpecsPath;
  if (!std::filesystem::exists(path)) {
    if (env) throw ConfigError("solver specs file not found: " + path);
    return registry;
  }
  try {
    register_external_solvers(registry, read_solver_specs_file(path));
  } catch (const SpecError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return registry;
}

// Demand files named by the -demands argument: the file itself, or every
// regular non-hidden file of a directory in name order.
inline std::vector<std::filesystem::path> demand_files(const std::string& arg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::exists(arg, ec)) throw ConfigError("demands not found: " + arg);
  if (!fs::is_directory(arg, ec)) return {fs::path(arg)};
  std::vector<fs::path> out;
  for (const fs::directory_entry& entry : fs::directory_iterator(arg, ec)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && !name.starts_with(".")) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no demand files in " + arg);
  return out;
}

// Parses and preprocesses the inputs into one setting per demand file.
inline std::vector<Setting> load_settings(const CliInvocation& inv,
                                          std::ostream& err) {
  if (!std::filesystem::exists(inv.graph_path)) {
    throw ConfigError("graph file not found: " + inv.graph_path);
  }
  Topology raw;
  try {
    raw = read_topology_file(inv.graph_path);
  } catch (const std::exception& e) {
    throw ConfigError(inv.graph_path + ": " + e.what());
  }
  PreprocessResult pre;
  try {
    pre = preprocess_topology_with_map(raw);
  } catch (const std::exception& e) {
    throw ConfigError(inv.graph_path + ": " + e.what());
  }
  if (pre.topology.node_count() < raw.node_count()) {
    err << "note: kept the largest strongly connected component ("
        << pre.topology.node_count() << " of " << raw.node_count()
        << " nodes)\n";
  }

  std::vector<Setting> settings;
  for (const std::filesystem::path& file : demand_files(inv.demands_path)) {
    TrafficMatrix tm;
    try {
      tm = read_demands_file(file.string(), raw.node_count());
    } catch (const std::exception& e) {
      throw ConfigError(file.string() + ": " + e.what());
    }
    TrafficMatrix kept = remap_demands(tm, pre.node_map);
    if (kept.size() < tm.size()) {
      err << "note: " << file.string() << ": dropped "
          << tm.size() - kept.size()
          << " demands with an endpoint outside the kept component\n";
    }
    Setting s = make_setting(pre.topology, std::move(kept), file.stem().string());
    const std::vector<std::string> problems = validate_setting(s);
    if (!problems.empty()) {
      throw ConfigError(file.string() + ": " + problems.front());
    }
    settings.push_back(std::move(s));
  }
  return settings;
}

inline SolverBudget budget_of(const CliInvocation& inv) {
  const std::uint64_t seed = inv.seed.value_or(0);
  if (inv.iterations) return SolverBudget::iteration_count(*inv.iterations, seed);
  return SolverBudget::wall_clock(std::llround(inv.time_limit_seconds * 1000), seed);
}

// Opens the report destination; std::cout unless -out is given.
class OutputSink {
 public:
  explicit OutputSink(const std::optional<std::string>& path) {
    if (path) {
      file_.open(*path);
      if (!file_) throw ConfigError("cannot open output file " + *path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

inline int run_invocation(const CliInvocation& inv, std::ostream& err) {
  const std::optional<ScenarioKind> kind = parse_scenario_kind(inv.scenario_name);
  if (!kind) throw ConfigError("unknown scenario: " + inv.scenario_name);
  const SolverRegistry registry = build_registry();
  const bool utility = inv.solver_name == kMilpExportSolver ||
                       inv.solver_name == kLpBoundSolver;
  if (!utility && !registry.contains(inv.solver_name)) {
    throw ConfigError("unknown solver: " + inv.solver_name);
  }
  std::vector<Setting> settings = load_settings(inv, err);
  if (inv.solver_name == kMilpExportSolver && settings.size() != 1) {
    throw ConfigError("milp-export takes a single demands file");
  }

  const SolverBudget budget = budget_of(inv);
  if (inv.weight_heuristic) {
    const WeightHeuristic h = *parse_weight_heuristic(*inv.weight_heuristic);
    for (Setting& s : settings) s.routing.weights = assign_weights(s, h, budget);
  }
  const double epsilon = inv.epsilon.value_or(kDefaultLpEpsilon);

  OutputSink sink(inv.out_path);
  std::ostream& out = sink.stream();
  if (inv.solver_name == kMilpExportSolver) {
    export_milp(out, settings.front());
    return kExitOk;
  }
  if (inv.solver_name == kLpBoundSolver) {
    out << "setting, lower_bound, upper_bound, achieved_epsilon, converged\n";
    for (const Setting& s : settings) {
      const McfSolution m = lp_lower_bound(s.topology, s.traffic, epsilon);
      out << s.id << ", " << ReportWriter::fixed(m.lower_bound) << ", "
          << ReportWriter::fixed(m.upper_bound) << ", "
          << ReportWriter::fixed(m.achieved_epsilon) << ", "
          << (m.converged ? "yes" : "no") << "\n";
    }
    return kExitOk;
  }

  ScenarioSpec spec;
  spec.kind = *kind;
  spec.solver_name = inv.solver_name;
  spec.budget = budget;
  spec.output_path = inv.out_path;
  spec.epsilon = epsilon;
  spec.jobs = inv.jobs;
  ReportWriter writer(out);
  writer.header();
  const ScenarioReport report =
      run_scenario(spec, registry, settings,
                   [&](const ScenarioRecord& r) { writer.record(r); });
  if (report.summary) writer.summary(*report.summary);
  if (!out) throw std::runtime_error("failed writing the report");
  return kExitOk;
}

inline int cli_main(int argc, const char* const* argv, std::ostream& err) {
  CliInvocation inv;
  try {
    inv = parse_args(argc, argv);
  } catch (const UsageError& e) {
    err << "repetita: " << e.what() << "\n\n" << usage();
    return kExitConfigError;
  }
  if (inv.help) {
    std::cout << usage();
    return kExitOk;
  }
  try {
    return run_invocation(inv, err);
  } catch (const ConfigError& e) {
    err << "repetita: configuration error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "repetita: runtime error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}

}  // namespace repetita
