#pragma once

// External solvers: executables that read a topology and a demand file and
// write their routing decisions to an output file, described by blocks of
//
//   name = randomTunnels
//   run command = python solver.py $TOPOFILE $DEMANDFILE $OUTFILE
//   optimization effect = setExplicitPaths
//   field separator = '; '
//   key field = 0
//   value field = 2
//   gettime command = cat $OUTFILE | grep 'execution time' | awk ...
//
// in a specs file. Output lines are split by the separator; the key field is a
// demand label (paths, segments) or an edge label (weights) and the value
// field a comma-separated node-index path or an integer weight. Repeated keys
// for paths accumulate, and the demand is split evenly among its paths.

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/io.hpp"
#include "repetita/solvers/registry.hpp"
#include "repetita/solvers/solver.hpp"

namespace repetita {

enum class OptimizationEffect { kSetExplicitPaths, kSetLinkWeights, kSetSegments };

struct ExternalSolverSpec {
  std::string name;
  std::string objective;
  std::string run_command;
  OptimizationEffect effect = OptimizationEffect::kSetExplicitPaths;
  std::string field_separator;
  int key_field = 0;
  int value_field = 1;
  std::string gettime_command;  // empty: use measured wall-clock time
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

// Keys are words separated by spaces, compared case-insensitively. Anything
// else before an '=' (e.g. "awk -v FS") is not a key.
inline std::optional<std::string> spec_key(std::string_view line) {
  const std::size_t eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  const std::string key = trim(line.substr(0, eq));
  if (key.empty()) return std::nullopt;
  std::string norm;
  for (char c : key) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      norm += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (c == ' ' || c == '\t') {
      if (!norm.empty() && norm.back() != ' ') norm += ' ';
    } else {
      return std::nullopt;
    }
  }
  return norm;
}

inline std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '\'' && v.back() == '\'') {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

inline std::optional<OptimizationEffect> parse_effect(const std::string& s) {
  if (s == "setExplicitPaths") return OptimizationEffect::kSetExplicitPaths;
  if (s == "setLinkWeights") return OptimizationEffect::kSetLinkWeights;
  if (s == "setSegments") return OptimizationEffect::kSetSegments;
  return std::nullopt;
}

inline void replace_all(std::string& s, const std::string& from,
                        const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos;
       pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

struct RawBlock {
  int line = 0;
  std::vector<std::pair<std::string, std::string>> entries;
};

inline ExternalSolverSpec build_spec(const RawBlock& block) {
  std::map<std::string, std::string> values;
  for (const auto& [k, v] : block.entries) {
    if (values.contains(k)) {
      throw SpecError("solver block at line " + std::to_string(block.line) +
                      ": duplicate key '" + k + "'");
    }
    values[k] = unquote(trim(v));
  }
  const std::string label = "solver block '" + values["name"] + "' (line " +
                            std::to_string(block.line) + ")";
  for (const char* key : {"name", "run command", "optimization effect",
                          "field separator", "key field", "value field"}) {
    if (!values.contains(key) || values[key].empty()) {
      throw SpecError(label + ": missing '" + key + "'");
    }
  }
  ExternalSolverSpec spec;
  spec.name = values["name"];
  spec.objective = values["optimization objective"];
  spec.run_command = values["run command"];
  spec.field_separator = values["field separator"];
  spec.gettime_command = values["gettime command"];
  for (const char* ph : {"$TOPOFILE", "$DEMANDFILE", "$OUTFILE"}) {
    if (spec.run_command.find(ph) == std::string::npos) {
      throw SpecError(label + ": run command lacks " + std::string(ph));
    }
  }
  if (!spec.gettime_command.empty() &&
      spec.gettime_command.find("$OUTFILE") == std::string::npos) {
    throw SpecError(label + ": gettime command lacks $OUTFILE");
  }
  auto effect = parse_effect(values["optimization effect"]);
  if (!effect) {
    throw SpecError(label + ": unknown optimization effect '" +
                    values["optimization effect"] + "'");
  }
  spec.effect = *effect;
  auto index = [&](const char* key) {
    const std::string& v = values[key];
    int out = -1;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || out < 0) {
      throw SpecError(label + ": '" + key + "' must be a non-negative integer");
    }
    return out;
  };
  spec.key_field = index("key field");
  spec.value_field = index("value field");
  if (spec.key_field == spec.value_field) {
    throw SpecError(label + ": key and value field coincide");
  }
  return spec;
}

}  // namespace detail

// A new block starts at every `name` key, so blank lines inside a block are
// allowed. Lines starting with "//" are comments. A line that does not start
// with a known key is appended (space separated) to the previous value.
inline std::vector<ExternalSolverSpec> parse_solver_specs(std::istream& in) {
  static const std::vector<std::string> kKnown = {
      "name", "optimization objective", "run command", "optimization effect",
      "field separator", "key field", "value field", "gettime command"};
  std::vector<detail::RawBlock> blocks;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = detail::trim(raw);
    if (line.empty() || line.starts_with("//")) continue;
    std::optional<std::string> key = detail::spec_key(line);
    if (key && std::find(kKnown.begin(), kKnown.end(), *key) == kKnown.end()) {
      key.reset();
    }
    if (key) {
      if (*key == "name") blocks.push_back({line_no, {}});
      if (blocks.empty()) {
        throw SpecError("line " + std::to_string(line_no) + ": '" + *key +
                        "' before any 'name'");
      }
      blocks.back().entries.emplace_back(*key, line.substr(line.find('=') + 1));
      continue;
    }
    if (blocks.empty() || blocks.back().entries.empty()) {
      throw SpecError("line " + std::to_string(line_no) +
                      ": expected 'key = value'");
    }
    blocks.back().entries.back().second += " " + line;
  }
  std::vector<ExternalSolverSpec> out;
  for (const detail::RawBlock& b : blocks) out.push_back(detail::build_spec(b));
  return out;
}

inline std::vector<ExternalSolverSpec> parse_solver_specs(const std::string& text) {
  std::istringstream in(text);
  return parse_solver_specs(in);
}

inline std::vector<ExternalSolverSpec> read_solver_specs_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open solver specs file " + path);
  return parse_solver_specs(in);
}

// Applies a solver's output file to the setting's routing. With `lenient`
// (output of a killed solver), malformed lines are skipped instead of
// rejected. Lines with too few fields, such as a trailing timing line, are
// always skipped.
inline RoutingConfiguration apply_solver_output(const ExternalSolverSpec& spec,
                                                const Setting& setting,
                                                std::istream& in,
                                                bool lenient = false) {
  const Topology& topo = setting.topology;
  std::map<std::string, DemandId> demand_by_label;
  for (DemandId d = 0; d < setting.traffic.size(); ++d) {
    demand_by_label.emplace(setting.traffic.demands[d].label, d);
  }
  std::map<std::string, EdgeId> edge_by_label;
  for (EdgeId e = 0; e < topo.edge_count(); ++e) {
    edge_by_label.emplace(topo.edge(e).label, e);
  }

  RoutingConfiguration routing = setting.routing;
  std::map<DemandId, std::vector<EdgePath>> paths;
  std::map<DemandId, SegmentList> segments;
  const std::size_t needed =
      static_cast<std::size_t>(std::max(spec.key_field, spec.value_field)) + 1;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (detail::trim(raw).empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t next = raw.find(spec.field_separator, pos);
      fields.push_back(raw.substr(pos, next - pos));
      if (next == std::string::npos) break;
      pos = next + spec.field_separator.size();
    }
    if (fields.size() < needed) continue;
    const std::string key = detail::trim(fields[spec.key_field]);
    const std::string value = detail::trim(fields[spec.value_field]);
    try {
      if (spec.effect == OptimizationEffect::kSetLinkWeights) {
        auto it = edge_by_label.find(key);
        if (it == edge_by_label.end()) {
          throw ParseError(line_no, "unknown edge label '" + key + "'");
        }
        const Weight w = detail::parse_int(value, line_no, "weight");
        if (w < 1) throw ParseError(line_no, "weight below 1");
        routing.weights[it->second] = w;
        continue;
      }
      auto it = demand_by_label.find(key);
      if (it == demand_by_label.end()) {
        throw ParseError(line_no, "unknown demand label '" + key + "'");
      }
      const Demand& dem = setting.traffic.demands[it->second];
      SegmentList nodes;
      std::stringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        nodes.push_back(detail::parse_node_index(detail::trim(item), line_no,
                                                 topo.node_count()));
      }
      if (nodes.size() < 2 || nodes.front() != dem.src || nodes.back() != dem.dst) {
        throw ParseError(line_no, "path for '" + key +
                                      "' must run from its source to its destination");
      }
      if (spec.effect == OptimizationEffect::kSetSegments) {
        if (segments.contains(it->second)) {
          throw ParseError(line_no, "second segment list for '" + key + "'");
        }
        segments[it->second] = std::move(nodes);
        continue;
      }
      EdgePath path;
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        auto e = topo.find_edge(nodes[i], nodes[i + 1]);
        if (!e) {
          throw ParseError(line_no, "no edge from node " + std::to_string(nodes[i]) +
                                        " to node " + std::to_string(nodes[i + 1]));
        }
        path.push_back(*e);
      }
      paths[it->second].push_back(std::move(path));
    } catch (const ParseError&) {
      if (!lenient) throw;
    }
  }
  for (auto& [d, p] : segments) {
    routing.explicit_paths.erase(d);
    routing.sr_segments[d] = std::move(p);
  }
  for (auto& [d, p] : paths) {
    routing.sr_segments.erase(d);
    routing.explicit_paths[d] = std::move(p);
  }
  return routing;
}

namespace detail {

struct ProcessResult {
  int exit_status = -1;  // -1 when killed or not exited normally
  bool timed_out = false;
  std::int64_t wall_ms = 0;
};

// Runs `command` through /bin/sh in its own process group with stdout and
// stderr sent to files. At the deadline the whole group gets SIGTERM, then
// SIGKILL after a short grace period.
inline ProcessResult run_shell(const std::string& command,
                               const std::string& stdout_path,
                               const std::string& stderr_path,
                               std::chrono::milliseconds timeout) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  const pid_t pid = fork();
  if (pid < 0) throw std::runtime_error("fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    const int out = open(stdout_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    const int err = open(stderr_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (out >= 0) dup2(out, STDOUT_FILENO);
    if (err >= 0) dup2(err, STDERR_FILENO);
    const int devnull = open("/dev/null", O_RDONLY);
    if (devnull >= 0) dup2(devnull, STDIN_FILENO);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);

  ProcessResult result;
  const auto deadline = start + timeout;
  int status = 0;
  auto poll = [&] { return waitpid(pid, &status, WNOHANG) == pid; };
  bool done = false;
  while (!(done = poll()) && Clock::now() < deadline) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!done) {
    result.timed_out = true;
    kill(-pid, SIGTERM);
    const auto grace = Clock::now() + std::chrono::milliseconds(500);
    while (!(done = poll()) && Clock::now() < grace) {
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    if (!done) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
    }
  }
  // Stragglers that left the shell's group alive are not waited for.
  kill(-pid, SIGKILL);
  result.wall_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start)
          .count();
  if (!result.timed_out && WIFEXITED(status)) {
    result.exit_status = WEXITSTATUS(status);
  }
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Removes its directory, with everything in it, on scope exit.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "repetita-XXXXXX").string();
    if (mkdtemp(tmpl.data()) == nullptr) {
      throw std::runtime_error("cannot create temporary directory");
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace detail

inline constexpr std::chrono::milliseconds kGetTimeTimeout{10'000};

struct ExternalRun {
  RoutingConfiguration routing;
  std::optional<std::int64_t> reported_time_ms;
  std::int64_t wall_ms = 0;
  bool truncated = false;
};

// Runs the solver on the setting within the budget's wall-clock time. A
// killed solver's partial output is applied leniently. Throws on a nonzero
// exit status or malformed output.
inline ExternalRun run_external_solver(const ExternalSolverSpec& spec,
                                       const Setting& setting,
                                       const SolverBudget& budget) {
  detail::TempDir dir;
  const std::string topo_file = dir.file("topology.graph");
  const std::string demand_file = dir.file("traffic.demands");
  const std::string out_file = dir.file("solver.out");
  {
    std::ofstream t(topo_file);
    write_topology(t, setting.topology);
    std::ofstream d(demand_file);
    write_demands(d, setting.traffic);
    if (!t || !d) throw std::runtime_error("cannot write solver input files");
  }
  std::string command = spec.run_command;
  detail::replace_all(command, "$TOPOFILE", topo_file);
  detail::replace_all(command, "$DEMANDFILE", demand_file);
  detail::replace_all(command, "$OUTFILE", out_file);

  const std::int64_t limit_ms =
      budget.mode == BudgetMode::kWallClock ? budget.wall_clock_ms : 30'000;
  const detail::ProcessResult proc =
      detail::run_shell(command, dir.file("stdout"), dir.file("stderr"),
                        std::chrono::milliseconds(std::max<std::int64_t>(limit_ms, 1)));

  ExternalRun run;
  run.wall_ms = proc.wall_ms;
  run.truncated = proc.timed_out;
  if (!proc.timed_out && proc.exit_status != 0) {
    std::string err = detail::read_file(dir.file("stderr"));
    if (err.size() > 500) err = err.substr(err.size() - 500);
    throw std::runtime_error("external solver " + spec.name + " exited with status " +
                             std::to_string(proc.exit_status) +
                             (err.empty() ? "" : ": " + detail::trim(err)));
  }
  std::ifstream out(out_file);
  if (!out) {
    throw std::runtime_error("external solver " + spec.name +
                             " produced no output file");
  }
  run.routing = apply_solver_output(spec, setting, out, proc.timed_out);

  if (!spec.gettime_command.empty()) {
    std::string gettime = spec.gettime_command;
    detail::replace_all(gettime, "$OUTFILE", out_file);
    const detail::ProcessResult t = detail::run_shell(
        gettime, dir.file("time.stdout"), dir.file("time.stderr"), kGetTimeTimeout);
    if (t.exit_status == 0) {
      const std::string text = detail::trim(detail::read_file(dir.file("time.stdout")));
      char* end = nullptr;
      const double seconds = std::strtod(text.c_str(), &end);
      if (!text.empty() && end == text.c_str() + text.size() && seconds >= 0) {
        run.reported_time_ms = std::llround(seconds * 1000);
      }
    }
  }
  return run;
}

class ExternalSolver : public Solver {
 public:
  explicit ExternalSolver(ExternalSolverSpec spec) : spec_(std::move(spec)) {}
  std::string name() const override { return spec_.name; }
  SolverResult solve(const Setting& setting,
                     const SolverBudget& budget) override {
    ExternalRun run = run_external_solver(spec_, setting, budget);
    return {std::move(run.routing), run.truncated,
            run.reported_time_ms ? run.reported_time_ms : run.wall_ms};
  }

 private:
  ExternalSolverSpec spec_;
};

// Built-in names take precedence over external solvers of the same name.
inline void register_external_solvers(SolverRegistry& registry,
                                      const std::vector<ExternalSolverSpec>& specs) {
  for (const ExternalSolverSpec& spec : specs) {
    if (registry.contains(spec.name)) continue;
    registry.add(spec.name, [spec] { return std::make_unique<ExternalSolver>(spec); });
  }
}

}  // namespace repetita
