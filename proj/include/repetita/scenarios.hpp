#pragma once

// Analyses over settings: single runs, congestion statistics, configuration
// overhead and single-link-failure robustness, plus the report writer.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/io.hpp"
#include "repetita/mcf.hpp"
#include "repetita/routing.hpp"
#include "repetita/solvers/registry.hpp"

namespace repetita {

// Bad user input detected before any solver runs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { kSingleSolverRun, kMaxCongestion, kOverhead, kRobustness };

inline std::string scenario_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kSingleSolverRun: return "SingleSolverRun";
    case ScenarioKind::kMaxCongestion: return "MaxCongestion";
    case ScenarioKind::kOverhead: return "Overhead";
    case ScenarioKind::kRobustness: return "Robustness";
  }
  return "";
}

inline std::optional<ScenarioKind> parse_scenario_kind(const std::string& name) {
  for (ScenarioKind k :
       {ScenarioKind::kSingleSolverRun, ScenarioKind::kMaxCongestion,
        ScenarioKind::kOverhead, ScenarioKind::kRobustness}) {
    if (scenario_name(k) == name) return k;
  }
  return std::nullopt;
}

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kSingleSolverRun;
  std::string solver_name;
  SolverBudget budget;
  std::optional<std::string> output_path;
  double epsilon = kDefaultLpEpsilon;  // accuracy of the lower bounds
  int jobs = 1;
};

using RecordSink = std::function<void(const ScenarioRecord&)>;

namespace detail {

// Runs fn(0..count-1) on up to `jobs` threads. The first exception thrown by
// any call is rethrown after all threads joined.
inline void parallel_for(std::size_t count, int jobs,
                         const std::function<void(std::size_t)>& fn) {
  const std::size_t threads =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, jobs)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

// Type-7 percentile: linear interpolation between order statistics.
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

inline Percentiles summarize(const std::vector<double>& values) {
  return {percentile(values, 0), percentile(values, 0.25),
          percentile(values, 0.5), percentile(values, 0.75),
          percentile(values, 1)};
}

struct SolverRun {
  RoutingConfiguration routing;
  std::int64_t time_ms = 0;
  bool truncated = false;
  bool failed = false;
  std::string error;
};

// Runs the solver and keeps whatever it returned by the deadline. Exceptions
// and invalid configurations are recorded as failed runs that leave the
// setting's routing unchanged.
inline SolverRun enforce_budget(Solver& solver, const Setting& setting,
                                const SolverBudget& budget) {
  using Clock = std::chrono::steady_clock;
  SolverRun run;
  run.routing = setting.routing;
  const auto start = Clock::now();
  try {
    SolverResult result = solver.solve(setting, budget);
    run.time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      Clock::now() - start)
                      .count();
    if (result.reported_time_ms) run.time_ms = *result.reported_time_ms;
    run.truncated = result.truncated;
    const Setting candidate = with_routing(setting, result.routing);
    const std::vector<std::string> problems = validate_setting(candidate);
    if (!problems.empty()) {
      run.failed = true;
      run.error = "invalid configuration: " + problems.front();
      return run;
    }
    max_utilization(candidate);  // throws on unroutable configurations
    run.routing = std::move(result.routing);
  } catch (const std::exception& e) {
    run.time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      Clock::now() - start)
                      .count();
    run.failed = true;
    run.error = e.what();
  }
  return run;
}

inline OverheadCounters compute_overhead(const Setting& setting,
                                         const RoutingConfiguration& post) {
  const RoutingConfiguration& pre = setting.routing;
  OverheadCounters out;
  for (std::size_t e = 0; e < post.weights.size(); ++e) {
    if (e >= pre.weights.size() || pre.weights[e] != post.weights[e]) {
      ++out.changed_weights;
    }
  }
  for (const auto& [d, segments] : post.sr_segments) {
    if (segments.size() < 3) continue;
    auto it = pre.sr_segments.find(d);
    if (it == pre.sr_segments.end() || it->second != segments) {
      ++out.rerouted_sr_demands;
    }
  }
  for (const auto& [d, paths] : post.explicit_paths) {
    auto it = pre.explicit_paths.find(d);
    if (it == pre.explicit_paths.end() || it->second != paths) {
      ++out.modified_explicit_paths;
    }
  }
  const DemandId total = setting.traffic.size();
  if (total > 0) {
    out.rerouted_sr_demands_fraction =
        static_cast<double>(out.rerouted_sr_demands) / total;
  }
  return out;
}

// A physical link: a directed edge and its reverse twin, if any. The twin is
// the lowest-index unpaired edge going the other way.
struct PhysicalLink {
  EdgeId forward = -1;
  std::optional<EdgeId> reverse;
};

inline std::vector<PhysicalLink> physical_links(const Topology& topo) {
  std::vector<bool> paired(topo.edge_count(), false);
  std::vector<PhysicalLink> out;
  for (EdgeId e = 0; e < topo.edge_count(); ++e) {
    if (paired[e]) continue;
    paired[e] = true;
    PhysicalLink link{e, std::nullopt};
    const Edge& fwd = topo.edge(e);
    for (EdgeId r : topo.out_edges(fwd.dst)) {
      if (!paired[r] && topo.edge(r).dst == fwd.src &&
          (!link.reverse || r < *link.reverse)) {
        link.reverse = r;
      }
    }
    if (link.reverse) paired[*link.reverse] = true;
    out.push_back(link);
  }
  return out;
}

// The setting on the topology without the removed edges. Weights and segment
// lists carry over; explicit paths through a removed edge are dropped, so
// those demands fall back to their segments or plain IGP.
inline Setting remove_edges(const Setting& setting,
                            const std::vector<bool>& removed) {
  const Topology& topo = setting.topology;
  std::vector<EdgeId> new_index(topo.edge_count(), -1);
  std::vector<Edge> edges;
  RoutingConfiguration routing;
  for (EdgeId e = 0; e < topo.edge_count(); ++e) {
    if (removed[e]) continue;
    new_index[e] = static_cast<EdgeId>(edges.size());
    edges.push_back(topo.edge(e));
    routing.weights.push_back(setting.routing.weights[e]);
  }
  routing.sr_segments = setting.routing.sr_segments;
  for (const auto& [d, paths] : setting.routing.explicit_paths) {
    std::vector<EdgePath> remapped;
    bool broken = false;
    for (const EdgePath& p : paths) {
      EdgePath q;
      for (EdgeId e : p) {
        if (removed[e]) {
          broken = true;
          break;
        }
        q.push_back(new_index[e]);
      }
      if (broken) break;
      remapped.push_back(std::move(q));
    }
    if (!broken) routing.explicit_paths[d] = std::move(remapped);
  }
  return {setting.id, Topology(topo.nodes(), std::move(edges)), setting.traffic,
          std::move(routing)};
}

// Evaluates `routing` under every single physical-link failure that keeps the
// topology strongly connected; links whose loss disconnects it are skipped.
inline std::vector<FailureRecord> evaluate_failures(
    const Setting& setting, const RoutingConfiguration& routing,
    double epsilon = kDefaultLpEpsilon, int jobs = 1) {
  const Setting configured = with_routing(setting, routing);
  const Topology& topo = setting.topology;
  std::vector<std::vector<bool>> masks;
  std::vector<std::string> labels;
  for (const PhysicalLink& link : physical_links(topo)) {
    std::vector<bool> removed(topo.edge_count(), false);
    removed[link.forward] = true;
    if (link.reverse) removed[*link.reverse] = true;
    if (!is_strongly_connected(topo, &removed)) continue;
    masks.push_back(std::move(removed));
    labels.push_back(topo.edge(link.forward).label);
  }
  std::vector<FailureRecord> out(masks.size());
  detail::parallel_for(masks.size(), jobs, [&](std::size_t i) {
    const Setting failed = remove_edges(configured, masks[i]);
    FailureRecord& r = out[i];
    r.link = labels[i];
    r.post_failure_utilization = max_utilization(failed);
    r.post_failure_bound =
        lp_lower_bound(failed.topology, failed.traffic, epsilon).lower_bound;
    r.congested = r.post_failure_utilization > 1.0;
  });
  return out;
}

inline std::unique_ptr<Solver> resolve_solver(const SolverRegistry& registry,
                                              const std::string& name) {
  std::unique_ptr<Solver> solver = registry.create(name);
  if (!solver) throw ConfigError("unknown solver: " + name);
  return solver;
}

namespace detail {

inline ScenarioRecord run_one(const ScenarioSpec& spec,
                              const SolverRegistry& registry,
                              const Setting& setting, int failure_jobs) {
  ScenarioRecord record;
  record.scenario = scenario_name(spec.kind);
  record.solver = spec.solver_name;
  record.setting_id = setting.id;
  record.pre_max_utilization = max_utilization(setting);
  record.lower_bound =
      lp_lower_bound(setting.topology, setting.traffic, spec.epsilon).lower_bound;

  std::unique_ptr<Solver> solver = resolve_solver(registry, spec.solver_name);
  SolverRun run = enforce_budget(*solver, setting, spec.budget);
  record.solve_time_ms = run.time_ms;
  record.truncated = run.truncated;
  record.failed = run.failed;
  record.error = run.error;
  record.post_max_utilization =
      max_utilization(with_routing(setting, run.routing));

  if (spec.kind == ScenarioKind::kOverhead) {
    record.overhead = compute_overhead(setting, run.routing);
  }
  if (spec.kind == ScenarioKind::kRobustness) {
    record.failures =
        evaluate_failures(setting, run.routing, spec.epsilon, failure_jobs);
  }
  return record;
}

}  // namespace detail

// Runs the scenario on every setting. Records reach `sink` in setting order as
// soon as every earlier setting is done, whatever the number of jobs.
inline ScenarioReport run_scenario(const ScenarioSpec& spec,
                                   const SolverRegistry& registry,
                                   const std::vector<Setting>& settings,
                                   const RecordSink& sink = {}) {
  if (!registry.contains(spec.solver_name)) {
    throw ConfigError("unknown solver: " + spec.solver_name);
  }
  if (settings.empty()) throw ConfigError("no settings to evaluate");

  const int failure_jobs = settings.size() == 1 ? spec.jobs : 1;
  std::vector<std::optional<ScenarioRecord>> done(settings.size());
  std::size_t emitted = 0;
  std::mutex mu;
  detail::parallel_for(settings.size(), spec.jobs, [&](std::size_t i) {
    ScenarioRecord r = detail::run_one(spec, registry, settings[i], failure_jobs);
    std::lock_guard<std::mutex> lock(mu);
    done[i] = std::move(r);
    while (emitted < done.size() && done[emitted]) {
      if (sink) sink(*done[emitted]);
      ++emitted;
    }
  });

  ScenarioReport report;
  for (auto& r : done) report.records.push_back(std::move(*r));
  if (spec.kind == ScenarioKind::kMaxCongestion) {
    std::vector<double> post;
    for (const ScenarioRecord& r : report.records) {
      post.push_back(r.post_max_utilization);
    }
    report.summary = ScenarioSummary{summarize(post), std::nullopt};
  }
  if (spec.kind == ScenarioKind::kRobustness) {
    FailureCounts counts;
    for (const ScenarioRecord& r : report.records) {
      for (const FailureRecord& f : *r.failures) {
        ++counts.evaluated;
        if (f.congested) ++counts.congested;
        if (f.post_failure_bound > 1.0) ++counts.congested_bound;
      }
    }
    report.summary = ScenarioSummary{std::nullopt, counts};
  }
  return report;
}

inline ScenarioReport run_single_solver(const ScenarioSpec& spec,
                                        const SolverRegistry& registry,
                                        const Setting& setting) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::kSingleSolverRun;
  return run_scenario(s, registry, {setting});
}

inline ScenarioReport run_max_congestion(const ScenarioSpec& spec,
                                         const SolverRegistry& registry,
                                         const std::vector<Setting>& settings) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::kMaxCongestion;
  return run_scenario(s, registry, settings);
}

inline ScenarioReport run_overhead(const ScenarioSpec& spec,
                                   const SolverRegistry& registry,
                                   const Setting& setting) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::kOverhead;
  return run_scenario(s, registry, {setting});
}

inline ScenarioReport run_robustness(const ScenarioSpec& spec,
                                     const SolverRegistry& registry,
                                     const Setting& setting) {
  ScenarioSpec s = spec;
  s.kind = ScenarioKind::kRobustness;
  return run_scenario(s, registry, {setting});
}

// Report text: a header line, one line per record with fields separated by
// ", ", then "# failure" detail lines, "# error" lines and "# summary" lines.
// The solve_time_ms column is the only field that depends on timing.
class ReportWriter {
 public:
  static constexpr int kTimeColumn = 6;

  explicit ReportWriter(std::ostream& out) : out_(out) {}

  void header() {
    out_ << "scenario, solver, setting, pre_max_util, post_max_util, "
            "lower_bound, solve_time_ms, status, changed_weights, "
            "rerouted_sr_demands, rerouted_sr_fraction, "
            "modified_explicit_paths, failures_evaluated, failures_congested\n";
    out_.flush();
  }

  void record(const ScenarioRecord& r) {
    out_ << clean(r.scenario) << ", " << clean(r.solver) << ", "
         << clean(r.setting_id) << ", " << fixed(r.pre_max_utilization) << ", "
         << fixed(r.post_max_utilization) << ", " << fixed(r.lower_bound)
         << ", " << r.solve_time_ms << ", "
         << (r.failed ? "failed" : (r.truncated ? "truncated" : "ok"));
    if (r.overhead) {
      out_ << ", " << r.overhead->changed_weights << ", "
           << r.overhead->rerouted_sr_demands << ", "
           << fixed(r.overhead->rerouted_sr_demands_fraction) << ", "
           << r.overhead->modified_explicit_paths;
    } else {
      out_ << ", -, -, -, -";
    }
    if (r.failures) {
      std::int64_t congested = 0;
      for (const FailureRecord& f : *r.failures) congested += f.congested;
      out_ << ", " << r.failures->size() << ", " << congested;
    } else {
      out_ << ", -, -";
    }
    out_ << "\n";
    if (r.failures) {
      for (const FailureRecord& f : *r.failures) {
        out_ << "# failure, " << clean(r.setting_id) << ", " << clean(f.link)
             << ", " << fixed(f.post_failure_utilization) << ", "
             << fixed(f.post_failure_bound) << ", "
             << (f.congested ? "congested" : "ok") << "\n";
      }
    }
    if (r.failed) {
      out_ << "# error, " << clean(r.setting_id) << ", " << clean(r.error)
           << "\n";
    }
    out_.flush();
  }

  void summary(const ScenarioSummary& s) {
    if (s.post_utilization) {
      const Percentiles& p = *s.post_utilization;
      out_ << "# summary, post_max_util, min=" << fixed(p.min)
           << ", p25=" << fixed(p.p25) << ", median=" << fixed(p.median)
           << ", p75=" << fixed(p.p75) << ", max=" << fixed(p.max) << "\n";
    }
    if (s.failures) {
      out_ << "# summary, failures, evaluated=" << s.failures->evaluated
           << ", congested=" << s.failures->congested
           << ", congested_bound=" << s.failures->congested_bound << "\n";
    }
    out_.flush();
  }

  static std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
  }

 private:
  // Free text must not break the field separator or the line structure.
  static std::string clean(std::string s) {
    for (char& c : s) {
      if (c == ',') c = ';';
      if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
  }

  std::ostream& out_;
};

inline void write_report(std::ostream& out, const ScenarioReport& report) {
  ReportWriter w(out);
  w.header();
  for (const ScenarioRecord& r : report.records) w.record(r);
  if (report.summary) w.summary(*report.summary);
}

inline std::string write_report(const ScenarioReport& report) {
  std::ostringstream out;
  write_report(out, report);
  return out.str();
}

}  // namespace repetita
