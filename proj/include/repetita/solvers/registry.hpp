#pragma once

// Built-in solvers by name, plus a slot for externally registered ones.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "repetita/solvers/igp_wo.hpp"
#include "repetita/solvers/solver.hpp"
#include "repetita/solvers/sr_lns.hpp"
#include "repetita/solvers/sr_two_segment.hpp"

namespace repetita {

class IdentitySolver : public Solver {
 public:
  std::string name() const override { return "identity"; }
  SolverResult solve(const Setting& setting, const SolverBudget&) override {
    return {setting.routing, false, std::nullopt};
  }
};

class IgpWoSolver : public Solver {
 public:
  std::string name() const override { return "igpwo"; }
  SolverResult solve(const Setting& setting,
                     const SolverBudget& budget) override {
    return {solve_igp_wo(setting, budget), false, std::nullopt};
  }
};

class TwoSegmentSolver : public Solver {
 public:
  explicit TwoSegmentSolver(TwoSegmentMode mode) : mode_(mode) {}
  std::string name() const override {
    return mode_ == TwoSegmentMode::kExactTiny ? "sr2seg-exact" : "sr2seg-heur";
  }
  SolverResult solve(const Setting& setting,
                     const SolverBudget& budget) override {
    TwoSegmentResult r = solve_sr_two_segment_detailed(setting, budget, mode_);
    return {std::move(r.routing), !r.complete, std::nullopt};
  }

 private:
  TwoSegmentMode mode_;
};

class LnsSolver : public Solver {
 public:
  explicit LnsSolver(std::string name = "srlns") : name_(std::move(name)) {}
  std::string name() const override { return name_; }
  SolverResult solve(const Setting& setting,
                     const SolverBudget& budget) override {
    return {solve_sr_lns(setting, budget), false, std::nullopt};
  }

 private:
  std::string name_;
};

class SolverRegistry {
 public:
  using Factory = std::function<std::unique_ptr<Solver>()>;

  static SolverRegistry with_builtins() {
    SolverRegistry r;
    r.add("identity", [] { return std::make_unique<IdentitySolver>(); });
    r.add("igpwo", [] { return std::make_unique<IgpWoSolver>(); });
    r.add("sr2seg-exact", [] {
      return std::make_unique<TwoSegmentSolver>(TwoSegmentMode::kExactTiny);
    });
    r.add("sr2seg-heur", [] {
      return std::make_unique<TwoSegmentSolver>(TwoSegmentMode::kHeuristic);
    });
    r.add("srlns", [] { return std::make_unique<LnsSolver>("srlns"); });
    r.add("defoCP", [] { return std::make_unique<LnsSolver>("defoCP"); });
    return r;
  }

  void add(const std::string& name, Factory factory) {
    factories_[name] = std::move(factory);
  }

  bool contains(const std::string& name) const {
    return factories_.contains(name);
  }

  std::unique_ptr<Solver> create(const std::string& name) const {
    auto it = factories_.find(name);
    if (it == factories_.end()) return nullptr;
    return it->second();
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, f] : factories_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, Factory> factories_;
};

}  // namespace repetita
