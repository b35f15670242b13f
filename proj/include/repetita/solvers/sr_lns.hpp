#pragma once

// Large neighborhood search over segment lists of any length.
//
// Relax: pick a random subset of demands, biased toward demands crossing the
// most utilized link, and reset them to plain IGP.
// Rebuild: in decreasing volume order, extend each relaxed demand's segment
// list one detour at a time (any node, inserted before the destination),
// keeping the extension that improves the objective most, until no extension
// helps or the list holds |V| nodes.
// The rebuilt configuration is kept unless it raises the maximum utilization.

#include <algorithm>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/rng.hpp"
#include "repetita/solvers/budget.hpp"
#include "repetita/solvers/solver.hpp"
#include "repetita/solvers/sr_model.hpp"

namespace repetita {

struct LnsOptions {
  // Upper bound on the number of demands relaxed per iteration.
  int max_relaxed = 8;
  // Probability of drawing a relaxed demand among those crossing the most
  // utilized link (when any remain).
  double hot_bias = 0.8;
};

namespace detail {

class SrLns {
 public:
  SrLns(SrLoadModel& model, BudgetTracker& tracker, std::uint64_t seed,
        const LnsOptions& options)
      : model_(model),
        tracker_(tracker),
        rng_(seed),
        options_(options),
        paths_(model.setting().traffic.size()) {
    for (DemandId d : model_.eligible()) paths_[d] = model_.current_path(d);
    model_.reset(paths_);
    best_paths_ = paths_;
    best_ = model_.objective();
  }

  void run() {
    while (!tracker_.exhausted()) {
      iterate();
      tracker_.spend();
    }
  }

  const std::vector<SegmentList>& best_paths() const { return best_paths_; }

 private:
  void iterate() {
    const std::vector<DemandId>& eligible = model_.eligible();
    if (eligible.empty()) return;
    const Objective before = model_.objective();
    const std::vector<DemandId> relaxed = relax();
    std::vector<SegmentList> saved(paths_);

    for (DemandId d : relaxed) {
      model_.add_path(d, paths_[d], -1.0);
      paths_[d] = {model_.demand(d).src, model_.demand(d).dst};
      model_.add_path(d, paths_[d], 1.0);
    }
    for (DemandId d : by_volume_descending(model_.setting().traffic, relaxed)) {
      if (!rebuild(d)) break;
    }

    model_.reset(paths_);
    const Objective after = model_.objective();
    if (after.max_utilization > before.max_utilization + kObjectiveTolerance) {
      paths_ = std::move(saved);
      model_.reset(paths_);
      return;
    }
    if (after.better_than(best_)) {
      best_ = after;
      best_paths_ = paths_;
    }
  }

  std::vector<DemandId> relax() {
    const std::vector<DemandId>& eligible = model_.eligible();
    const EdgeId hot = model_.max_edge();
    std::vector<DemandId> crossing;
    std::vector<DemandId> others;
    for (DemandId d : eligible) {
      if (model_.demand(d).volume == 0) continue;
      const SegmentList& p = paths_[d];
      bool touches = false;
      for (std::size_t i = 0; i + 1 < p.size() && !touches; ++i) {
        touches = model_.pair_touches(p[i], p[i + 1], hot);
      }
      (touches ? crossing : others).push_back(d);
    }
    const std::size_t pool = crossing.size() + others.size();
    if (pool == 0) return {};
    const std::size_t limit =
        std::min<std::size_t>(pool, std::max(1, options_.max_relaxed));
    const std::size_t count = 1 + rng_.below(limit);
    std::vector<DemandId> out;
    while (out.size() < count) {
      std::vector<DemandId>& from =
          (!crossing.empty() && (others.empty() || rng_.bernoulli(options_.hot_bias)))
              ? crossing
              : others;
      const std::size_t i = rng_.below(from.size());
      out.push_back(from[i]);
      from.erase(from.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return out;
  }

  // Greedy detour insertion for one demand; false when the budget ran out.
  bool rebuild(DemandId d) {
    SegmentList& path = paths_[d];
    const NodeId n = model_.node_count();
    const double volume = model_.demand(d).volume;
    while (static_cast<NodeId>(path.size()) < n) {
      const NodeId last = path[path.size() - 2];
      const NodeId dst = path.back();
      Objective best = model_.objective();
      NodeId best_k = -1;
      for (NodeId k = 0; k < n; ++k) {
        if (k == last || k == dst) continue;
        if (tracker_.exhausted()) return false;
        model_.add_pair(last, dst, -volume);
        model_.add_pair(last, k, volume);
        model_.add_pair(k, dst, volume);
        const Objective o = model_.objective();
        model_.add_pair(k, dst, -volume);
        model_.add_pair(last, k, -volume);
        model_.add_pair(last, dst, volume);
        if (o.better_than(best)) {
          best = o;
          best_k = k;
        }
      }
      if (best_k < 0) break;
      model_.add_pair(last, dst, -volume);
      model_.add_pair(last, best_k, volume);
      model_.add_pair(best_k, dst, volume);
      path.insert(path.end() - 1, best_k);
    }
    return true;
  }

  SrLoadModel& model_;
  BudgetTracker& tracker_;
  Rng rng_;
  LnsOptions options_;
  std::vector<SegmentList> paths_;
  std::vector<SegmentList> best_paths_;
  Objective best_;
};

}  // namespace detail

inline RoutingConfiguration solve_sr_lns(const Setting& setting,
                                         const SolverBudget& budget,
                                         const LnsOptions& options = {}) {
  BudgetTracker tracker(budget);
  if (tracker.exhausted()) return setting.routing;
  detail::SrLoadModel model(setting);
  detail::SrLns lns(model, tracker, budget.seed, options);
  lns.run();
  return never_worse(setting, detail::routing_from_paths(
                                  setting, model.eligible(), lns.best_paths()));
}

}  // namespace repetita
