#pragma once

// Segment routing with at most one detour per demand: every demand (i, j) is
// sent over the IGP shortest paths i -> k -> j for one node k, or over plain
// IGP. Exact mode enumerates all assignments with branch-and-bound; the
// heuristic mode runs best-improvement local search.

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/solvers/budget.hpp"
#include "repetita/solvers/solver.hpp"
#include "repetita/solvers/sr_model.hpp"

namespace repetita {

enum class TwoSegmentMode { kExactTiny, kHeuristic };

inline constexpr NodeId kExactTinyMaxNodes = 6;
inline constexpr DemandId kExactTinyMaxDemands = 8;

namespace detail {

inline constexpr NodeId kNoDetour = -1;

inline SegmentList two_segment_path(const Demand& d, NodeId detour) {
  if (detour == kNoDetour) return {d.src, d.dst};
  return {d.src, detour, d.dst};
}

// Detour choices of a demand: none first, then every other node by index.
inline std::vector<NodeId> detour_choices(const Demand& d, NodeId n) {
  std::vector<NodeId> out{kNoDetour};
  for (NodeId k = 0; k < n; ++k) {
    if (k != d.src && k != d.dst) out.push_back(k);
  }
  return out;
}

class TwoSegmentExact {
 public:
  TwoSegmentExact(SrLoadModel& model, BudgetTracker& tracker)
      : model_(model),
        tracker_(tracker),
        order_(by_volume_descending(model.setting().traffic, model.eligible())),
        choice_(model.setting().traffic.size(), kNoDetour) {}

  // Returns false when the budget ran out before the tree was exhausted.
  bool run() {
    // Incumbent: every demand on plain IGP.
    for (DemandId d : order_) {
      model_.add_path(d, two_segment_path(model_.demand(d), kNoDetour), 1.0);
    }
    incumbent_ = model_.objective().max_utilization;
    best_choice_ = choice_;
    for (DemandId d : order_) {
      model_.add_path(d, two_segment_path(model_.demand(d), kNoDetour), -1.0);
    }
    complete_ = true;
    search(0);
    return complete_;
  }

  const std::vector<NodeId>& best_choice() const { return best_choice_; }

 private:
  void search(std::size_t depth) {
    if (tracker_.exhausted()) {
      complete_ = false;
      return;
    }
    tracker_.spend();
    const double partial = model_.objective().max_utilization;
    // Loads only grow with depth, so the partial maximum is a bound.
    if (partial >= incumbent_ - kObjectiveTolerance) return;
    if (depth == order_.size()) {
      incumbent_ = partial;
      best_choice_ = choice_;
      return;
    }
    const DemandId d = order_[depth];
    const Demand& dem = model_.demand(d);
    for (NodeId k : detour_choices(dem, model_.node_count())) {
      SegmentList path = two_segment_path(dem, k);
      model_.add_path(d, path, 1.0);
      choice_[d] = k;
      search(depth + 1);
      model_.add_path(d, path, -1.0);
      if (!complete_) break;
    }
    choice_[d] = kNoDetour;
  }

  SrLoadModel& model_;
  BudgetTracker& tracker_;
  std::vector<DemandId> order_;
  std::vector<NodeId> choice_;
  std::vector<NodeId> best_choice_;
  double incumbent_ = std::numeric_limits<double>::infinity();
  bool complete_ = true;
};

}  // namespace detail

struct TwoSegmentResult {
  RoutingConfiguration routing;
  bool complete = true;  // exact mode proved optimality within the budget
};

inline TwoSegmentResult solve_sr_two_segment_detailed(
    const Setting& setting, const SolverBudget& budget, TwoSegmentMode mode) {
  if (mode == TwoSegmentMode::kExactTiny &&
      (setting.topology.node_count() > kExactTinyMaxNodes ||
       setting.traffic.size() > kExactTinyMaxDemands)) {
    throw std::invalid_argument(
        "instance too large for exact mode (at most " +
        std::to_string(kExactTinyMaxNodes) + " nodes and " +
        std::to_string(kExactTinyMaxDemands) + " demands)");
  }
  BudgetTracker tracker(budget);
  if (tracker.exhausted()) return {setting.routing, false};

  detail::SrLoadModel model(setting);
  const DemandId count = setting.traffic.size();
  std::vector<NodeId> choice(count, detail::kNoDetour);
  bool complete = true;

  if (mode == TwoSegmentMode::kExactTiny) {
    detail::TwoSegmentExact exact(model, tracker);
    complete = exact.run();
    choice = exact.best_choice();
  } else {
    const std::vector<DemandId> order =
        detail::by_volume_descending(setting.traffic, model.eligible());
    for (DemandId d : order) {
      model.add_path(d, detail::two_segment_path(model.demand(d), choice[d]),
                     1.0);
    }
    Objective current = model.objective();
    while (!tracker.exhausted()) {
      DemandId best_d = -1;
      NodeId best_k = detail::kNoDetour;
      Objective best = current;
      for (DemandId d : order) {
        const Demand& dem = model.demand(d);
        if (dem.volume == 0) continue;
        const SegmentList old_path = detail::two_segment_path(dem, choice[d]);
        for (NodeId k : detail::detour_choices(dem, model.node_count())) {
          if (k == choice[d]) continue;
          if (tracker.exhausted()) break;
          const SegmentList path = detail::two_segment_path(dem, k);
          model.add_path(d, old_path, -1.0);
          model.add_path(d, path, 1.0);
          const Objective o = model.objective();
          model.add_path(d, path, -1.0);
          model.add_path(d, old_path, 1.0);
          if (o.better_than(best)) {
            best = o;
            best_d = d;
            best_k = k;
          }
        }
      }
      tracker.spend();
      if (best_d < 0) break;
      const Demand& dem = model.demand(best_d);
      model.add_path(best_d, detail::two_segment_path(dem, choice[best_d]), -1.0);
      choice[best_d] = best_k;
      model.add_path(best_d, detail::two_segment_path(dem, best_k), 1.0);
      current = model.objective();
    }
  }

  std::vector<SegmentList> paths(count);
  for (DemandId d : model.eligible()) {
    paths[d] = detail::two_segment_path(model.demand(d), choice[d]);
  }
  return {never_worse(setting,
                      detail::routing_from_paths(setting, model.eligible(), paths)),
          complete};
}

inline RoutingConfiguration solve_sr_two_segment(const Setting& setting,
                                                 const SolverBudget& budget,
                                                 TwoSegmentMode mode) {
  return solve_sr_two_segment_detailed(setting, budget, mode).routing;
}

}  // namespace repetita
