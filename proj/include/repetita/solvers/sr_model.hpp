#pragma once

// Incremental load bookkeeping for segment-routing searches. Loads are kept
// as a dense per-edge vector; each demand contributes volume * ecmp for every
// consecutive pair of its segment list. Demands pinned to explicit paths are
// folded into a fixed base load and never touched.

#include <algorithm>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/routing.hpp"
#include "repetita/solvers/budget.hpp"

namespace repetita::detail {

class SrLoadModel {
 public:
  explicit SrLoadModel(const Setting& setting)
      : setting_(setting),
        state_(setting.topology, setting.routing.weights),
        ecmp_(state_),
        capacity_(setting.topology.capacities()),
        base_(explicit_load(setting.topology, setting.traffic, setting.routing)
                  .load),
        load_(base_) {
    for (DemandId d = 0; d < setting.traffic.size(); ++d) {
      if (!setting.routing.explicit_paths.contains(d)) eligible_.push_back(d);
    }
  }

  const Setting& setting() const { return setting_; }
  const ForwardingState& state() const { return state_; }
  const std::vector<DemandId>& eligible() const { return eligible_; }
  NodeId node_count() const { return setting_.topology.node_count(); }
  const Demand& demand(DemandId d) const { return setting_.traffic.demands[d]; }
  const std::vector<double>& load() const { return load_; }
  const std::vector<double>& capacity() const { return capacity_; }

  // Adds `sign * volume` routed over the stitched segments.
  void add_path(DemandId d, const SegmentList& segments, double sign) {
    const double v = sign * demand(d).volume;
    if (v == 0) return;
    for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
      add_pair(segments[i], segments[i + 1], v);
    }
  }

  void add_pair(NodeId a, NodeId b, double volume) {
    for (const auto& [e, f] : ecmp_(a, b)) load_[e] += volume * f;
  }

  bool pair_touches(NodeId a, NodeId b, EdgeId edge) const {
    const auto& fr = ecmp_(a, b);
    return std::any_of(fr.begin(), fr.end(),
                       [edge](const auto& p) { return p.first == edge; });
  }

  // Rebuilds the dense load from scratch, dropping accumulated rounding.
  void reset(const std::vector<SegmentList>& paths) {
    load_ = base_;
    for (DemandId d : eligible_) add_path(d, paths[d], 1.0);
  }

  Objective objective() const { return evaluate_objective(load_, capacity_); }

  EdgeId max_edge() const {
    EdgeId best = 0;
    double best_u = -1;
    for (EdgeId e = 0; e < static_cast<EdgeId>(load_.size()); ++e) {
      const double u = load_[e] / capacity_[e];
      if (u > best_u) {
        best_u = u;
        best = e;
      }
    }
    return best;
  }

  // Segment list actually used by demand d: its configured list, or the
  // plain (src, dst) pair.
  SegmentList current_path(DemandId d) const {
    auto it = setting_.routing.sr_segments.find(d);
    if (it != setting_.routing.sr_segments.end()) return it->second;
    return {demand(d).src, demand(d).dst};
  }

 private:
  const Setting& setting_;
  ForwardingState state_;
  EcmpTable ecmp_;
  std::vector<double> capacity_;
  std::vector<double> base_;
  std::vector<double> load_;
  std::vector<DemandId> eligible_;
};

// Routing configuration with `paths` as segment lists; two-node lists mean
// plain IGP and are not stored.
inline RoutingConfiguration routing_from_paths(
    const Setting& setting, const std::vector<DemandId>& eligible,
    const std::vector<SegmentList>& paths) {
  RoutingConfiguration out = setting.routing;
  for (DemandId d : eligible) {
    out.sr_segments.erase(d);
    if (paths[d].size() > 2) out.sr_segments[d] = paths[d];
  }
  return out;
}

// Eligible demands ordered by decreasing volume, ties by index.
inline std::vector<DemandId> by_volume_descending(
    const TrafficMatrix& tm, std::vector<DemandId> demands) {
  std::stable_sort(demands.begin(), demands.end(),
                   [&tm](DemandId a, DemandId b) {
                     return tm.demands[a].volume > tm.demands[b].volume;
                   });
  return demands;
}

}  // namespace repetita::detail
