#pragma once

// Domain types shared by every part of the framework: topologies, traffic
// matrices, routing configurations, settings and result records.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace repetita {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;
using DemandId = std::int32_t;
using Weight = std::int64_t;

inline constexpr Weight kDefaultMaxWeight = 10000;

struct Node {
  std::string label;
  double x = 0;
  double y = 0;

  friend bool operator==(const Node&, const Node&) = default;
};

// A directed edge. Capacity is in kbps and delay in microseconds. A capacity
// of 0 marks a raw (unpreprocessed) edge whose capacity was not specified.
struct Edge {
  std::string label;
  NodeId src = 0;
  NodeId dst = 0;
  Weight weight = 1;
  double capacity = 0;
  double delay = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed graph. Adjacency lists are built once at construction; the object
// is not mutated afterwards.
class Topology {
 public:
  Topology() = default;
  Topology(std::vector<Node> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    out_.resize(nodes_.size());
    in_.resize(nodes_.size());
    for (EdgeId e = 0; e < edge_count(); ++e) {
      const Edge& edge = edges_[e];
      if (edge.src < 0 || edge.src >= node_count() || edge.dst < 0 ||
          edge.dst >= node_count()) {
        throw std::invalid_argument("edge " + edge.label +
                                    " references an unknown node");
      }
      out_[edge.src].push_back(e);
      in_[edge.dst].push_back(e);
    }
  }

  NodeId node_count() const { return static_cast<NodeId>(nodes_.size()); }
  EdgeId edge_count() const { return static_cast<EdgeId>(edges_.size()); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeId n) const { return nodes_[n]; }
  const Edge& edge(EdgeId e) const { return edges_[e]; }
  const std::vector<EdgeId>& out_edges(NodeId n) const { return out_[n]; }
  const std::vector<EdgeId>& in_edges(NodeId n) const { return in_[n]; }

  std::vector<Weight> weights() const {
    std::vector<Weight> out;
    out.reserve(edges_.size());
    for (const Edge& e : edges_) out.push_back(e.weight);
    return out;
  }

  std::vector<double> capacities() const {
    std::vector<double> out;
    out.reserve(edges_.size());
    for (const Edge& e : edges_) out.push_back(e.capacity);
    return out;
  }

  // Lowest-index edge from `src` to `dst`, if any.
  std::optional<EdgeId> find_edge(NodeId src, NodeId dst) const {
    for (EdgeId e : out_[src]) {
      if (edges_[e].dst == dst) return e;
    }
    return std::nullopt;
  }

  std::optional<NodeId> find_node(const std::string& label) const {
    for (NodeId n = 0; n < node_count(); ++n) {
      if (nodes_[n].label == label) return n;
    }
    return std::nullopt;
  }

  friend bool operator==(const Topology& a, const Topology& b) {
    return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<std::vector<EdgeId>> in_;
};

struct Demand {
  std::string label;
  NodeId src = 0;
  NodeId dst = 0;
  double volume = 0;  // kbps

  friend bool operator==(const Demand&, const Demand&) = default;
};

struct TrafficMatrix {
  std::vector<Demand> demands;

  DemandId size() const { return static_cast<DemandId>(demands.size()); }

  double total_volume() const {
    double total = 0;
    for (const Demand& d : demands) total += d.volume;
    return total;
  }

  TrafficMatrix scaled(double factor) const {
    TrafficMatrix out = *this;
    for (Demand& d : out.demands) d.volume *= factor;
    return out;
  }

  friend bool operator==(const TrafficMatrix&, const TrafficMatrix&) = default;
};

using SegmentList = std::vector<NodeId>;
using EdgePath = std::vector<EdgeId>;

// Explicit paths override segment lists, which override plain IGP routing.
struct RoutingConfiguration {
  std::vector<Weight> weights;
  std::map<DemandId, SegmentList> sr_segments;
  std::map<DemandId, std::vector<EdgePath>> explicit_paths;

  friend bool operator==(const RoutingConfiguration&,
                         const RoutingConfiguration&) = default;
};

enum class ForwardingMode { kIgp, kSegments, kExplicit };

inline ForwardingMode forwarding_mode(const RoutingConfiguration& routing,
                                      DemandId d) {
  if (routing.explicit_paths.contains(d)) return ForwardingMode::kExplicit;
  if (routing.sr_segments.contains(d)) return ForwardingMode::kSegments;
  return ForwardingMode::kIgp;
}

struct Setting {
  std::string id;
  Topology topology;
  TrafficMatrix traffic;
  RoutingConfiguration routing;

  friend bool operator==(const Setting&, const Setting&) = default;
};

// Setting whose routing starts from the topology's configured weights.
inline Setting make_setting(Topology topology, TrafficMatrix traffic,
                            std::string id = {}) {
  Setting s{std::move(id), std::move(topology), std::move(traffic), {}};
  s.routing.weights = s.topology.weights();
  return s;
}

inline Setting with_routing(const Setting& setting,
                            RoutingConfiguration routing) {
  Setting out = setting;
  out.routing = std::move(routing);
  return out;
}

struct OverheadCounters {
  std::int64_t changed_weights = 0;
  std::int64_t rerouted_sr_demands = 0;
  double rerouted_sr_demands_fraction = 0;
  std::int64_t modified_explicit_paths = 0;

  friend bool operator==(const OverheadCounters&,
                         const OverheadCounters&) = default;
};

struct FailureRecord {
  std::string link;  // label of the first directed edge of the failed link
  double post_failure_utilization = 0;
  double post_failure_bound = 0;
  bool congested = false;
};

struct ScenarioRecord {
  std::string scenario;
  std::string solver;
  std::string setting_id;
  double pre_max_utilization = 0;
  double post_max_utilization = 0;
  double lower_bound = 0;
  std::int64_t solve_time_ms = 0;
  std::optional<OverheadCounters> overhead;
  std::optional<std::vector<FailureRecord>> failures;
  bool failed = false;
  bool truncated = false;
  std::string error;
};

struct Percentiles {
  double min = 0;
  double p25 = 0;
  double median = 0;
  double p75 = 0;
  double max = 0;
};

struct FailureCounts {
  std::int64_t evaluated = 0;
  std::int64_t congested = 0;
  // Failures where even the optimal fractional routing exceeds capacity.
  std::int64_t congested_bound = 0;
};

// Post max-utilization statistics (MaxCongestion) and failure counts
// (Robustness), whichever applies.
struct ScenarioSummary {
  std::optional<Percentiles> post_utilization;
  std::optional<FailureCounts> failures;
};

struct ScenarioReport {
  std::vector<ScenarioRecord> records;
  std::optional<ScenarioSummary> summary;
};

namespace detail {

inline bool is_connected_path(const Topology& topo, const EdgePath& path,
                              NodeId src, NodeId dst) {
  if (path.empty()) return false;
  NodeId at = src;
  for (EdgeId e : path) {
    if (e < 0 || e >= topo.edge_count()) return false;
    if (topo.edge(e).src != at) return false;
    at = topo.edge(e).dst;
  }
  return at == dst;
}

inline bool visits_node_twice(const Topology& topo, const EdgePath& path) {
  if (path.empty()) return false;
  std::vector<bool> seen(topo.node_count(), false);
  seen[topo.edge(path.front()).src] = true;
  for (EdgeId e : path) {
    NodeId n = topo.edge(e).dst;
    if (seen[n]) return true;
    seen[n] = true;
  }
  return false;
}

}  // namespace detail

// Returns one human-readable entry per broken invariant; empty means valid.
inline std::vector<std::string> validate_setting(const Setting& setting) {
  std::vector<std::string> out;
  const Topology& topo = setting.topology;
  const NodeId n = topo.node_count();
  auto valid_node = [n](NodeId v) { return v >= 0 && v < n; };

  for (const Edge& e : topo.edges()) {
    if (!valid_node(e.src) || !valid_node(e.dst)) {
      out.push_back("edge " + e.label + ": dangling node index");
      continue;
    }
    if (e.src == e.dst) out.push_back("edge " + e.label + ": src equals dst");
    if (e.weight < 1) out.push_back("edge " + e.label + ": weight below 1");
    if (!(e.capacity > 0)) {
      out.push_back("edge " + e.label + ": capacity not positive");
    }
    if (e.delay < 0) out.push_back("edge " + e.label + ": negative delay");
  }

  const auto& demands = setting.traffic.demands;
  // Several demands may share a pair in memory; only the parser aggregates.
  for (const Demand& d : demands) {
    if (!valid_node(d.src) || !valid_node(d.dst)) {
      out.push_back("demand " + d.label + ": dangling node index");
      continue;
    }
    if (d.src == d.dst) out.push_back("demand " + d.label + ": src equals dst");
    if (!(d.volume >= 0)) {
      out.push_back("demand " + d.label + ": negative volume");
    }
  }

  const RoutingConfiguration& r = setting.routing;
  if (static_cast<EdgeId>(r.weights.size()) != topo.edge_count()) {
    out.push_back("routing: weight count differs from edge count");
  } else {
    for (EdgeId e = 0; e < topo.edge_count(); ++e) {
      if (r.weights[e] < 1) {
        out.push_back("edge " + topo.edge(e).label + ": routing weight below 1");
      }
    }
  }

  auto demand_name = [&](DemandId d) {
    if (d >= 0 && d < setting.traffic.size()) return demands[d].label;
    return std::to_string(d);
  };

  for (const auto& [d, segments] : r.sr_segments) {
    const std::string who = "demand " + demand_name(d);
    if (d < 0 || d >= setting.traffic.size()) {
      out.push_back(who + ": segment list for unknown demand");
      continue;
    }
    if (r.explicit_paths.contains(d)) {
      out.push_back(who + ": has both segments and explicit paths");
    }
    if (segments.size() < 2) {
      out.push_back(who + ": segment list shorter than 2");
      continue;
    }
    bool nodes_ok = true;
    for (NodeId v : segments) nodes_ok = nodes_ok && valid_node(v);
    if (!nodes_ok) {
      out.push_back(who + ": segment references unknown node");
      continue;
    }
    if (segments.front() != demands[d].src || segments.back() != demands[d].dst) {
      out.push_back(who + ": segment endpoints differ from demand endpoints");
    }
    for (std::size_t i = 1; i < segments.size(); ++i) {
      if (segments[i] == segments[i - 1]) {
        out.push_back(who + ": consecutive segments coincide");
        break;
      }
    }
  }

  for (const auto& [d, paths] : r.explicit_paths) {
    const std::string who = "demand " + demand_name(d);
    if (d < 0 || d >= setting.traffic.size()) {
      out.push_back(who + ": explicit paths for unknown demand");
      continue;
    }
    if (paths.empty()) out.push_back(who + ": empty explicit path set");
    for (const EdgePath& p : paths) {
      if (!detail::is_connected_path(topo, p, demands[d].src, demands[d].dst)) {
        out.push_back(who + ": explicit path not connected from src to dst");
      } else if (detail::visits_node_twice(topo, p)) {
        out.push_back(who + ": explicit path is not acyclic");
      }
    }
  }
  return out;
}

}  // namespace repetita
