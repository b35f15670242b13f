#pragma once

// IGP shortest paths with ECMP splitting, and the per-edge loads induced by
// plain IGP routing, segment lists and explicit paths.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "repetita/core.hpp"

namespace repetita {

inline constexpr std::int64_t kUnreachable =
    std::numeric_limits<std::int64_t>::max();

// Sparse edge -> value map, sorted by edge index.
using SparseEdgeVector = std::vector<std::pair<EdgeId, double>>;

class ForwardingState {
 public:
  // distance(u, t) and the shortest-path DAG toward every destination t.
  ForwardingState(const Topology& topo, std::span<const Weight> weights)
      : n_(topo.node_count()), m_(topo.edge_count()) {
    if (static_cast<EdgeId>(weights.size()) != m_) {
      throw std::invalid_argument("weight count differs from edge count");
    }
    dist_.assign(static_cast<std::size_t>(n_) * n_, kUnreachable);
    order_.resize(n_);
    next_hops_.resize(static_cast<std::size_t>(n_) * n_);

    using Item = std::pair<std::int64_t, NodeId>;
    for (NodeId t = 0; t < n_; ++t) {
      std::int64_t* dist = &dist_[static_cast<std::size_t>(t) * n_];
      std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
      dist[t] = 0;
      heap.push({0, t});
      while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d != dist[v]) continue;
        for (EdgeId e : topo.in_edges(v)) {
          NodeId u = topo.edge(e).src;
          std::int64_t nd = d + weights[e];
          if (nd < dist[u]) {
            dist[u] = nd;
            heap.push({nd, u});
          }
        }
      }
      // Farthest first, so flow can be pushed toward t in a single sweep.
      auto& order = order_[t];
      for (NodeId v = 0; v < n_; ++v) {
        if (v != t && dist[v] != kUnreachable) order.push_back(v);
      }
      std::stable_sort(order.begin(), order.end(), [dist](NodeId a, NodeId b) {
        return dist[a] > dist[b];
      });
      for (NodeId u : order) {
        auto& hops = next_hops_[index(u, t)];
        for (EdgeId e : topo.out_edges(u)) {
          NodeId v = topo.edge(e).dst;
          if (dist[v] != kUnreachable && dist[v] + weights[e] == dist[u]) {
            hops.push_back(e);
          }
        }
      }
    }
    dst_.resize(m_);
    for (EdgeId e = 0; e < m_; ++e) dst_[e] = topo.edge(e).dst;
  }

  NodeId node_count() const { return n_; }
  EdgeId edge_count() const { return m_; }

  std::int64_t distance(NodeId u, NodeId t) const {
    return dist_[static_cast<std::size_t>(t) * n_ + u];
  }

  bool reachable(NodeId u, NodeId t) const {
    return distance(u, t) != kUnreachable;
  }

  // Edges leaving u that lie on a shortest path toward t.
  const std::vector<EdgeId>& next_hops(NodeId u, NodeId t) const {
    return next_hops_[index(u, t)];
  }

  // Pushes per-source volumes toward `t`, splitting evenly among next hops at
  // every node; adds the result into `load`. `volume_at` is indexed by node
  // and is consumed (left holding transit volumes).
  void propagate(NodeId t, std::vector<double>& volume_at,
                 std::span<double> load) const {
    for (NodeId u : order_[t]) {
      double v = volume_at[u];
      if (v == 0) continue;
      const auto& hops = next_hops_[index(u, t)];
      const double share = v / static_cast<double>(hops.size());
      for (EdgeId e : hops) {
        load[e] += share;
        volume_at[dst_[e]] += share;
      }
    }
  }

  // ecmp_ij(e): load on each edge when one unit is routed from i to j.
  SparseEdgeVector ecmp_fraction(NodeId i, NodeId j) const {
    SparseEdgeVector out;
    if (i == j) return out;
    if (!reachable(i, j)) {
      throw std::runtime_error("destination " + std::to_string(j) +
                               " unreachable from " + std::to_string(i));
    }
    std::vector<double> volume(n_, 0.0);
    std::vector<double> load(m_, 0.0);
    volume[i] = 1.0;
    propagate(j, volume, load);
    for (EdgeId e = 0; e < m_; ++e) {
      if (load[e] > 0) out.emplace_back(e, load[e]);
    }
    return out;
  }

 private:
  std::size_t index(NodeId u, NodeId t) const {
    return static_cast<std::size_t>(t) * n_ + u;
  }

  NodeId n_;
  EdgeId m_;
  std::vector<NodeId> dst_;
  std::vector<std::int64_t> dist_;
  std::vector<std::vector<NodeId>> order_;
  std::vector<std::vector<EdgeId>> next_hops_;
};

inline ForwardingState compute_forwarding_state(
    const Topology& topo, std::span<const Weight> weights) {
  return ForwardingState(topo, weights);
}

// All-pairs ECMP fractions, computed once for solvers that evaluate many
// alternative segment choices.
class EcmpTable {
 public:
  explicit EcmpTable(const ForwardingState& state) : n_(state.node_count()) {
    table_.resize(static_cast<std::size_t>(n_) * n_);
    for (NodeId i = 0; i < n_; ++i) {
      for (NodeId j = 0; j < n_; ++j) {
        if (i != j && state.reachable(i, j)) {
          table_[static_cast<std::size_t>(i) * n_ + j] =
              state.ecmp_fraction(i, j);
        }
      }
    }
  }

  const SparseEdgeVector& operator()(NodeId i, NodeId j) const {
    return table_[static_cast<std::size_t>(i) * n_ + j];
  }

 private:
  NodeId n_;
  std::vector<SparseEdgeVector> table_;
};

struct LoadVector {
  std::vector<double> load;         // kbps
  std::vector<double> utilization;  // load / capacity
  double max_utilization = 0;
  EdgeId max_edge = -1;  // lowest-index edge attaining the maximum

  static LoadVector from_loads(const Topology& topo, std::vector<double> load) {
    LoadVector out;
    out.utilization.resize(load.size());
    for (EdgeId e = 0; e < static_cast<EdgeId>(load.size()); ++e) {
      out.utilization[e] = load[e] / topo.edge(e).capacity;
      if (out.max_edge == -1 || out.utilization[e] > out.max_utilization) {
        out.max_utilization = out.utilization[e];
        out.max_edge = e;
      }
    }
    out.load = std::move(load);
    return out;
  }
};

namespace detail {

// Volume routed from i to j under ECMP, aggregated per destination.
class PairVolumes {
 public:
  explicit PairVolumes(NodeId n)
      : n_(n), volume_(static_cast<std::size_t>(n) * n, 0.0) {}

  void add(NodeId i, NodeId j, double v) {
    if (i == j || v == 0) return;
    volume_[static_cast<std::size_t>(j) * n_ + i] += v;
  }

  void route(const ForwardingState& state, std::span<double> load) const {
    std::vector<double> at(n_);
    for (NodeId t = 0; t < n_; ++t) {
      const double* row = &volume_[static_cast<std::size_t>(t) * n_];
      bool any = false;
      for (NodeId i = 0; i < n_; ++i) {
        at[i] = row[i];
        if (row[i] != 0) {
          any = true;
          if (!state.reachable(i, t)) {
            throw std::runtime_error("destination " + std::to_string(t) +
                                     " unreachable from " + std::to_string(i));
          }
        }
      }
      if (any) state.propagate(t, at, load);
    }
  }

 private:
  NodeId n_;
  std::vector<double> volume_;
};

inline void check_segments(const SegmentList& segments) {
  for (std::size_t m = 1; m < segments.size(); ++m) {
    if (segments[m] == segments[m - 1]) {
      throw std::invalid_argument("segment list has coinciding consecutive nodes");
    }
  }
}

}  // namespace detail

// load(e) = sum over demands of volume * ecmp_{src,dst}(e).
inline LoadVector igp_load(const Topology& topo, const ForwardingState& state,
                           const TrafficMatrix& tm) {
  detail::PairVolumes pv(state.node_count());
  for (const Demand& d : tm.demands) pv.add(d.src, d.dst, d.volume);
  std::vector<double> load(state.edge_count(), 0.0);
  pv.route(state, load);
  return LoadVector::from_loads(topo, std::move(load));
}

// Demands with segment lists are routed over the stitched shortest paths,
// demands without any entry over plain IGP; explicit-path demands are left out.
inline LoadVector sr_load(const Topology& topo, const ForwardingState& state,
                          const TrafficMatrix& tm,
                          const RoutingConfiguration& routing) {
  detail::PairVolumes pv(state.node_count());
  for (DemandId d = 0; d < tm.size(); ++d) {
    const Demand& dem = tm.demands[d];
    if (routing.explicit_paths.contains(d)) continue;
    auto it = routing.sr_segments.find(d);
    if (it == routing.sr_segments.end()) {
      pv.add(dem.src, dem.dst, dem.volume);
      continue;
    }
    const SegmentList& seg = it->second;
    detail::check_segments(seg);
    for (std::size_t m = 0; m + 1 < seg.size(); ++m) {
      pv.add(seg[m], seg[m + 1], dem.volume);
    }
  }
  std::vector<double> load(state.edge_count(), 0.0);
  pv.route(state, load);
  return LoadVector::from_loads(topo, std::move(load));
}

// Explicit-path demands only: each demand's volume is split evenly over its
// listed paths.
inline LoadVector explicit_load(const Topology& topo, const TrafficMatrix& tm,
                                const RoutingConfiguration& routing) {
  std::vector<double> load(topo.edge_count(), 0.0);
  for (const auto& [d, paths] : routing.explicit_paths) {
    if (d < 0 || d >= tm.size()) {
      throw std::invalid_argument("explicit paths for unknown demand");
    }
    const Demand& dem = tm.demands[d];
    if (paths.empty()) {
      throw std::invalid_argument("demand " + dem.label +
                                  ": empty explicit path set");
    }
    const double share = dem.volume / static_cast<double>(paths.size());
    for (const EdgePath& p : paths) {
      if (!detail::is_connected_path(topo, p, dem.src, dem.dst)) {
        throw std::invalid_argument("demand " + dem.label +
                                    ": explicit path is not connected src->dst");
      }
      for (EdgeId e : p) load[e] += share;
    }
  }
  return LoadVector::from_loads(topo, std::move(load));
}

inline LoadVector total_load(const Topology& topo, const ForwardingState& state,
                             const TrafficMatrix& tm,
                             const RoutingConfiguration& routing) {
  LoadVector sr = sr_load(topo, state, tm, routing);
  if (routing.explicit_paths.empty()) return sr;
  LoadVector ex = explicit_load(topo, tm, routing);
  for (std::size_t e = 0; e < sr.load.size(); ++e) sr.load[e] += ex.load[e];
  return LoadVector::from_loads(topo, std::move(sr.load));
}

inline LoadVector total_load(const Setting& setting) {
  ForwardingState state(setting.topology, setting.routing.weights);
  return total_load(setting.topology, state, setting.traffic, setting.routing);
}

inline double max_utilization(const Setting& setting) {
  return total_load(setting).max_utilization;
}

}  // namespace repetita
