#pragma once

// Lower bound on the maximum link utilization: the destination-aggregated
// multi-commodity flow LP
//
//   min U  s.t.  sum_out load^t - sum_in load^t = T_it   (i != t)
//                sum_t load^t(e) <= c(e) U
//
// solved approximately with a multiplicative-weights concurrent-flow scheme.
// Every phase routes all demands along shortest-path trees under exponential
// edge lengths. The averaged flow is a feasible routing (an upper bound on
// U*), and every length function l certifies the lower bound
//   sum_it T_it dist_l(i, t) / sum_e c(e) l(e)  <=  U*.
// The loop stops once the two are within a factor (1 + epsilon).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "repetita/core.hpp"

namespace repetita {

inline constexpr double kDefaultLpEpsilon = 0.01;
inline constexpr double kDefaultTargetUtilization = 0.9;

struct McfSolution {
  double lower_bound = 0;  // certified: lower_bound <= U*
  double upper_bound = 0;  // max utilization of `flow`
  double epsilon = 0;      // requested accuracy
  double achieved_epsilon = 0;  // upper_bound / lower_bound - 1
  bool converged = false;
  std::int64_t phases = 0;
  // flow[t][e]: traffic toward destination t carried by edge e (kbps).
  std::vector<std::vector<double>> flow;
};

struct McfOptions {
  double epsilon = kDefaultLpEpsilon;
  std::int64_t max_phases = 2'000'000;
};

namespace detail {

class DestinationTrees {
 public:
  explicit DestinationTrees(const Topology& topo)
      : topo_(topo),
        n_(topo.node_count()),
        dist_(n_),
        parent_(n_),
        order_(n_) {}

  // Shortest-path in-tree toward t under `length`. Ties keep the first
  // relaxation, scanning in-edges by increasing index.
  void build(NodeId t, const std::vector<double>& length) {
    std::fill(dist_.begin(), dist_.end(), kInf);
    std::fill(parent_.begin(), parent_.end(), -1);
    order_.clear();
    using Item = std::pair<double, NodeId>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist_[t] = 0;
    heap.push({0, t});
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d != dist_[v]) continue;
      order_.push_back(v);
      for (EdgeId e : topo_.in_edges(v)) {
        NodeId u = topo_.edge(e).src;
        double nd = d + length[e];
        if (nd < dist_[u]) {
          dist_[u] = nd;
          parent_[u] = e;
          heap.push({nd, u});
        }
      }
    }
  }

  double dist(NodeId u) const { return dist_[u]; }
  bool reached(NodeId u) const { return dist_[u] < kInf; }

  // Routes `volume` (indexed by node) along the current tree into `flow`.
  void route(const std::vector<double>& volume, std::vector<double>& at,
             std::vector<double>& flow) const {
    at = volume;
    std::fill(flow.begin(), flow.end(), 0.0);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      NodeId u = *it;
      EdgeId e = parent_[u];
      if (e < 0 || at[u] == 0) continue;
      flow[e] += at[u];
      at[topo_.edge(e).dst] += at[u];
    }
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  const Topology& topo_;
  NodeId n_;
  std::vector<double> dist_;
  std::vector<EdgeId> parent_;
  std::vector<NodeId> order_;
};

}  // namespace detail

inline McfSolution lp_lower_bound(const Topology& topo, const TrafficMatrix& tm,
                                  const McfOptions& options = {}) {
  const NodeId n = topo.node_count();
  const EdgeId m = topo.edge_count();
  if (!(options.epsilon > 0)) {
    throw std::invalid_argument("epsilon must be positive");
  }
  for (const Edge& e : topo.edges()) {
    if (!(e.capacity > 0)) {
      throw std::invalid_argument("edge " + e.label + " has no positive capacity");
    }
  }

  // demand[t][i] = T_it
  std::vector<std::vector<double>> demand(n, std::vector<double>(n, 0.0));
  double total = 0;
  for (const Demand& d : tm.demands) {
    if (d.src == d.dst) continue;
    demand[d.dst][d.src] += d.volume;
    total += d.volume;
  }
  McfSolution sol;
  sol.epsilon = options.epsilon;
  sol.flow.assign(n, std::vector<double>(m, 0.0));
  if (total == 0) {
    sol.converged = true;
    return sol;
  }
  std::vector<NodeId> dests;
  for (NodeId t = 0; t < n; ++t) {
    for (NodeId i = 0; i < n; ++i) {
      if (demand[t][i] > 0) {
        dests.push_back(t);
        break;
      }
    }
  }

  std::vector<double> cap = topo.capacities();
  std::vector<double> length(m);
  for (EdgeId e = 0; e < m; ++e) length[e] = 1.0 / cap[e];

  detail::DestinationTrees trees(topo);
  std::vector<double> at(n), tree_flow(m);

  // Normalize so that one phase roughly saturates the network; the step size
  // of the multiplicative update is relative to edge capacities.
  double scale = 0;
  {
    std::vector<double> load(m, 0.0);
    for (NodeId t : dests) {
      trees.build(t, length);
      for (NodeId i = 0; i < n; ++i) {
        if (demand[t][i] > 0 && !trees.reached(i)) {
          throw std::runtime_error("demand endpoints are disconnected");
        }
      }
      trees.route(demand[t], at, tree_flow);
      for (EdgeId e = 0; e < m; ++e) load[e] += tree_flow[e];
    }
    double u0 = 0;
    for (EdgeId e = 0; e < m; ++e) u0 = std::max(u0, load[e] / cap[e]);
    scale = 1.0 / u0;
  }

  // Step-size scaling: a large multiplicative step converges fast but only
  // to a coarse gap, so the step is halved (and the averaging restarted,
  // keeping the lengths as a warm start) whenever the averaged flow stops
  // improving.
  double step = 0.5;
  const double min_step = options.epsilon / 4;
  std::vector<std::vector<double>> acc(n, std::vector<double>(m, 0.0));
  std::vector<double> acc_total(m, 0.0);
  std::vector<double> remaining(n);
  double best_lb = 0;
  double best_ub = std::numeric_limits<double>::infinity();
  std::int64_t phase = 0;
  std::int64_t stage_phase = 0;
  std::int64_t stage_best_at = 0;
  double stage_best = std::numeric_limits<double>::infinity();

  auto dual_bound = [&]() {
    double num = 0;
    double den = 0;
    for (EdgeId e = 0; e < m; ++e) den += cap[e] * length[e];
    for (NodeId t : dests) {
      trees.build(t, length);
      for (NodeId i = 0; i < n; ++i) num += demand[t][i] * trees.dist(i);
    }
    return num / den;
  };

  best_lb = dual_bound();
  while (phase < options.max_phases) {
    for (NodeId t : dests) {
      for (NodeId i = 0; i < n; ++i) remaining[i] = demand[t][i] * scale;
      while (true) {
        trees.build(t, length);
        trees.route(remaining, at, tree_flow);
        double sigma = 1;
        for (EdgeId e = 0; e < m; ++e) {
          if (tree_flow[e] > cap[e]) {
            sigma = std::min(sigma, cap[e] / tree_flow[e]);
          }
        }
        for (EdgeId e = 0; e < m; ++e) {
          if (tree_flow[e] == 0) continue;
          const double f = sigma * tree_flow[e];
          acc[t][e] += f;
          acc_total[e] += f;
          length[e] *= 1 + step * f / cap[e];
        }
        if (sigma >= 1) break;
        for (double& r : remaining) r *= 1 - sigma;
      }
    }
    ++phase;
    ++stage_phase;

    const double per_phase = 1.0 / (static_cast<double>(stage_phase) * scale);
    double ub = 0;
    for (EdgeId e = 0; e < m; ++e) {
      ub = std::max(ub, acc_total[e] * per_phase / cap[e]);
    }
    best_lb = std::max(best_lb, dual_bound());
    if (ub < best_ub) {
      best_ub = ub;
      for (NodeId t : dests) {
        for (EdgeId e = 0; e < m; ++e) sol.flow[t][e] = acc[t][e] * per_phase;
      }
    }
    if (best_ub <= best_lb * (1 + options.epsilon)) {
      sol.converged = true;
      break;
    }
    if (ub < stage_best * (1 - step / 16)) {
      stage_best = ub;
      stage_best_at = stage_phase;
    } else if (step > min_step &&
               stage_phase - stage_best_at > static_cast<std::int64_t>(4 / step)) {
      step = std::max(min_step, step / 2);
      stage_phase = 0;
      stage_best_at = 0;
      stage_best = std::numeric_limits<double>::infinity();
      for (NodeId t : dests) std::fill(acc[t].begin(), acc[t].end(), 0.0);
      std::fill(acc_total.begin(), acc_total.end(), 0.0);
    }
    // Keep lengths in a sane numeric range.
    double max_len = 0;
    for (double l : length) max_len = std::max(max_len, l);
    for (double& l : length) l /= max_len;
  }
  sol.lower_bound = best_lb;
  sol.upper_bound = best_ub;
  sol.achieved_epsilon = best_ub / best_lb - 1;
  sol.phases = phase;
  return sol;
}

inline McfSolution lp_lower_bound(const Topology& topo, const TrafficMatrix& tm,
                                  double epsilon) {
  McfOptions options;
  options.epsilon = epsilon;
  return lp_lower_bound(topo, tm, options);
}

// Multiplies every volume by target / lower_bound(tm).
inline TrafficMatrix scale_traffic_matrix(
    const Topology& topo, const TrafficMatrix& tm,
    double target = kDefaultTargetUtilization,
    double epsilon = kDefaultLpEpsilon) {
  if (!(target > 0) || target > 1) {
    throw std::invalid_argument("target utilization must be in ]0, 1]");
  }
  if (!(tm.total_volume() > 0)) {
    throw std::invalid_argument("cannot scale a zero-volume traffic matrix");
  }
  McfSolution sol = lp_lower_bound(topo, tm, epsilon);
  return tm.scaled(target / sol.lower_bound);
}

}  // namespace repetita
