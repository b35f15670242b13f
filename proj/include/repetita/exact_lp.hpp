#pragma once

// Exact solution of the destination-aggregated min-max-utilization LP with a
// dense two-phase tableau simplex. Meant for tiny instances (a handful of
// nodes), where it serves as ground truth for the approximation scheme.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "repetita/core.hpp"

namespace repetita {

inline constexpr NodeId kExactLpMaxNodes = 6;

struct DenseLpResult {
  bool feasible = false;
  double objective = 0;
  std::vector<double> x;
};

// min c.x  s.t.  A x = b, x >= 0. Bland's rule, so degenerate pivots cannot
// cycle.
inline DenseLpResult solve_dense_lp(std::vector<std::vector<double>> a,
                                    std::vector<double> b,
                                    const std::vector<double>& c) {
  constexpr double kTol = 1e-9;
  const std::size_t rows = a.size();
  const std::size_t cols = c.size();
  for (std::size_t r = 0; r < rows; ++r) {
    if (b[r] < 0) {
      for (double& v : a[r]) v = -v;
      b[r] = -b[r];
    }
  }
  // Tableau: [A | I_art | b], one artificial per row.
  const std::size_t width = cols + rows + 1;
  std::vector<std::vector<double>> t(rows, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) t[r][j] = a[r][j];
    t[r][cols + r] = 1;
    t[r][width - 1] = b[r];
    basis[r] = cols + r;
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double p = t[pr][pc];
    for (double& v : t[pr]) v /= p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = t[r][pc];
      if (f == 0) continue;
      for (std::size_t j = 0; j < width; ++j) t[r][j] -= f * t[pr][j];
    }
    basis[pr] = pc;
  };

  // Runs simplex for objective `cost` over columns [0, allowed).
  auto run = [&](const std::vector<double>& cost, std::size_t allowed) {
    while (true) {
      // Reduced costs.
      std::size_t enter = width;
      for (std::size_t j = 0; j < allowed; ++j) {
        double rc = j < cost.size() ? cost[j] : 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
          const double cb = basis[r] < cost.size() ? cost[basis[r]] : 0.0;
          rc -= cb * t[r][j];
        }
        if (rc < -kTol) {
          enter = j;
          break;
        }
      }
      if (enter == width) return true;
      std::size_t leave = rows;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        if (t[r][enter] > kTol) {
          const double ratio = t[r][width - 1] / t[r][enter];
          if (ratio < best - kTol ||
              (ratio <= best + kTol && leave < rows && basis[r] < basis[leave])) {
            best = ratio;
            leave = r;
          }
        }
      }
      if (leave == rows) return false;  // unbounded
      pivot(leave, enter);
    }
  };

  std::vector<double> phase1(cols + rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) phase1[cols + r] = 1;
  run(phase1, cols + rows);
  double infeasibility = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] >= cols) infeasibility += t[r][width - 1];
  }
  DenseLpResult result;
  if (infeasibility > 1e-7) return result;
  // Drive remaining (zero-valued) artificials out of the basis.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < cols) continue;
    for (std::size_t j = 0; j < cols; ++j) {
      if (std::abs(t[r][j]) > kTol) {
        pivot(r, j);
        break;
      }
    }
  }
  if (!run(c, cols)) {
    throw std::runtime_error("unbounded LP");
  }
  result.feasible = true;
  result.x.assign(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < cols) result.x[basis[r]] = t[r][width - 1];
  }
  for (std::size_t j = 0; j < cols; ++j) result.objective += c[j] * result.x[j];
  return result;
}

// Exact U* for tiny topologies (at most kExactLpMaxNodes nodes).
inline double exact_lp_lower_bound(const Topology& topo,
                                   const TrafficMatrix& tm) {
  const NodeId n = topo.node_count();
  const EdgeId m = topo.edge_count();
  if (n > kExactLpMaxNodes) {
    throw std::invalid_argument("exact LP is limited to tiny topologies");
  }
  std::vector<std::vector<double>> demand(n, std::vector<double>(n, 0.0));
  std::vector<NodeId> dests;
  for (const Demand& d : tm.demands) {
    if (d.src != d.dst) demand[d.dst][d.src] += d.volume;
  }
  for (NodeId t = 0; t < n; ++t) {
    for (NodeId i = 0; i < n; ++i) {
      if (demand[t][i] > 0) {
        dests.push_back(t);
        break;
      }
    }
  }
  if (dests.empty()) return 0;

  // Columns: flow[k][e] for the k-th destination, then U, then one slack per
  // edge.
  const std::size_t k_count = dests.size();
  const std::size_t u_col = k_count * m;
  const std::size_t cols = u_col + 1 + m;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t k = 0; k < k_count; ++k) {
    const NodeId t = dests[k];
    for (NodeId i = 0; i < n; ++i) {
      if (i == t) continue;
      std::vector<double> row(cols, 0.0);
      for (EdgeId e : topo.out_edges(i)) row[k * m + e] += 1;
      for (EdgeId e : topo.in_edges(i)) row[k * m + e] -= 1;
      a.push_back(std::move(row));
      b.push_back(demand[t][i]);
    }
  }
  for (EdgeId e = 0; e < m; ++e) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t k = 0; k < k_count; ++k) row[k * m + e] = 1;
    row[u_col] = -topo.edge(e).capacity;
    row[u_col + 1 + e] = 1;
    a.push_back(std::move(row));
    b.push_back(0);
  }
  std::vector<double> c(cols, 0.0);
  c[u_col] = 1;
  DenseLpResult r = solve_dense_lp(std::move(a), std::move(b), c);
  if (!r.feasible) throw std::runtime_error("infeasible multi-commodity flow");
  return r.objective;
}

}  // namespace repetita
