#pragma once

// Writes the one-detour segment-routing MILP in CPLEX LP text format:
//
//   min U
//   sum_k p_i_k_j = 1                                  for all i != j
//   s1_i_k - sum_j T_ij p_i_k_j = 0                    for all i != k
//   s2_k_j - sum_i T_ij p_i_k_j = 0  (i != k)          for all k != j
//   sum_ij ecmp_ij(e) (s1_i_j + s2_i_j) - c(e) U <= 0  for all e
//   p binary
//
// k ranges over V \ {i}; k = j is the plain IGP path. Grouping traffic by
// first and second step keeps O(|V|^2 |E|) nonzeros instead of O(|V|^3 |E|).

#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/io.hpp"
#include "repetita/routing.hpp"

namespace repetita {

namespace detail {

inline std::string path_var(NodeId i, NodeId k, NodeId j) {
  return "p_" + std::to_string(i) + "_" + std::to_string(k) + "_" +
         std::to_string(j);
}
inline std::string step1_var(NodeId i, NodeId j) {
  return "s1_" + std::to_string(i) + "_" + std::to_string(j);
}
inline std::string step2_var(NodeId i, NodeId j) {
  return "s2_" + std::to_string(i) + "_" + std::to_string(j);
}

// Accumulates "+ c x" terms and wraps long rows.
class LpRow {
 public:
  explicit LpRow(std::ostream& out, const std::string& name) : out_(out) {
    out_ << " " << name << ":";
  }

  void term(double coef, const std::string& var) {
    if (coef == 0) return;
    if (terms_ > 0 && terms_ % 6 == 0) out_ << "\n  ";
    out_ << (coef < 0 ? " - " : (terms_ > 0 ? " + " : " "));
    const double mag = coef < 0 ? -coef : coef;
    if (mag != 1) out_ << format_number(mag) << " ";
    out_ << var;
    ++terms_;
  }

  void finish(const char* sense, double rhs) {
    out_ << " " << sense << " " << format_number(rhs) << "\n";
  }

 private:
  std::ostream& out_;
  int terms_ = 0;
};

}  // namespace detail

inline void export_milp(std::ostream& out, const Setting& setting) {
  const Topology& topo = setting.topology;
  const NodeId n = topo.node_count();
  ForwardingState state(topo, setting.routing.weights);
  EcmpTable ecmp(state);

  std::vector<std::vector<double>> traffic(n, std::vector<double>(n, 0.0));
  for (const Demand& d : setting.traffic.demands) {
    if (d.src != d.dst) traffic[d.src][d.dst] += d.volume;
  }

  out << "\\ Segment routing, at most one detour per demand\n";
  out << "\\ nodes " << n << " edges " << topo.edge_count() << " demands "
      << setting.traffic.size() << "\n";
  out << "Minimize\n obj: U\nSubject To\n";

  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      detail::LpRow row(out, "choice_" + std::to_string(i) + "_" +
                                 std::to_string(j));
      for (NodeId k = 0; k < n; ++k) {
        if (k != i) row.term(1, detail::path_var(i, k, j));
      }
      row.finish("=", 1);
    }
  }
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId k = 0; k < n; ++k) {
      if (i == k) continue;
      detail::LpRow row(out, "step1_" + std::to_string(i) + "_" +
                                 std::to_string(k));
      row.term(1, detail::step1_var(i, k));
      for (NodeId j = 0; j < n; ++j) {
        if (j != i) row.term(-traffic[i][j], detail::path_var(i, k, j));
      }
      row.finish("=", 0);
    }
  }
  for (NodeId k = 0; k < n; ++k) {
    for (NodeId j = 0; j < n; ++j) {
      if (k == j) continue;
      detail::LpRow row(out, "step2_" + std::to_string(k) + "_" +
                                 std::to_string(j));
      row.term(1, detail::step2_var(k, j));
      for (NodeId i = 0; i < n; ++i) {
        if (i != k && i != j) row.term(-traffic[i][j], detail::path_var(i, k, j));
      }
      row.finish("=", 0);
    }
  }
  // Capacity rows: gather ecmp coefficients per edge.
  std::vector<std::vector<std::pair<std::pair<NodeId, NodeId>, double>>> by_edge(
      topo.edge_count());
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      for (const auto& [e, f] : ecmp(i, j)) by_edge[e].push_back({{i, j}, f});
    }
  }
  for (EdgeId e = 0; e < topo.edge_count(); ++e) {
    detail::LpRow row(out, "cap_" + std::to_string(e));
    for (const auto& [pair, f] : by_edge[e]) {
      row.term(f, detail::step1_var(pair.first, pair.second));
      row.term(f, detail::step2_var(pair.first, pair.second));
    }
    row.term(-topo.edge(e).capacity, "U");
    row.finish("<=", 0);
  }

  out << "Bounds\n U >= 0\n";
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      out << " " << detail::step1_var(i, j) << " >= 0\n";
      out << " " << detail::step2_var(i, j) << " >= 0\n";
    }
  }
  out << "Binaries\n";
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      for (NodeId k = 0; k < n; ++k) {
        if (k != i) out << " " << detail::path_var(i, k, j) << "\n";
      }
    }
  }
  out << "End\n";
}

inline std::string export_milp(const Setting& setting) {
  std::ostringstream out;
  export_milp(out, setting);
  return out.str();
}

}  // namespace repetita
