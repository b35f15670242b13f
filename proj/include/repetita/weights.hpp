#pragma once

// IGP weight assignment heuristics.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/solvers/igp_wo.hpp"

namespace repetita {

enum class WeightHeuristic { kUnit, kInverseCapacity, kOptimized };

inline constexpr std::int64_t kDefaultWeightOptimizationMs = 10'000;

inline std::optional<WeightHeuristic> parse_weight_heuristic(
    const std::string& name) {
  if (name == "unit") return WeightHeuristic::kUnit;
  if (name == "invcap" || name == "inverse-capacity") {
    return WeightHeuristic::kInverseCapacity;
  }
  if (name == "optimized" || name == "igpwo") return WeightHeuristic::kOptimized;
  return std::nullopt;
}

// Unit and InverseCapacity only depend on the topology. InverseCapacity uses
// the largest capacity as reference: w(e) = max(1, round(cmax / c(e))).
inline std::vector<Weight> assign_weights(const Topology& topo,
                                          WeightHeuristic heuristic,
                                          Weight max_weight = kDefaultMaxWeight) {
  std::vector<Weight> out(topo.edge_count(), 1);
  switch (heuristic) {
    case WeightHeuristic::kUnit:
      return out;
    case WeightHeuristic::kInverseCapacity: {
      double reference = 0;
      for (const Edge& e : topo.edges()) {
        reference = std::max(reference, e.capacity);
      }
      for (EdgeId e = 0; e < topo.edge_count(); ++e) {
        const double ratio = reference / topo.edge(e).capacity;
        out[e] = std::clamp<Weight>(std::llround(ratio), 1, max_weight);
      }
      return out;
    }
    case WeightHeuristic::kOptimized:
      break;
  }
  throw std::invalid_argument(
      "optimized weights need a traffic matrix; use the Setting overload");
}

// Optimized weights come from the IGP weight optimizer, starting from the
// setting's current weights.
inline std::vector<Weight> assign_weights(
    const Setting& setting, WeightHeuristic heuristic,
    const SolverBudget& budget =
        SolverBudget::wall_clock(kDefaultWeightOptimizationMs)) {
  if (heuristic != WeightHeuristic::kOptimized) {
    return assign_weights(setting.topology, heuristic);
  }
  return solve_igp_wo(setting, budget).weights;
}

// Copy of the topology carrying `weights` as configured link weights.
inline Topology with_weights(const Topology& topo,
                             const std::vector<Weight>& weights) {
  std::vector<Edge> edges = topo.edges();
  for (EdgeId e = 0; e < topo.edge_count(); ++e) edges[e].weight = weights[e];
  return Topology(topo.nodes(), std::move(edges));
}

}  // namespace repetita
