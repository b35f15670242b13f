#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "repetita/core.hpp"
#include "repetita/routing.hpp"
#include "repetita/solvers/budget.hpp"

namespace repetita {

struct SolverResult {
  RoutingConfiguration routing;
  // Set when the solver was stopped before producing complete output.
  bool truncated = false;
  // Solver-reported run time; the caller measures wall-clock otherwise.
  std::optional<std::int64_t> reported_time_ms;
};

// A TE algorithm under test: given a setting, produce a new routing
// configuration within the budget.
class Solver {
 public:
  virtual ~Solver() = default;
  virtual std::string name() const = 0;
  virtual SolverResult solve(const Setting& setting,
                             const SolverBudget& budget) = 0;
};

// Returns `candidate` unless it is worse than the setting's own routing.
inline RoutingConfiguration never_worse(const Setting& setting,
                                        RoutingConfiguration candidate) {
  const double before = max_utilization(setting);
  const double after = max_utilization(with_routing(setting, candidate));
  if (after > before + kObjectiveTolerance) return setting.routing;
  return candidate;
}

}  // namespace repetita
