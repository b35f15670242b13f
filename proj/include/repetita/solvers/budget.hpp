#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <vector>

namespace repetita {

// Wall-clock budgets match the command line's time limit; iteration budgets
// make randomized searches reproducible bit for bit.
enum class BudgetMode { kWallClock, kIterations };

struct SolverBudget {
  std::int64_t wall_clock_ms = 30'000;
  std::uint64_t seed = 0;
  BudgetMode mode = BudgetMode::kWallClock;
  std::int64_t iterations = 0;

  static SolverBudget wall_clock(std::int64_t ms, std::uint64_t seed = 0) {
    return {ms, seed, BudgetMode::kWallClock, 0};
  }
  static SolverBudget iteration_count(std::int64_t n, std::uint64_t seed = 0) {
    return {0, seed, BudgetMode::kIterations, n};
  }
};

// Cooperative deadline: searches call exhausted() before every objective
// evaluation and spend() once per search iteration.
class BudgetTracker {
 public:
  using Clock = std::chrono::steady_clock;

  explicit BudgetTracker(const SolverBudget& budget)
      : budget_(budget),
        deadline_(Clock::now() + std::chrono::milliseconds(
                                     std::max<std::int64_t>(0, budget.wall_clock_ms))) {}

  bool exhausted() const {
    if (budget_.mode == BudgetMode::kIterations) {
      return used_ >= budget_.iterations;
    }
    return budget_.wall_clock_ms <= 0 || Clock::now() >= deadline_;
  }

  void spend() { ++used_; }
  std::int64_t used() const { return used_; }

 private:
  SolverBudget budget_;
  Clock::time_point deadline_;
  std::int64_t used_ = 0;
};

inline constexpr double kObjectiveTolerance = 1e-12;

// Maximum utilization, with the sum of squared utilizations as tie-breaker:
// among configurations with the same bottleneck, prefer the one that moved
// load off the most loaded links.
struct Objective {
  double max_utilization = 0;
  double sum_squares = 0;

  bool better_than(const Objective& o) const {
    if (max_utilization < o.max_utilization - kObjectiveTolerance) return true;
    if (max_utilization > o.max_utilization + kObjectiveTolerance) return false;
    return sum_squares < o.sum_squares * (1 - 1e-12) - kObjectiveTolerance;
  }
};

inline Objective evaluate_objective(const std::vector<double>& load,
                                    const std::vector<double>& capacity) {
  Objective o;
  for (std::size_t e = 0; e < load.size(); ++e) {
    const double u = load[e] / capacity[e];
    o.max_utilization = std::max(o.max_utilization, u);
    o.sum_squares += u * u;
  }
  return o;
}

}  // namespace repetita
