#pragma once

// IGP weight optimization: tabu local search over single-link weight changes,
// in the spirit of Fortz and Thorup. Candidate moves are the weight values
// that equalize the path through the most utilized link with an alternative
// (so ECMP splits the traffic) or make it one unit longer (so traffic moves
// away), plus random samples. The search restarts from a perturbed best
// solution when it stagnates.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/rng.hpp"
#include "repetita/routing.hpp"
#include "repetita/solvers/budget.hpp"
#include "repetita/solvers/solver.hpp"

namespace repetita {

struct IgpWoOptions {
  Weight max_weight = kDefaultMaxWeight;
  int tabu_tenure = 10;
  int random_samples = 8;
  int max_targeted_moves = 64;
  int stagnation_limit = 40;
};

namespace detail {

struct WeightMove {
  EdgeId edge;
  Weight value;
  friend auto operator<=>(const WeightMove&, const WeightMove&) = default;
};

class IgpEvaluator {
 public:
  explicit IgpEvaluator(const Setting& setting)
      : setting_(setting), capacity_(setting.topology.capacities()) {}

  struct Result {
    Objective objective;
    LoadVector load;
  };

  Result operator()(const std::vector<Weight>& weights) const {
    ForwardingState state(setting_.topology, weights);
    RoutingConfiguration routing = setting_.routing;
    routing.weights = weights;
    LoadVector load =
        total_load(setting_.topology, state, setting_.traffic, routing);
    return {evaluate_objective(load.load, capacity_), std::move(load)};
  }

 private:
  const Setting& setting_;
  std::vector<double> capacity_;
};

inline std::vector<WeightMove> targeted_moves(const Topology& topo,
                                              const std::vector<Weight>& w,
                                              EdgeId hot, Weight max_weight,
                                              int limit) {
  std::set<WeightMove> moves;
  ForwardingState state(topo, w);
  const NodeId u = topo.edge(hot).src;
  const NodeId v = topo.edge(hot).dst;
  for (NodeId t = 0; t < topo.node_count() &&
                     static_cast<int>(moves.size()) < limit;
       ++t) {
    const auto& hops = state.next_hops(u, t);
    if (std::find(hops.begin(), hops.end(), hot) == hops.end()) continue;
    const std::int64_t through = state.distance(u, t);
    for (EdgeId alt : topo.out_edges(u)) {
      if (alt == hot) continue;
      const NodeId v2 = topo.edge(alt).dst;
      if (!state.reachable(v2, t)) continue;
      const std::int64_t alt_len = w[alt] + state.distance(v2, t);
      // Lengthen the hot link to tie with (or lose against) the alternative.
      const Weight tie = alt_len - state.distance(v, t);
      if (tie > w[hot] && tie <= max_weight) moves.insert({hot, tie});
      if (tie + 1 > w[hot] && tie + 1 <= max_weight) {
        moves.insert({hot, tie + 1});
      }
      // Shorten the alternative so it ties with the current path.
      const Weight shorter = through - state.distance(v2, t);
      if (shorter >= 1 && shorter < w[alt]) moves.insert({alt, shorter});
    }
  }
  std::vector<WeightMove> out(moves.begin(), moves.end());
  if (static_cast<int>(out.size()) > limit) out.resize(limit);
  return out;
}

}  // namespace detail

inline RoutingConfiguration solve_igp_wo(const Setting& setting,
                                         const SolverBudget& budget,
                                         const IgpWoOptions& options = {}) {
  BudgetTracker tracker(budget);
  if (tracker.exhausted() || setting.topology.edge_count() == 0) {
    return setting.routing;
  }
  const Topology& topo = setting.topology;
  const EdgeId m = topo.edge_count();
  detail::IgpEvaluator evaluate(setting);
  Rng rng(budget.seed);

  std::vector<Weight> weights = setting.routing.weights;
  for (Weight& w : weights) w = std::clamp<Weight>(w, 1, options.max_weight);
  auto current = evaluate(weights);
  std::vector<Weight> best_weights = weights;
  Objective best = current.objective;
  std::vector<std::int64_t> tabu_until(m, -1);
  std::int64_t iteration = 0;
  int since_improvement = 0;

  while (!tracker.exhausted()) {
    const EdgeId hot = current.load.max_edge;
    std::vector<detail::WeightMove> moves = detail::targeted_moves(
        topo, weights, hot, options.max_weight, options.max_targeted_moves);
    Weight sample_max = 20;
    for (Weight w : weights) sample_max = std::max(sample_max, 2 * w);
    sample_max = std::min(sample_max, options.max_weight);
    for (int s = 0; s < options.random_samples; ++s) {
      auto e = static_cast<EdgeId>(rng.below(m));
      auto value = static_cast<Weight>(1 + rng.below(sample_max));
      if (value != weights[e]) moves.push_back({e, value});
    }

    bool have_move = false;
    detail::WeightMove chosen{};
    std::optional<detail::IgpEvaluator::Result> chosen_result;
    for (const detail::WeightMove& move : moves) {
      if (tracker.exhausted()) break;
      const Weight old = weights[move.edge];
      weights[move.edge] = move.value;
      auto result = evaluate(weights);
      weights[move.edge] = old;
      const bool tabu = tabu_until[move.edge] > iteration;
      if (tabu && !result.objective.better_than(best)) continue;
      if (!have_move || result.objective.better_than(chosen_result->objective)) {
        have_move = true;
        chosen = move;
        chosen_result = std::move(result);
      }
    }
    tracker.spend();
    ++iteration;
    if (have_move) {
      weights[chosen.edge] = chosen.value;
      tabu_until[chosen.edge] = iteration + options.tabu_tenure;
      current = std::move(*chosen_result);
      if (current.objective.better_than(best)) {
        best = current.objective;
        best_weights = weights;
        since_improvement = 0;
        continue;
      }
    }
    if (++since_improvement >= options.stagnation_limit && !tracker.exhausted()) {
      // Restart from the best weights with a few random perturbations.
      weights = best_weights;
      const EdgeId changes = std::max<EdgeId>(1, m / 10);
      for (EdgeId c = 0; c < changes; ++c) {
        auto e = static_cast<EdgeId>(rng.below(m));
        weights[e] = static_cast<Weight>(1 + rng.below(sample_max));
      }
      std::fill(tabu_until.begin(), tabu_until.end(), -1);
      current = evaluate(weights);
      since_improvement = 0;
    }
  }

  RoutingConfiguration out = setting.routing;
  out.weights = best_weights;
  return never_worse(setting, std::move(out));
}

}  // namespace repetita
