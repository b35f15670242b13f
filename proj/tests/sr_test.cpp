#include <gtest/gtest.h>

#include "repetita/mcf.hpp"
#include "repetita/routing.hpp"
#include "repetita/solvers/sr_lns.hpp"
#include "repetita/solvers/sr_two_segment.hpp"
#include "test_util.hpp"

namespace repetita {
namespace {

Setting random_instance(Rng& rng, NodeId max_nodes, int demands) {
  testing::RandomGraphOptions o;
  o.min_nodes = 3;
  o.max_nodes = max_nodes;
  Topology t = testing::random_topology(rng, o);
  return make_setting(t, testing::random_demands(rng, t.node_count(), demands));
}

double post(const Setting& s, const RoutingConfiguration& r) {
  return testing::oracle_max_utilization(with_routing(s, r));
}

TEST(TwoSegmentExact, TriangleDetour) {
  Setting s = testing::two_demand_triangle();
  TwoSegmentResult r = solve_sr_two_segment_detailed(
      s, SolverBudget::iteration_count(1'000'000), TwoSegmentMode::kExactTiny);
  EXPECT_TRUE(r.complete);
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, r.routing)), 0.9);
  ASSERT_EQ(r.routing.sr_segments.size(), 1u);
  EXPECT_EQ(r.routing.sr_segments.begin()->second, (SegmentList{0, 1, 2}));
}

// Branch-and-bound agrees with full enumeration of one-detour assignments.
TEST(TwoSegmentExact, MatchesEnumeration) {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    Setting s = random_instance(rng, 6, 1 + static_cast<int>(rng.below(5)));
    TwoSegmentResult r = solve_sr_two_segment_detailed(
        s, SolverBudget::iteration_count(100'000'000), TwoSegmentMode::kExactTiny);
    ASSERT_TRUE(r.complete);
    const double want = testing::enumerate_two_segment_optimum(s);
    EXPECT_NEAR(post(s, r.routing), want, 1e-12 * (1 + want)) << "trial " << trial;
    for (const auto& [d, seg] : r.routing.sr_segments) {
      EXPECT_EQ(seg.size(), 3u);
      EXPECT_EQ(seg.front(), s.traffic.demands[d].src);
      EXPECT_EQ(seg.back(), s.traffic.demands[d].dst);
    }
  }
}

TEST(TwoSegmentExact, TooLargeThrows) {
  Topology t = testing::load_graph("data/topologies/abilene.graph");
  Rng rng(1);
  Setting s = make_setting(t, testing::random_demands(rng, t.node_count(), 3));
  EXPECT_THROW(solve_sr_two_segment(s, SolverBudget::iteration_count(10),
                                    TwoSegmentMode::kExactTiny),
               std::invalid_argument);
  Setting many = make_setting(testing::triangle(), TrafficMatrix{});
  for (int i = 0; i < 9; ++i) {
    many.traffic.demands.push_back({"d" + std::to_string(i), 0, 2, 10});
  }
  many = make_setting(many.topology, many.traffic);
  EXPECT_THROW(solve_sr_two_segment(many, SolverBudget::iteration_count(10),
                                    TwoSegmentMode::kExactTiny),
               std::invalid_argument);
}

TEST(TwoSegmentExact, TruncatedSearchIsFlaggedAndNeverWorse) {
  Rng rng(103);
  for (int trial = 0; trial < 10; ++trial) {
    Setting s = random_instance(rng, 6, 8);
    TwoSegmentResult r = solve_sr_two_segment_detailed(
        s, SolverBudget::iteration_count(3), TwoSegmentMode::kExactTiny);
    EXPECT_FALSE(r.complete);
    EXPECT_LE(post(s, r.routing), testing::oracle_max_utilization(s) + 1e-12);
  }
}

TEST(TwoSegmentHeuristic, BetweenOptimumAndInput) {
  Rng rng(104);
  for (int trial = 0; trial < 30; ++trial) {
    Setting s = random_instance(rng, 6, 5);
    RoutingConfiguration r = solve_sr_two_segment(
        s, SolverBudget::iteration_count(1000), TwoSegmentMode::kHeuristic);
    const double got = post(s, r);
    EXPECT_LE(got, testing::oracle_max_utilization(s) + 1e-12);
    EXPECT_GE(got, testing::enumerate_two_segment_optimum(s) - 1e-12);
  }
}

TEST(Lns, NeverWorseAndAboveLpBound) {
  Rng rng(105);
  for (int trial = 0; trial < 20; ++trial) {
    Setting s = random_instance(rng, 8, 10);
    RoutingConfiguration r = solve_sr_lns(s, SolverBudget::iteration_count(200, trial));
    const double got = post(s, r);
    EXPECT_LE(got, testing::oracle_max_utilization(s) + 1e-12);
    EXPECT_GE(got, lp_lower_bound(s.topology, s.traffic, 0.01).lower_bound * (1 - 1e-9));
  }
}

TEST(Lns, SegmentListsAreWellFormed) {
  Rng rng(106);
  for (int trial = 0; trial < 20; ++trial) {
    Setting s = random_instance(rng, 8, 10);
    RoutingConfiguration r = solve_sr_lns(s, SolverBudget::iteration_count(100, trial));
    EXPECT_TRUE(validate_setting(with_routing(s, r)).empty());
    for (const auto& [d, seg] : r.sr_segments) {
      EXPECT_GE(seg.size(), 3u);
      EXPECT_LE(seg.size(), static_cast<std::size_t>(s.topology.node_count()));
      for (std::size_t i = 0; i + 1 < seg.size(); ++i) EXPECT_NE(seg[i], seg[i + 1]);
    }
  }
}

TEST(Lns, FindsTriangleDetour) {
  Setting s = testing::two_demand_triangle();
  RoutingConfiguration r = solve_sr_lns(s, SolverBudget::iteration_count(50, 1));
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, r)), 0.9);
}

TEST(Lns, DeterministicUnderIterationBudget) {
  Topology t = testing::load_graph("data/topologies/abilene.graph");
  TrafficMatrix tm = read_demands_file(
      testing::source_path("data/demands/abilene/abilene.3.demands"), t.node_count());
  Setting s = make_setting(t, tm);
  RoutingConfiguration a = solve_sr_lns(s, SolverBudget::iteration_count(40, 5));
  RoutingConfiguration b = solve_sr_lns(s, SolverBudget::iteration_count(40, 5));
  EXPECT_EQ(a.sr_segments, b.sr_segments);
}

// Explicit paths stay pinned; only the remaining demands get segments.
TEST(Lns, LeavesExplicitPathsAlone) {
  Setting s = testing::two_demand_triangle();
  s.routing.explicit_paths[0] = {{4}};
  RoutingConfiguration r = solve_sr_lns(s, SolverBudget::iteration_count(50, 1));
  EXPECT_EQ(r.explicit_paths, s.routing.explicit_paths);
  EXPECT_FALSE(r.sr_segments.contains(0));
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, r)), 0.9);
}

}  // namespace
}  // namespace repetita
