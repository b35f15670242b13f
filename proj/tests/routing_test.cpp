#include <gtest/gtest.h>

#include "repetita/routing.hpp"
#include "test_util.hpp"

namespace repetita {
namespace {

using testing::triangle;

std::vector<double> dense(const SparseEdgeVector& v, EdgeId m) {
  std::vector<double> out(m, 0.0);
  for (const auto& [e, f] : v) out[e] = f;
  return out;
}

TEST(ForwardingState, TriangleUniqueShortestPath) {
  Topology t = triangle();
  ForwardingState s(t, t.weights());
  EXPECT_EQ(s.distance(0, 2), 1);
  EXPECT_EQ(dense(s.ecmp_fraction(0, 2), 6),
            (std::vector<double>{0, 0, 0, 0, 1, 0}));
}

TEST(ForwardingState, DiamondEvenSplit) {
  Setting d = testing::load_fixture("diamond");
  ForwardingState s(d.topology, d.routing.weights);
  // SA, AT, SB, BT carry half each.
  EXPECT_EQ(dense(s.ecmp_fraction(0, 3), 8),
            (std::vector<double>{0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0}));
}

TEST(ForwardingState, WeightCountMismatch) {
  Topology t = triangle();
  std::vector<Weight> w(5, 1);
  EXPECT_THROW(ForwardingState(t, w), std::invalid_argument);
}

TEST(ForwardingState, UnreachableThrows) {
  Topology t({{"a", 0, 0}, {"b", 0, 0}}, {{"e", 0, 1, 1, 1, 0}});
  ForwardingState s(t, t.weights());
  EXPECT_FALSE(s.reachable(1, 0));
  EXPECT_THROW(s.ecmp_fraction(1, 0), std::runtime_error);
}

// Fractions agree with exhaustive shortest-path enumeration, and are
// conserving flows with values in ]0, 1].
TEST(ForwardingState, MatchesEnumerationOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    testing::RandomGraphOptions o;
    o.max_nodes = 8;
    o.symmetric = rng.bernoulli(0.7);
    o.extra_edge_probability = 0.4;
    Topology t = testing::random_topology(rng, o);
    ForwardingState s(t, t.weights());
    testing::EcmpOracle oracle(t, t.weights());
    const auto fw = testing::floyd_warshall(t, t.weights());
    for (NodeId i = 0; i < t.node_count(); ++i) {
      for (NodeId j = 0; j < t.node_count(); ++j) {
        if (i == j) continue;
        EXPECT_EQ(s.distance(i, j), fw[i][j]);
        const std::vector<double> want = oracle.fraction(i, j);
        const SparseEdgeVector got = s.ecmp_fraction(i, j);
        const std::vector<double> got_dense = dense(got, t.edge_count());
        for (EdgeId e = 0; e < t.edge_count(); ++e) {
          EXPECT_NEAR(got_dense[e], want[e], 1e-9);
        }
        std::vector<double> net(t.node_count(), 0.0);
        for (const auto& [e, f] : got) {
          EXPECT_GT(f, 0);
          EXPECT_LE(f, 1 + 1e-12);
          net[t.edge(e).src] += f;
          net[t.edge(e).dst] -= f;
        }
        for (NodeId v = 0; v < t.node_count(); ++v) {
          const double expect = v == i ? 1.0 : (v == j ? -1.0 : 0.0);
          EXPECT_NEAR(net[v], expect, 1e-9);
        }
      }
    }
  }
}

TEST(IgpLoad, TriangleSinglePath) {
  TrafficMatrix tm;
  tm.demands = {{"d0", 0, 2, 9000}};
  Setting s = make_setting(triangle(), tm);
  EXPECT_DOUBLE_EQ(max_utilization(s), 0.9);
}

TEST(IgpLoad, DiamondHalfSplit) {
  Setting d = testing::load_fixture("diamond");
  LoadVector lv = total_load(d);
  for (EdgeId e : {0, 2, 4, 6}) EXPECT_DOUBLE_EQ(lv.utilization[e], 0.4);
  for (EdgeId e : {1, 3, 5, 7}) EXPECT_DOUBLE_EQ(lv.utilization[e], 0);
}

TEST(IgpLoad, Superposition) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    Topology t = testing::random_topology(rng);
    TrafficMatrix tm = testing::random_demands(rng, t.node_count(), 6);
    if (tm.size() < 2) continue;
    ForwardingState s(t, t.weights());
    TrafficMatrix a;
    TrafficMatrix b;
    for (DemandId d = 0; d < tm.size(); ++d) {
      (d % 2 ? a : b).demands.push_back(tm.demands[d]);
    }
    LoadVector all = igp_load(t, s, tm);
    LoadVector la = igp_load(t, s, a);
    LoadVector lb = igp_load(t, s, b);
    for (EdgeId e = 0; e < t.edge_count(); ++e) {
      EXPECT_NEAR(all.load[e], la.load[e] + lb.load[e], 1e-6);
    }
  }
}

TEST(SrLoad, TriangleDetourHalvesPeak) {
  Setting s = testing::two_demand_triangle();
  EXPECT_DOUBLE_EQ(max_utilization(s), 1.8);
  s.routing.sr_segments[1] = {0, 1, 2};
  LoadVector lv = total_load(s);
  EXPECT_DOUBLE_EQ(lv.max_utilization, 0.9);
  EXPECT_DOUBLE_EQ(lv.utilization[4], 0.9);  // AC
  EXPECT_DOUBLE_EQ(lv.utilization[0], 0.9);  // AB
  EXPECT_DOUBLE_EQ(lv.utilization[2], 0.9);  // BC
  EXPECT_DOUBLE_EQ(testing::enumerate_two_segment_optimum(s), 0.9);
}

TEST(SrLoad, TwoNodeSegmentEqualsIgp) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Topology t = testing::random_topology(rng);
    TrafficMatrix tm = testing::random_demands(rng, t.node_count(), 5);
    Setting plain = make_setting(t, tm);
    Setting seg = plain;
    for (DemandId d = 0; d < tm.size(); ++d) {
      seg.routing.sr_segments[d] = {tm.demands[d].src, tm.demands[d].dst};
    }
    EXPECT_EQ(total_load(plain).load, total_load(seg).load);
  }
}

TEST(SrLoad, CoincidingSegmentsThrow) {
  Setting s = testing::two_demand_triangle();
  s.routing.sr_segments[0] = {0, 1, 1, 2};
  EXPECT_THROW(total_load(s), std::invalid_argument);
}

// Random segment lists and explicit paths on graphs of up to 8 nodes agree
// with the enumeration oracle.
TEST(TotalLoad, MatchesOracleWithSegmentsAndExplicitPaths) {
  Rng rng(77);
  for (int trial = 0; trial < 80; ++trial) {
    testing::RandomGraphOptions o;
    o.max_nodes = 8;
    o.min_nodes = 3;
    Topology t = testing::random_topology(rng, o);
    TrafficMatrix tm = testing::random_demands(rng, t.node_count(), 8);
    Setting s = make_setting(t, tm);
    for (DemandId d = 0; d < tm.size(); ++d) {
      const Demand& dem = tm.demands[d];
      const double r = rng.uniform();
      if (r < 0.4) {
        SegmentList seg = {dem.src};
        const int detours = 1 + static_cast<int>(rng.below(3));
        for (int k = 0; k < detours; ++k) {
          const NodeId v = static_cast<NodeId>(rng.below(t.node_count()));
          if (v != seg.back()) seg.push_back(v);
        }
        if (seg.back() == dem.dst) seg.pop_back();
        seg.push_back(dem.dst);
        s.routing.sr_segments[d] = seg;
      } else if (r < 0.6) {
        // Explicit path: the oracle's first shortest path, twice if asked.
        testing::EcmpOracle oracle(t, t.weights());
        EdgePath p;
        NodeId u = dem.src;
        while (u != dem.dst) {
          const EdgeId e = oracle.next_hops(u, dem.dst).back();
          p.push_back(e);
          u = t.edge(e).dst;
        }
        s.routing.explicit_paths[d] = {p};
        if (rng.bernoulli(0.5)) s.routing.explicit_paths[d].push_back(p);
      }
    }
    ASSERT_TRUE(validate_setting(s).empty());
    const LoadVector got = total_load(s);
    const std::vector<double> want = testing::oracle_load(s);
    for (EdgeId e = 0; e < t.edge_count(); ++e) {
      EXPECT_NEAR(got.load[e], want[e], 1e-6 * (1 + want[e]));
    }
  }
}

TEST(ExplicitLoad, EvenSplitOverDisjointPaths) {
  TrafficMatrix tm;
  tm.demands = {{"d0", 0, 2, 9000}};
  Setting s = make_setting(triangle(), tm);
  s.routing.explicit_paths[0] = {{4}, {0, 2}};
  LoadVector lv = total_load(s);
  EXPECT_DOUBLE_EQ(lv.load[4], 4500);
  EXPECT_DOUBLE_EQ(lv.load[0], 4500);
  EXPECT_DOUBLE_EQ(lv.load[2], 4500);
  s.routing.explicit_paths[0] = {{4}};
  EXPECT_DOUBLE_EQ(total_load(s).load[4], 9000);
}

TEST(ExplicitLoad, DisconnectedPathThrows) {
  TrafficMatrix tm;
  tm.demands = {{"d0", 0, 2, 9000}};
  Setting s = make_setting(triangle(), tm);
  s.routing.explicit_paths[0] = {{0}};
  EXPECT_THROW(total_load(s), std::invalid_argument);
}

TEST(LoadVector, MaxEdgeIsLowestIndexTie) {
  Topology t = triangle();
  LoadVector lv = LoadVector::from_loads(t, {0, 5, 5, 0, 1, 0});
  EXPECT_EQ(lv.max_edge, 1);
  EXPECT_DOUBLE_EQ(lv.max_utilization, 5.0 / 10000);
}

}  // namespace
}  // namespace repetita
