#pragma once

// Randomized gravity-model traffic matrices.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "repetita/core.hpp"
#include "repetita/mcf.hpp"
#include "repetita/rng.hpp"

namespace repetita {

struct GravityParams {
  std::uint64_t seed = 0;
  // kbps before scaling; 0 selects |V| * |V| * 1000.
  double total_volume = 0;
};

struct GravityMasses {
  std::vector<double> out;
  std::vector<double> in;
};

// Out-masses for nodes 0..n-1 are drawn first, then in-masses.
inline GravityMasses draw_gravity_masses(NodeId n, std::uint64_t seed) {
  Rng rng(seed);
  GravityMasses masses;
  masses.out.resize(n);
  masses.in.resize(n);
  for (NodeId i = 0; i < n; ++i) masses.out[i] = rng.exponential();
  for (NodeId j = 0; j < n; ++j) masses.in[j] = rng.exponential();
  return masses;
}

// T_ij = total * o_i d_j / sum_{a != b} o_a d_b for every ordered pair i != j.
inline TrafficMatrix generate_gravity_tm(const Topology& topo,
                                         const GravityParams& params) {
  const NodeId n = topo.node_count();
  if (n < 2) throw std::invalid_argument("gravity model needs two nodes");
  const double total = params.total_volume > 0
                           ? params.total_volume
                           : static_cast<double>(n) * n * 1000.0;
  const GravityMasses masses = draw_gravity_masses(n, params.seed);
  double sum_out = 0;
  double sum_in = 0;
  double diagonal = 0;
  for (NodeId i = 0; i < n; ++i) {
    sum_out += masses.out[i];
    sum_in += masses.in[i];
    diagonal += masses.out[i] * masses.in[i];
  }
  const double norm = sum_out * sum_in - diagonal;

  TrafficMatrix tm;
  tm.demands.reserve(static_cast<std::size_t>(n) * (n - 1));
  int label = 0;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) {
      if (i == j) continue;
      tm.demands.push_back({"demand_" + std::to_string(label++), i, j,
                            total * masses.out[i] * masses.in[j] / norm});
    }
  }
  return tm;
}

// Gravity matrix scaled so that the optimal fractional routing loads the most
// utilized link at `target`.
inline TrafficMatrix synthesize_scaled_tm(
    const Topology& topo, std::uint64_t seed,
    double target = kDefaultTargetUtilization,
    double epsilon = kDefaultLpEpsilon) {
  GravityParams params;
  params.seed = seed;
  return scale_traffic_matrix(topo, generate_gravity_tm(topo, params), target,
                              epsilon);
}

}  // namespace repetita
