// Writes gravity-model demand files scaled to a target optimal utilization:
//
//   repetita_tmgen -graph net.graph -count 5 -seed 1 -outdir net.demands/
//
// File k is <graph stem>.<k>.demands and uses seed + k.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "repetita/gravity.hpp"
#include "repetita/io.hpp"

namespace {

int usage() {
  std::cerr << "usage: repetita_tmgen -graph <file> -outdir <dir> [-count <n>]\n"
               "                      [-seed <n>] [-target <u>] [-epsilon <e>]\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::string graph;
  std::string outdir;
  int count = 5;
  std::uint64_t seed = 1;
  double target = repetita::kDefaultTargetUtilization;
  double epsilon = repetita::kDefaultLpEpsilon;
  try {
    for (int i = 1; i + 1 < argc; i += 2) {
      const std::string flag = argv[i];
      const std::string value = argv[i + 1];
      if (flag == "-graph") {
        graph = value;
      } else if (flag == "-outdir") {
        outdir = value;
      } else if (flag == "-count") {
        count = std::stoi(value);
      } else if (flag == "-seed") {
        seed = std::stoull(value);
      } else if (flag == "-target") {
        target = std::stod(value);
      } else if (flag == "-epsilon") {
        epsilon = std::stod(value);
      } else {
        return usage();
      }
    }
    if (argc % 2 == 0 || graph.empty() || outdir.empty() || count < 1) {
      return usage();
    }
    const repetita::Topology topo =
        repetita::preprocess_topology(repetita::read_topology_file(graph));
    std::filesystem::create_directories(outdir);
    const std::string stem = std::filesystem::path(graph).stem().string();
    for (int k = 0; k < count; ++k) {
      const repetita::TrafficMatrix tm =
          repetita::synthesize_scaled_tm(topo, seed + k, target, epsilon);
      const auto path = std::filesystem::path(outdir) /
                        (stem + "." + std::to_string(k) + ".demands");
      std::ofstream out(path);
      repetita::write_demands(out, tm);
      if (!out) throw std::runtime_error("cannot write " + path.string());
    }
  } catch (const std::exception& e) {
    std::cerr << "repetita_tmgen: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
