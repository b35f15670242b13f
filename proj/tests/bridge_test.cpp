#include <gtest/gtest.h>

#include <sstream>

#include "repetita/bridge.hpp"
#include "repetita/scenarios.hpp"
#include "test_util.hpp"

namespace repetita {
namespace {

const char* kRandomTunnels = R"(// Solvers reachable from the command line.
name = randomTunnels
optimization objective = random paths
run command = python external_solvers/getRandomPaths.py $TOPOFILE
   $DEMANDFILE $OUTFILE
optimization effect = setExplicitPaths
field separator = '; '
key field = 0
value field = 2
gettime command = cat $OUTFILE | grep 'execution time' | awk -F'; ' '{print $2}'
)";

std::string fixture_command(const std::string& extra) {
  return "python3 " + testing::source_path("tests/fixtures/bfs_paths.py") +
         " $TOPOFILE $DEMANDFILE $OUTFILE " + extra;
}

ExternalSolverSpec fixture_spec(const std::string& extra,
                                OptimizationEffect effect = OptimizationEffect::kSetExplicitPaths) {
  ExternalSolverSpec s;
  s.name = "bfs";
  s.run_command = fixture_command(extra);
  s.effect = effect;
  s.field_separator = "; ";
  s.key_field = 0;
  s.value_field = 2;
  s.gettime_command = "grep 'execution time' $OUTFILE | awk -F'; ' '{print $2}'";
  return s;
}

TEST(SolverSpecs, ParsesDocumentedBlock) {
  std::vector<ExternalSolverSpec> specs = parse_solver_specs(std::string(kRandomTunnels));
  ASSERT_EQ(specs.size(), 1u);
  const ExternalSolverSpec& s = specs[0];
  EXPECT_EQ(s.name, "randomTunnels");
  EXPECT_EQ(s.objective, "random paths");
  EXPECT_EQ(s.run_command,
            "python external_solvers/getRandomPaths.py $TOPOFILE $DEMANDFILE $OUTFILE");
  EXPECT_EQ(s.effect, OptimizationEffect::kSetExplicitPaths);
  EXPECT_EQ(s.field_separator, "; ");
  EXPECT_EQ(s.key_field, 0);
  EXPECT_EQ(s.value_field, 2);
  EXPECT_EQ(s.gettime_command,
            "cat $OUTFILE | grep 'execution time' | awk -F'; ' '{print $2}'");
}

TEST(SolverSpecs, SeveralBlocksAndOptionalKeys) {
  const std::string text = std::string(kRandomTunnels) +
                           "\nName = weights\nrun command = w $TOPOFILE $DEMANDFILE $OUTFILE\n"
                           "optimization effect = setLinkWeights\nfield separator = ' '\n"
                           "key field = 1\nvalue field = 0\n";
  std::vector<ExternalSolverSpec> specs = parse_solver_specs(text);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_EQ(specs[1].name, "weights");
  EXPECT_EQ(specs[1].field_separator, " ");
  EXPECT_EQ(specs[1].effect, OptimizationEffect::kSetLinkWeights);
  EXPECT_TRUE(specs[1].gettime_command.empty());
  EXPECT_TRUE(specs[1].objective.empty());
}

std::string error_of(const std::string& text) {
  try {
    parse_solver_specs(text);
  } catch (const SpecError& e) {
    return e.what();
  }
  return "";
}

TEST(SolverSpecs, Errors) {
  const std::string base =
      "name = x\nrun command = r $TOPOFILE $DEMANDFILE $OUTFILE\n"
      "optimization effect = setSegments\nfield separator = ';'\n";
  EXPECT_NE(error_of(base + "key field = 0\n").find("solver block 'x' (line 1): missing 'value field'"),
            std::string::npos);
  EXPECT_NE(error_of(base + "key field = 0\nvalue field = 0\n").find("coincide"),
            std::string::npos);
  EXPECT_NE(error_of(base + "key field = -1\nvalue field = 2\n").find("key field"),
            std::string::npos);
  EXPECT_NE(error_of(base + "key field = 0\nvalue field = 1\nkey field = 2\n").find("key field"),
            std::string::npos);
  EXPECT_NE(error_of("name = x\nrun command = r $TOPOFILE $OUTFILE\noptimization effect = "
                     "setSegments\nfield separator = ';'\nkey field = 0\nvalue field = 1\n")
                .find("$DEMANDFILE"),
            std::string::npos);
  EXPECT_NE(error_of("name = x\nrun command = r $TOPOFILE $DEMANDFILE $OUTFILE\noptimization "
                     "effect = setMagic\nfield separator = ';'\nkey field = 0\nvalue field = 1\n")
                .find("setMagic"),
            std::string::npos);
  EXPECT_NE(error_of("key field = 0\n").find("before any 'name'"), std::string::npos);
  EXPECT_NE(error_of("just some words\n").find("line 1"), std::string::npos);
  EXPECT_TRUE(parse_solver_specs(std::string("// nothing here\n\n")).empty());
}

TEST(ApplyOutput, PathsAccumulateAndSplit) {
  Setting s = testing::two_demand_triangle();
  ExternalSolverSpec spec = fixture_spec("");
  std::istringstream out("d1; 0; 0,2\nd2; 0; 0,1,2\nd2; 0; 0,2\nexecution time; 0.1\n");
  RoutingConfiguration r = apply_solver_output(spec, s, out);
  EXPECT_EQ(r.explicit_paths.at(0), (std::vector<EdgePath>{{4}}));
  EXPECT_EQ(r.explicit_paths.at(1), (std::vector<EdgePath>{{0, 2}, {4}}));
  // AC: 9000 + 4500.
  EXPECT_DOUBLE_EQ(total_load(with_routing(s, r)).load[4], 13500);
}

TEST(ApplyOutput, ExplicitPathsReplaceSegments) {
  Setting s = testing::two_demand_triangle();
  s.routing.sr_segments[0] = {0, 1, 2};
  std::istringstream out("d1; 0; 0,2\n");
  RoutingConfiguration r = apply_solver_output(fixture_spec(""), s, out);
  EXPECT_FALSE(r.sr_segments.contains(0));
  EXPECT_TRUE(validate_setting(with_routing(s, r)).empty());
}

TEST(ApplyOutput, SegmentsAndWeights) {
  Setting s = testing::two_demand_triangle();
  std::istringstream seg("d2; x; 0,1,2\n");
  RoutingConfiguration r =
      apply_solver_output(fixture_spec("", OptimizationEffect::kSetSegments), s, seg);
  EXPECT_EQ(r.sr_segments.at(1), (SegmentList{0, 1, 2}));
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, r)), 0.9);

  std::istringstream twice("d2; x; 0,1,2\nd2; x; 0,2\n");
  EXPECT_THROW(apply_solver_output(fixture_spec("", OptimizationEffect::kSetSegments), s, twice),
               ParseError);

  std::istringstream w("AC; -; 2\n");
  RoutingConfiguration rw =
      apply_solver_output(fixture_spec("", OptimizationEffect::kSetLinkWeights), s, w);
  EXPECT_EQ(rw.weights[4], 2);
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, rw)), 0.9);
}

TEST(ApplyOutput, ErrorsNameTheLine) {
  Setting s = testing::two_demand_triangle();
  auto fails = [&](const std::string& text, OptimizationEffect e, int line,
                   const std::string& needle) {
    std::istringstream in(text);
    try {
      apply_solver_output(fixture_spec("", e), s, in);
      ADD_FAILURE() << "no error for " << text;
    } catch (const ParseError& err) {
      EXPECT_EQ(err.line(), line) << text;
      EXPECT_NE(std::string(err.what()).find(needle), std::string::npos) << err.what();
    }
  };
  fails("d1; 0; 0,2\nzz; 0; 0,2\n", OptimizationEffect::kSetExplicitPaths, 2, "zz");
  fails("d1; 0; 1,2\n", OptimizationEffect::kSetExplicitPaths, 1, "source");
  fails("d1; 0; 0,9\n", OptimizationEffect::kSetExplicitPaths, 1, "");
  fails("XY; -; 2\n", OptimizationEffect::kSetLinkWeights, 1, "XY");
  fails("AC; -; 0\n", OptimizationEffect::kSetLinkWeights, 1, "weight");
  fails("AC; -; two\n", OptimizationEffect::kSetLinkWeights, 1, "");
}

TEST(ApplyOutput, LenientSkipsBadLines) {
  Setting s = testing::two_demand_triangle();
  std::istringstream in("d1; 0; 0,2\nd2; 0; garbage\nd2; 0; 0,1,2\n");
  RoutingConfiguration r = apply_solver_output(fixture_spec(""), s, in, true);
  EXPECT_EQ(r.explicit_paths.size(), 2u);
  EXPECT_DOUBLE_EQ(max_utilization(with_routing(s, r)), 0.9);
}

TEST(ExternalSolver, RunsFixtureAndReadsTime) {
  Setting s = testing::load_fixture("bridge");
  ExternalRun run = run_external_solver(fixture_spec(""), s, SolverBudget::wall_clock(20000));
  EXPECT_FALSE(run.truncated);
  ASSERT_TRUE(run.reported_time_ms.has_value());
  EXPECT_GE(*run.reported_time_ms, 250);
  EXPECT_LT(*run.reported_time_ms, 5000);
  EXPECT_EQ(run.routing.explicit_paths.size(), s.traffic.size());
  const Setting routed = with_routing(s, run.routing);
  EXPECT_TRUE(validate_setting(routed).empty());
  EXPECT_NEAR(max_utilization(routed), testing::oracle_max_utilization(routed), 1e-12);
}

TEST(ExternalSolver, SegmentsAndWeightsModes) {
  Setting s = testing::load_fixture("bridge");
  ExternalRun seg = run_external_solver(
      fixture_spec("--mode segments", OptimizationEffect::kSetSegments), s,
      SolverBudget::wall_clock(20000));
  EXPECT_FALSE(seg.routing.sr_segments.empty());
  EXPECT_TRUE(validate_setting(with_routing(s, seg.routing)).empty());
  ExternalRun w = run_external_solver(
      fixture_spec("--mode weights", OptimizationEffect::kSetLinkWeights), s,
      SolverBudget::wall_clock(20000));
  for (EdgeId e = 0; e < s.topology.edge_count(); ++e) {
    const Edge& ed = s.topology.edge(e);
    EXPECT_EQ(w.routing.weights[e], 1 + (ed.src + ed.dst) % 3);
  }
}

TEST(ExternalSolver, NonzeroExitCarriesStderr) {
  Setting s = testing::two_demand_triangle();
  try {
    run_external_solver(fixture_spec("--fail"), s, SolverBudget::wall_clock(20000));
    ADD_FAILURE() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("status 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("crashed on purpose"), std::string::npos);
  }
}

TEST(ExternalSolver, MissingOutputFile) {
  ExternalSolverSpec spec = fixture_spec("");
  spec.run_command = "true $TOPOFILE $DEMANDFILE $OUTFILE";
  EXPECT_THROW(run_external_solver(spec, testing::two_demand_triangle(),
                                   SolverBudget::wall_clock(20000)),
               std::runtime_error);
}

// Killed at the deadline; whatever it wrote so far is applied.
TEST(ExternalSolver, TimeoutKeepsPartialOutput) {
  Setting s = testing::load_fixture("bridge");
  const auto start = std::chrono::steady_clock::now();
  ExternalRun run = run_external_solver(fixture_spec("--sleep 5"), s,
                                        SolverBudget::wall_clock(1500));
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
  EXPECT_TRUE(run.truncated);
  EXPECT_LT(ms, 4000);
  EXPECT_EQ(run.routing.explicit_paths.size(), 1u);
}

TEST(ExternalSolver, GarbageOutputFailsTheRun) {
  SolverRegistry reg = SolverRegistry::with_builtins();
  register_external_solvers(reg, {fixture_spec("--garbage")});
  ScenarioSpec spec;
  spec.solver_name = "bfs";
  spec.budget = SolverBudget::wall_clock(20000);
  ScenarioReport rep = run_single_solver(spec, reg, testing::two_demand_triangle());
  EXPECT_TRUE(rep.records[0].failed);
  EXPECT_NE(rep.records[0].error.find("line 2"), std::string::npos) << rep.records[0].error;
  EXPECT_DOUBLE_EQ(rep.records[0].post_max_utilization, 1.8);
}

TEST(ExternalSolver, RegisteredSolverRunsInScenario) {
  SolverRegistry reg = SolverRegistry::with_builtins();
  ExternalSolverSpec clash = fixture_spec("");
  clash.name = "identity";
  register_external_solvers(reg, {fixture_spec(""), clash});
  EXPECT_TRUE(reg.contains("bfs"));
  EXPECT_EQ(reg.create("identity")->name(), "identity");
  EXPECT_EQ(dynamic_cast<ExternalSolver*>(reg.create("identity").get()), nullptr);

  ScenarioSpec spec;
  spec.kind = ScenarioKind::kOverhead;
  spec.solver_name = "bfs";
  spec.budget = SolverBudget::wall_clock(20000);
  ScenarioReport rep = run_scenario(spec, reg, {testing::load_fixture("bridge")});
  const ScenarioRecord& r = rep.records[0];
  EXPECT_FALSE(r.failed) << r.error;
  EXPECT_GE(r.solve_time_ms, 250);
  EXPECT_EQ(r.overhead->modified_explicit_paths, 2);
}

}  // namespace
}  // namespace repetita
