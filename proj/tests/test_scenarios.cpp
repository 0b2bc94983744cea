#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lr/engine.hpp"
#include "lr/scenario.hpp"

#include <fstream>
#include <sstream>
#include "support/testutil.hpp"

using namespace lr;
using lr::testutil::repo_path;

namespace {

struct LoadedBundle {
  ScenarioBundle bundle;
  ModelSet set;
  SymbolTable table;
  WorldFile world;

  explicit LoadedBundle(const std::string& name)
      : bundle(load_scenario(name, repo_path("scenarios"))) {
    set = load_model(bundle.modelFile, {});
    REQUIRE(set.diagnostics.empty());
    std::vector<Diagnostic> diags;
    table = resolve_names(set, diags);
    REQUIRE(diags.empty());
    world = load_world(bundle.worldFile);
  }

  std::pair<RunOutcome, ExecutionTrace> run(std::uint64_t seed) {
    RunState r = init_run(table, bundle.rootName, world, seed, {}, count_components(set));
    return run_to_end(r);
  }
};

const GenericActionComponent* find_nested(const GenericActionComponent& c,
                                          const std::string& name) {
  if (c.name == name) return &c;
  for (const auto& ch : c.children) {
    if (!ch.is_inline()) continue;
    if (const auto* f = find_nested(ch.inline_component(), name)) return f;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("screw iteration oracle") {
  CHECK(expected_screw_iterations(0.020, 0.005, 0.005) == 3);
  CHECK(expected_screw_iterations(0.010, 0.010 - 1e-6, 0.005) == 1);
  CHECK(expected_screw_iterations(0.019, 0.005, 0.005) == 3);  // ceil(2.8)
  CHECK(expected_screw_iterations(0.021, 0.005, 0.005) == 4);  // ceil(3.2)
  CHECK_THROWS_AS(expected_screw_iterations(0.005, 0.020, 0.005), std::domain_error);
  CHECK_THROWS_AS(expected_screw_iterations(0.020, 0.005, 0.0), std::domain_error);
}

TEST_CASE("unknown scenario name throws") {
  CHECK_THROWS_AS(load_scenario("welding"), UnknownScenarioError);
}

TEST_CASE("both bundles validate with zero findings under the standard profile") {
  for (const char* name : {"screwing", "rail"}) {
    LoadedBundle b(name);
    auto diags = validate(b.set, b.table, Profile::Standard);
    INFO(name);
    CHECK(diags.empty());  // neither errors nor warnings
  }
}

TEST_CASE("screwing bundle: the screw-down stop threshold is the 0.32 Nm literal") {
  LoadedBundle b("screwing");
  const GenericActionComponent* screwDown = nullptr;
  for (const auto& u : b.set.units)
    for (const auto& c : u.components)
      if (const auto* f = find_nested(c, "screwDown")) screwDown = f;
  REQUIRE(screwDown != nullptr);
  REQUIRE(screwDown->exec.has_value());
  REQUIRE(screwDown->exec->stop);
  const auto& cmp = std::get<CondCompare>(screwDown->exec->stop->node);
  CHECK(cmp.path == "robot.torque.z");
  CHECK(cmp.op == CmpOp::Ge);
  CHECK(cmp.literal == b.bundle.torqueLimit);
  CHECK(b.bundle.torqueLimit == 0.32);
}

TEST_CASE("screwing bundle: the turn-back commands -pi about the tool z-axis") {
  LoadedBundle b("screwing");
  const GenericActionComponent* turnBack = nullptr;
  for (const auto& u : b.set.units)
    for (const auto& c : u.components)
      if (const auto* f = find_nested(c, "turnBack")) turnBack = f;
  REQUIRE(turnBack != nullptr);
  const Value* goal = nullptr;
  const Value* goalRef = nullptr;
  for (const auto& a : turnBack->exec->args) {
    if (a.name == "goal") goal = &a.value.literal();
    if (a.name == "goalRef") goalRef = &a.value.literal();
  }
  REQUIRE(goal != nullptr);
  const auto& v = goal->as_vec();
  REQUIRE(v.size() == 6);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
  CHECK(v[3] == 0.0);
  CHECK(v[4] == 0.0);
  CHECK(v[5] == doctest::Approx(-M_PI).epsilon(1e-12));
  CHECK(goalRef->as_str() == "tcp");
}

TEST_CASE("rail bundle: one task definition referenced three times with distinct bindings") {
  LoadedBundle b("rail");
  const GenericActionComponent* root = b.table.lookup("RailAssembly");
  REQUIRE(root != nullptr);
  REQUIRE(root->children.size() == 3);
  std::set<std::string> parts;
  for (const auto& ch : root->children) {
    REQUIRE(!ch.is_inline());
    CHECK(ch.ref().qualifiedName == "PlugPart");
    for (const auto& a : ch.ref().args)
      if (a.name == "part") parts.insert(a.value.literal().as_str());
  }
  CHECK(parts == std::set<std::string>{"part1", "part2", "part3"});
  // Exactly one definition of the task in the file.
  int defs = 0;
  for (const auto& u : b.set.units)
    for (const auto& c : u.components)
      if (c.name == "PlugPart") ++defs;
  CHECK(defs == 1);
}

TEST_CASE("screwing run: success, and the loop count matches the oracle") {
  LoadedBundle b("screwing");
  auto [outcome, trace] = b.run(7);
  REQUIRE(outcome.status == RunStatus::Success);
  int screwDowns = 0;
  for (const auto& e : trace) {
    if (e.kind == "Entered" && e.subject == "ScrewTask/screwing/screwDown") ++screwDowns;
    if (e.kind == "StopTriggered" && e.subject == "ScrewTask/screwing/screwDown") {
      // Every screw-down stop reports the threshold reached.
      CHECK(e.data["snapshot"]["robot.torque.z"].get<double>() >= b.bundle.torqueLimit);
    }
  }
  CHECK(screwDowns == expected_screw_iterations(b.bundle.z0, b.bundle.zTarget,
                                                b.bundle.pitchPerTurn));
  CHECK(check_trace(trace).empty());
}

TEST_CASE("golden: screwing trace at seed 7 is frozen byte for byte") {
  // The screwing fixture runs noise-free, so its trace pins the frozen
  // JSONL schema and the engine semantics at once.
  LoadedBundle b("screwing");
  auto [outcome, trace] = b.run(7);
  REQUIRE(outcome.status == RunStatus::Success);
  std::string bytes;
  for (const auto& e : trace) bytes += trace_line(e) + "\n";
  std::string goldenPath = repo_path("tests/golden/screwing_trace_seed7.jsonl");
  if (std::getenv("LR_UPDATE_GOLDEN")) {
    std::ofstream out(goldenPath, std::ios::binary);
    out << bytes;
  }
  std::ifstream in(goldenPath, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(bytes == buf.str());
}

TEST_CASE("rail run: all three tasks finish in declared order") {
  LoadedBundle b("rail");
  auto [outcome, trace] = b.run(5);
  REQUIRE(outcome.status == RunStatus::Success);
  std::vector<std::string> finished;
  for (const auto& e : trace)
    if (e.kind == "Finished" &&
        (e.subject == "RailAssembly/p1" || e.subject == "RailAssembly/p2" ||
         e.subject == "RailAssembly/p3"))
      finished.push_back(e.subject);
  CHECK(finished == std::vector<std::string>{"RailAssembly/p1", "RailAssembly/p2",
                                             "RailAssembly/p3"});
  CHECK(check_trace(trace).empty());
}
