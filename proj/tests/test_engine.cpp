#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lr/engine.hpp"
#include "lr/flatten.hpp"
#include "support/testutil.hpp"

using namespace lr;
using lr::testutil::as_set;
using lr::testutil::parse_ok;

namespace {

WorldFile toy_world() {
  WorldFile w;
  SceneObject o;
  o.name = "obj1";
  o.parent = EnvironmentalModel::kRoot;
  o.local = transform_from_xyzrpy({0.05, 0, 0}, {0, 0, 0});
  o.attrs["width"] = 0.02;
  o.attrs["ready"] = true;
  o.attrs["off"] = false;
  w.em.add_object(o);
  w.perception.latencyTicks = 3;
  return w;
}

struct Harness {
  ModelSet set;
  SymbolTable table;

  explicit Harness(const std::string& text) : set(as_set(parse_ok(text))) {
    std::vector<Diagnostic> diags;
    table = resolve_names(set, diags);
    REQUIRE(diags.empty());
    auto v = validate(set, table);
    REQUIRE(!has_errors(v));
  }

  RunState start(const std::string& root, const WorldFile& w, std::uint64_t seed = 1,
                 RunLimits limits = {}) {
    return init_run(table, root, w, seed, limits, count_components(set));
  }

  std::pair<RunOutcome, ExecutionTrace> run(const std::string& root, const WorldFile& w,
                                            std::uint64_t seed = 1, RunLimits limits = {}) {
    RunState r = start(root, w, seed, limits);
    return run_to_end(r);
  }
};

std::vector<std::string> kinds(const ExecutionTrace& t) {
  std::vector<std::string> out;
  for (const auto& e : t) out.push_back(e.kind);
  return out;
}

}  // namespace

TEST_CASE("init_run: single unguarded start enters the root") {
  Harness h(
      "skill S { start s0; end done; action A { start a; end b; exec tool.release(); } "
      "on self.s0 -> A.a; on A.b -> self.done; }");
  WorldFile w = toy_world();
  RunState r = h.start("S", w);
  REQUIRE(r.trace().size() == 1);
  CHECK(r.trace()[0].kind == "Entered");
  CHECK(r.trace()[0].subject == "S");
  CHECK(r.frames().back().state == Frame::State::AtStartPort);
  CHECK(r.frames().back().port == "s0");
}

TEST_CASE("init_run: guarded starts select the first whose condition holds") {
  std::string body =
      " end done; action A { start a; end b; exec tool.release(); } "
      "on self.s0 -> A.a; on self.s1 -> A.a; on A.b -> self.done; }";
  WorldFile w = toy_world();

  Harness first("skill S { start s0 when world.obj1.off; start s1 when world.obj1.ready;" + body);
  RunState r1 = first.start("S", w);
  CHECK(r1.frames().back().port == "s1");  // first guard false, second true

  Harness both("skill S { start s0 when world.obj1.ready; start s1 when world.obj1.ready;" + body);
  RunState r2 = both.start("S", w);
  CHECK(r2.frames().back().port == "s0");  // declaration order breaks the tie

  Harness none("skill S { start s0 when world.obj1.off; start s1 when world.obj1.off;" + body);
  CHECK_THROWS_AS(none.start("S", w), NoEnabledStartError);
}

TEST_CASE("a vacuous leaf stops on its first execute step") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> self.done; }");
  WorldFile w = toy_world();
  RunState r = h.start("S", w);
  step(r);  // descend
  auto events = step(r);  // execute
  REQUIRE(events.size() >= 2);
  CHECK(events[0].kind == "StopTriggered");
  CHECK(events[0].data["reason"] == "stop_condition");
  CHECK(events[1].kind == "Finished");
}

TEST_CASE("two-leaf net: the full micro-step event order") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true "
      "yields world.obj1.flag := result.grasped; } "
      "action B { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; "
      "on A.b -> B.a pre true post true; "
      "on B.b -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Success);
  std::vector<std::string> expected = {
      "Entered",       // S
      "TransitionFired", "Entered", "ExecBegun",       // descend into A
      "StopTriggered", "Finished",                     // A stops at b
      "PreEvaluated",  "EmUpdated", "PostEvaluated",   // firing A.b -> B.a
      "TransitionFired", "Entered", "ExecBegun",       // enter B
      "StopTriggered", "Finished",                     // B stops
      "TransitionFired", "Finished",                   // B.b -> self.done
      "RunResult",
  };
  CHECK(kinds(trace) == expected);
  // Entry of A precedes its stop,
  // which precedes the pre/update/post/fire chain, which precedes B.
  CHECK(trace[2].subject == "S/A");
  CHECK(trace[7].subject == "S/A");  // EmUpdated carries the finished node
  CHECK(trace[7].data["path"] == "world.obj1.flag");
  CHECK(trace[9].data["source"] == "A.b");
  CHECK(trace[9].data["target"] == "B.a");
  CHECK(trace[10].subject == "S/B");
  auto violations = check_trace(trace);
  CHECK(violations.empty());
}

TEST_CASE("two enabled transitions: first declared fires") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "action B { start a; end b; exec tool.release() until true; } "
      "action C { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; "
      "on A.b -> B.a pre true; "
      "on A.b -> C.a; "
      "on B.b -> self.done; on C.b -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Success);
  bool enteredB = false, enteredC = false;
  for (const auto& e : trace) {
    if (e.kind == "Entered" && e.subject == "S/B") enteredB = true;
    if (e.kind == "Entered" && e.subject == "S/C") enteredC = true;
  }
  CHECK(enteredB);
  CHECK(!enteredC);
}

TEST_CASE("trivial nested task succeeds within 10 micro-steps") {
  Harness h(
      "task T { start s0; end done; "
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> self.done; } "
      "on self.s0 -> S.s0; on S.done -> self.done; }");
  WorldFile w = toy_world();
  RunState r = h.start("T", w);
  int steps = 0;
  while (!r.finished()) {
    step(r);
    ++steps;
  }
  CHECK(r.outcome().status == RunStatus::Success);
  CHECK(steps <= 10);
}

TEST_CASE("an end port with only a false pre deadlocks") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> self.done pre false; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Deadlock);
  CHECK(outcome.detail.find("S/A.b") != std::string::npos);
}

TEST_CASE("eval_condition: spec cases") {
  SensorSnapshot snap;
  snap["robot.torque.z"] = 0.33;
  EnvironmentalModel em;
  std::vector<Diagnostic> d;
  auto c1 = parse_condition("robot.torque.z >= 0.32", d);
  CHECK(eval_condition(*c1, snap, em) == true);
  auto c2 = parse_condition("not true", d);
  CHECK(eval_condition(*c2, snap, em) == false);
  auto c3 = parse_condition("nosuch.channel < 1", d);
  CHECK_THROWS_AS(eval_condition(*c3, snap, em), UnknownChannelError);
  snap["robot.converged"] = false;
  auto c4 = parse_condition("robot.converged >= 1", d);
  CHECK_THROWS_AS(eval_condition(*c4, snap, em), TypeMismatchError);
}

TEST_CASE("eval_condition agrees with the independent reference evaluator") {
  std::mt19937_64 rng(555);
  int agreements = 0;
  for (int i = 0; i < 1000; ++i) {
    CondPtr c = lr::testgen::generate_condition(rng);
    auto vals = lr::testutil::random_valuation(rng);
    lr::testutil::EvalFixture fx(vals);
    bool got = eval_condition(*c, fx.snap, fx.em);
    bool want = lr::testgen::ref_eval(*c, vals);
    if (got == want) ++agreements;
  }
  CHECK(agreements == 1000);
}

TEST_CASE("parameter bindings: defaults overridden by set bindings at fire time") {
  Harness h(
      "skill S(num w = 0.03) { start s0; end done; "
      "action G(num jaw = 0.01) { start a; end b; exec tool.grip(width = jaw); } "
      "on self.s0 -> G.a set jaw = w; on G.b -> self.done; }");
  WorldFile w = toy_world();
  RunState r = h.start("S", w);
  step(r);  // descend binds the environment
  REQUIRE(r.frames().size() == 2);
  CHECK(r.frames().back().env.at("jaw").as_num() == 0.03);
  auto [outcome, trace] = run_to_end(r);
  CHECK(outcome.status == RunStatus::Success);
  // The jaw stopped at the bound width, not the default.
  CHECK(std::get<double>(r.rig().snapshot().at("tool.width")) == doctest::Approx(0.03));
}

TEST_CASE("postcondition failure aborts when no fault port exists") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "action B { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> B.a post false; on B.b -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::PostconditionFailed);
  CHECK(outcome.detail == "A.b -> B.a");
}

TEST_CASE("postcondition failure jumps to the enclosing fault port") {
  Harness h(
      "task T { start s0; end done; end bad; "
      "skill S { start s0; end done; end fault; "
      "action A { start a; end b; exec tool.release() until true; } "
      "action B { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> B.a post false; on B.b -> self.done; } "
      "on self.s0 -> S.s0; on S.done -> self.done; on S.fault -> self.bad; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("T", w);
  CHECK(outcome.status == RunStatus::Success);
  CHECK(outcome.endPort == "bad");
  bool faultFinish = false;
  for (const auto& e : trace)
    if (e.kind == "Finished" && e.subject == "T/S" && e.data["port"] == "fault")
      faultFinish = true;
  CHECK(faultFinish);
}

TEST_CASE("a guarded leaf start that is false at entry deadlocks") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a when world.obj1.off; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Deadlock);
  CHECK(outcome.detail.find("start condition false") != std::string::npos);
}

TEST_CASE("leaf end-port guards select the first that holds, else the first declared") {
  Harness h(
      "skill S { start s0; end done; end missed; "
      "action G { start a; end ok when tool.grasped; end no; exec tool.grip(); } "
      "on self.s0 -> G.a; on G.ok -> self.done; on G.no -> self.missed; }");
  WorldFile far;  // nothing within reach
  SceneObject o;
  o.name = "far";
  o.parent = EnvironmentalModel::kRoot;
  o.local = transform_from_xyzrpy({0.5, 0, 0}, {0, 0, 0});
  o.attrs["width"] = 0.02;
  far.em.add_object(o);
  auto [outcome, trace] = h.run("S", far);
  CHECK(outcome.status == RunStatus::Success);
  CHECK(outcome.endPort == "missed");

  WorldFile near = toy_world();  // obj1 at 0.05 lateral... still out of reach
  auto [outcome2, trace2] = h.run("S", near);
  CHECK(outcome2.endPort == "missed");
}

TEST_CASE("timeout surfaces as an outcome with the session stopped") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; "
      "exec robot.moveCartesian(goal = [0, 0, -0.002, 0, 0, 0], goalRef = \"obj1\") "
      "until robot.force.z >= 999; } "
      "on self.s0 -> A.a; on A.b -> self.done; }");
  WorldFile w = toy_world();
  PlaneFeature plane;
  plane.normal = Vector3d::UnitZ();
  plane.offset = 0.0;
  plane.k = 100.0;
  w.contacts.emplace_back(plane);
  RunLimits limits;
  limits.maxTicks = 50;
  auto [outcome, trace] = h.run("S", w, 1, limits);
  CHECK(outcome.status == RunStatus::Timeout);
  CHECK(outcome.ticksUsed == 50);
  CHECK(trace.back().kind == "RunResult");
}

TEST_CASE("runtime evaluation errors become Fault outcomes, not crashes") {
  Harness h(
      "skill S { start s0; end done; "
      "action A { start a; end b; exec tool.release() until robot.pose.z < 9; } "
      "on self.s0 -> A.a; on A.b -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Fault);  // no robot channels published yet
  CHECK(outcome.detail.find("unknown channel") != std::string::npos);
}

TEST_CASE("determinism: identical runs produce identical trace bytes") {
  for (std::uint64_t seed : {1ull, 9ull}) {
    auto gen = lr::testgen::generate_model(seed);
    ModelSet set = as_set(gen.components);
    std::vector<Diagnostic> diags;
    SymbolTable table = resolve_names(set, diags);
    REQUIRE(validate(set, table).empty());
    WorldFile w = load_world(lr::testutil::repo_path("tests/fixtures/gen_world.json"));
    auto once = [&] {
      RunState r = init_run(table, gen.rootName, w, 11, {}, count_components(set));
      auto [outcome, trace] = run_to_end(r);
      std::string bytes;
      for (const auto& e : trace) bytes += trace_line(e) + "\n";
      return bytes;
    };
    CHECK(once() == once());
  }
}

TEST_CASE("generated models finish with bounded event counts and valid traces") {
  WorldFile w = load_world(lr::testutil::repo_path("tests/fixtures/gen_world.json"));
  for (std::uint64_t seed = 100; seed < 120; ++seed) {
    auto gen = lr::testgen::generate_model(seed);
    ModelSet set = as_set(gen.components);
    std::vector<Diagnostic> diags;
    SymbolTable table = resolve_names(set, diags);
    REQUIRE(diags.empty());
    REQUIRE(validate(set, table).empty());
    RunState r = init_run(table, gen.rootName, w, seed, {}, count_components(set));
    auto [outcome, trace] = run_to_end(r);
    INFO("seed ", seed);
    CHECK(outcome.status == RunStatus::Success);
    CHECK(check_trace(trace).empty());
    CHECK(trace.size() <= 12 * static_cast<size_t>(outcome.ticksUsed) + 200);
  }
}

TEST_CASE("a composite child re-entered in a loop rebuilds its configuration each pass") {
  Harness h(
      "task T { start s0; end done; "
      "skill Step { start s0; end done; "
      "action drop { start a; end b; "
      "exec robot.moveCartesian(goal = [0, 0, -0.02, 0, 0, 0], goalRef = \"tcp\") "
      "yields world.tcp.pose := result.pose; } "
      "on self.s0 -> drop.a; on drop.b -> self.done; } "
      "on self.s0 -> Step.s0; "
      "on Step.done -> Step.s0 pre robot.pose.z > -0.07; "
      "on Step.done -> self.done pre robot.pose.z <= -0.07; }");
  WorldFile w;
  SceneObject tcp;
  tcp.name = "tcp";
  tcp.parent = EnvironmentalModel::kRoot;
  w.em.add_object(tcp);
  auto [outcome, trace] = h.run("T", w);
  REQUIRE(outcome.status == RunStatus::Success);
  int entries = 0;
  for (const auto& e : trace)
    if (e.kind == "Entered" && e.subject == "T/Step") ++entries;
  // 2 cm per pass from z=0 until z <= -0.07: four descents.
  CHECK(entries == 4);
  CHECK(outcome.finalEmRevision == 4);  // one pose update per pass
  CHECK(check_trace(trace).empty());
}

TEST_CASE("conditions can read environmental-model attributes written by updates") {
  // The grasp result lands in the model when G's outgoing transition
  // fires; M's transitions then branch on the stored attribute (a pre
  // reads the pre-update model, so G cannot see its own write).
  Harness h(
      "skill S { start s0; end done; end abandoned; "
      "action G { start a; end b; exec tool.grip() "
      "yields world.obj1.held := result.grasped; } "
      "action M { start a; end b; exec tool.release() until true; } "
      "action N { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> G.a; "
      "on G.b -> M.a; "
      "on M.b -> self.done pre world.obj1.held; "
      "on M.b -> N.a pre not world.obj1.held; "
      "on N.b -> self.abandoned; }");
  WorldFile w = toy_world();  // obj1 is out of grasp reach
  auto [outcome, trace] = h.run("S", w);
  CHECK(outcome.status == RunStatus::Success);
  CHECK(outcome.endPort == "abandoned");
  // The attribute write is visible in the trace with its revision.
  bool sawUpdate = false;
  for (const auto& e : trace)
    if (e.kind == "EmUpdated" && e.data["path"] == "world.obj1.held") {
      sawUpdate = true;
      CHECK(e.data["value"] == false);
      CHECK(e.data["revision"] == 1);
    }
  CHECK(sawUpdate);
}

TEST_CASE("exactly one active leaf at every event") {
  Harness h(
      "task T { start s0; end done; "
      "skill S1 { start s0; end done; "
      "action A { start a; end b; exec tool.release() until true; } "
      "on self.s0 -> A.a; on A.b -> self.done; } "
      "skill S2 { start s0; end done; "
      "action B { start a; end b; exec tool.grip(width = 0.05); } "
      "on self.s0 -> B.a; on B.b -> self.done; } "
      "on self.s0 -> S1.s0; on S1.done -> S2.s0; on S2.done -> self.done; }");
  WorldFile w = toy_world();
  auto [outcome, trace] = h.run("T", w);
  CHECK(outcome.status == RunStatus::Success);
  CHECK(check_trace(trace).empty());
}
