#include "modelgen.hpp"

#include <fmt/format.h>

namespace lr::testgen {

namespace {

struct Gen {
  std::mt19937_64 rng;
  int libActions = 0;
  int libSkills = 0;
  std::vector<GenericActionComponent> libs;

  explicit Gen(std::uint64_t seed) : rng(seed) {}

  int pick(int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); }
  bool chance(int pct) { return pick(1, 100) <= pct; }
  double small() { return pick(-20, 20) / 1000.0; }

  Expr lit(Value v) {
    Expr e;
    e.node = std::move(v);
    return e;
  }
  Expr pref(std::string name) {
    Expr e;
    e.node = ParamRef{std::move(name)};
    return e;
  }
  CondPtr constant(bool b) { return make_cond(ConditionExpr{CondConst{b}, {}}); }

  ConditionPort port(const std::string& name, PortKind k, CondPtr guard = nullptr) {
    ConditionPort p;
    p.name = name;
    p.kind = k;
    p.guard = std::move(guard);
    return p;
  }

  GenericActionComponent make_action(const std::string& name) {
    GenericActionComponent a;
    a.name = name;
    a.level = Level{Level::Tag::Action, 0};
    a.ports.push_back(port("s0", PortKind::Start));
    if (chance(25)) a.ports.push_back(port("skip", PortKind::End, constant(false)));
    a.ports.push_back(port("done", PortKind::End));

    DeviceCall call;
    switch (pick(0, 4)) {
      case 0:
        call.path = "tool.release";
        if (chance(40)) {
          UpdateBinding u;
          u.emPath = {"world", "obj1", "flag"};
          u.resultField = "grasped";
          call.updates.push_back(u);
        }
        break;
      case 1: {
        call.path = "tool.grip";
        call.args.push_back(ArgBinding{"width", lit(Value::num(0.07)), {}});
        break;
      }
      case 2:
      case 3: {
        call.path = "robot.moveCartesian";
        call.args.push_back(ArgBinding{
            "goal", lit(Value::vec({small(), small(), 0.05 + small(), 0, 0, pick(-3, 3) / 10.0})),
            {}});
        call.args.push_back(ArgBinding{"goalRef", lit(Value::str("world")), {}});
        if (chance(50))
          call.args.push_back(
              ArgBinding{"stiffness", lit(Value::vec({900, 900, 900, 45, 45, 45})), {}});
        if (chance(30)) {
          ConditionExpr c{CondCompare{"time", CmpOp::Ge, 0.03}, {}};
          call.stop = make_cond(std::move(c));
        }
        if (chance(30)) {
          UpdateBinding u;
          u.emPath = {"world", "obj1", "pose"};
          u.resultField = "pose";
          call.updates.push_back(u);
        }
        break;
      }
      case 4: {
        call.path = "perception.localize";
        a.params.push_back(Parameter{"obj", PType::String, Value::str("obj1"), {}});
        call.args.push_back(ArgBinding{"object", pref("obj"), {}});
        UpdateBinding u;
        u.emPath = {"world", "obj", "pose"};  // parameter-substituted segment
        u.resultField = "pose";
        call.updates.push_back(u);
        break;
      }
    }
    a.exec = std::move(call);
    return a;
  }

  /// Linear net of `n` children with every port wired; dead branches with
  /// false pre-conditions exercise the declaration-order tie-break.
  void wire(GenericActionComponent& c) {
    auto resolve = [&](const Child& ch) -> const GenericActionComponent* {
      const GenericActionComponent* comp = nullptr;
      if (ch.is_inline()) {
        comp = &ch.inline_component();
      } else {
        for (const auto& l : libs)
          if (l.name == ch.ref().qualifiedName) comp = &l;
      }
      // Extensions inherit their ports from the base.
      while (comp && comp->extendsRef) {
        const GenericActionComponent* base = nullptr;
        for (const auto& l : libs)
          if (l.name == *comp->extendsRef) base = &l;
        comp = base;
      }
      return comp;
    };
    auto endPorts = [&](const Child& ch) {
      std::vector<std::string> out;
      if (const auto* comp = resolve(ch))
        for (const auto& p : comp->ports)
          if (p.kind == PortKind::End) out.push_back(p.name);
      return out;
    };
    auto startBindings = [&](const Child& ch) {
      std::vector<ArgBinding> binds;
      const GenericActionComponent* comp = resolve(ch);
      if (comp && chance(50)) {
        for (const auto& p : comp->params) {
          if (p.type == PType::String && chance(60))
            binds.push_back(ArgBinding{p.name, lit(Value::str("obj1")), {}});
          else if (p.type == PType::Num && chance(60))
            binds.push_back(ArgBinding{p.name, lit(Value::num(pick(0, 9))), {}});
        }
      }
      return binds;
    };

    size_t n = c.children.size();
    for (size_t i = 0; i <= n; ++i) {
      if (i == 0) {
        Transition t;
        t.source = Endpoint{"self", "s0", {}};
        t.target = Endpoint{c.children[0].instance_name(), "s0", {}};
        if (chance(20)) t.pre = constant(true);
        t.bindings = startBindings(c.children[0]);
        c.transitions.push_back(std::move(t));
        continue;
      }
      const Child& from = c.children[i - 1];
      for (const auto& portName : endPorts(from)) {
        if (i < n && chance(20)) {
          // Dead branch, never taken: first by declaration order but false.
          Transition dead;
          dead.source = Endpoint{from.instance_name(), portName, {}};
          dead.target = Endpoint{c.children[pick(0, static_cast<int>(n) - 1)].instance_name(),
                                 "s0", {}};
          dead.pre = constant(false);
          c.transitions.push_back(std::move(dead));
        }
        Transition t;
        t.source = Endpoint{from.instance_name(), portName, {}};
        if (i < n) {
          t.target = Endpoint{c.children[i].instance_name(), "s0", {}};
          t.bindings = startBindings(c.children[i]);
        } else {
          t.target = Endpoint{"self", "done", {}};
        }
        if (chance(20)) {
          ConditionExpr pre{CondCompare{"time", CmpOp::Ge, 0.0}, {}};
          t.pre = make_cond(std::move(pre));
        }
        if (chance(15)) t.post = constant(true);
        c.transitions.push_back(std::move(t));
      }
    }
  }

  GenericActionComponent make_skill(const std::string& name) {
    GenericActionComponent s;
    s.name = name;
    s.level = Level{Level::Tag::Skill, 0};
    s.ports.push_back(port("s0", PortKind::Start));
    s.ports.push_back(port("done", PortKind::End));
    if (chance(30))
      s.params.push_back(Parameter{"target", PType::String, Value::str("obj1"), {}});

    int n = pick(1, 4);
    for (int i = 0; i < n; ++i) {
      std::string childName = fmt::format("a{}", i);
      if (chance(25)) {
        // Reference a library action, creating it on first use.
        std::string libName;
        if (libActions > 0 && chance(60)) {
          libName = fmt::format("LibAction{}", pick(0, libActions - 1));
        } else {
          libName = fmt::format("LibAction{}", libActions++);
          libs.push_back(make_action(libName));
        }
        ChildRef ref;
        ref.qualifiedName = libName;
        ref.alias = childName;
        for (const auto& p : libs.back().params) {
          if (libs.back().name == libName && p.type == PType::String && chance(50))
            ref.args.push_back(ArgBinding{p.name, lit(Value::str("obj1")), {}});
        }
        s.children.push_back(Child{std::move(ref)});
      } else {
        s.children.push_back(Child{make_action(childName)});
      }
    }
    wire(s);
    return s;
  }

  GenericActionComponent make_task(const std::string& name) {
    GenericActionComponent t;
    t.name = name;
    t.level = Level{Level::Tag::Task, 0};
    t.ports.push_back(port("s0", PortKind::Start));
    t.ports.push_back(port("done", PortKind::End));

    int n = pick(1, 3);
    for (int i = 0; i < n; ++i) {
      std::string childName = fmt::format("sk{}", i);
      if (chance(30)) {
        std::string libName = fmt::format("LibSkill{}", libSkills++);
        libs.push_back(make_skill(libName));
        if (chance(40)) {
          // Extension that overrides a parameter default.
          GenericActionComponent ext;
          ext.name = fmt::format("LibSkill{}", libSkills++);
          ext.level = Level{Level::Tag::Skill, 0};
          ext.extendsRef = libName;
          if (!libs.back().params.empty()) {
            Parameter p = libs.back().params.front();
            p.defaultValue = Value::str("obj1");
            ext.params.push_back(std::move(p));
          } else {
            ext.params.push_back(Parameter{"gain", PType::Num, Value::num(pick(1, 5)), {}});
          }
          libName = ext.name;
          libs.push_back(std::move(ext));
        }
        ChildRef ref;
        ref.qualifiedName = libName;
        ref.alias = childName;
        t.children.push_back(Child{std::move(ref)});
      } else {
        t.children.push_back(Child{make_skill(childName)});
      }
    }
    wire(t);
    return t;
  }
};

}  // namespace

GeneratedModel generate_model(std::uint64_t seed) {
  Gen g(seed);
  GenericActionComponent root = g.make_task("Root");
  GeneratedModel out;
  out.components = std::move(g.libs);
  out.components.push_back(std::move(root));
  out.rootName = "Root";
  return out;
}

CondPtr generate_condition(std::mt19937_64& rng, int maxDepth) {
  auto pick = [&](int lo, int hi) { return lo + static_cast<int>(rng() % (hi - lo + 1)); };
  static const char* numChannels[] = {"a.x", "a.y", "b.z", "world.obj.val"};
  static const char* boolChannels[] = {"f.ok", "g.up", "world.obj.flag"};
  if (maxDepth == 0 || pick(0, 9) < 4) {
    switch (pick(0, 2)) {
      case 0: {
        CondCompare c;
        c.path = numChannels[pick(0, 3)];
        c.op = static_cast<CmpOp>(pick(0, 5));
        c.literal = pick(-50, 50) / 10.0;
        return make_cond(ConditionExpr{c, {}});
      }
      case 1: return make_cond(ConditionExpr{CondBool{boolChannels[pick(0, 2)]}, {}});
      default: return make_cond(ConditionExpr{CondConst{pick(0, 1) == 1}, {}});
    }
  }
  switch (pick(0, 2)) {
    case 0:
      return make_cond(ConditionExpr{
          CondOr{generate_condition(rng, maxDepth - 1), generate_condition(rng, maxDepth - 1)}, {}});
    case 1:
      return make_cond(ConditionExpr{
          CondAnd{generate_condition(rng, maxDepth - 1), generate_condition(rng, maxDepth - 1)}, {}});
    default:
      return make_cond(ConditionExpr{CondNot{generate_condition(rng, maxDepth - 1)}, {}});
  }
}

}  // namespace lr::testgen
