#include "lr/engine.hpp"

#include <fmt/format.h>

#include "lr/flatten.hpp"
#include "lr/printer.hpp"

namespace lr {

const char* run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Success: return "Success";
    case RunStatus::Deadlock: return "Deadlock";
    case RunStatus::Timeout: return "Timeout";
    case RunStatus::Fault: return "Fault";
    case RunStatus::PostconditionFailed: return "PostconditionFailed";
  }
  return "?";
}

namespace {

std::vector<std::string> split_dots(const std::string& s) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t dot = s.find('.'); ; dot = s.find('.', start)) {
    if (dot == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, dot - start));
    start = dot + 1;
  }
  return out;
}

std::string join_dots(const std::vector<std::string>& segs) {
  std::string out;
  for (size_t i = 0; i < segs.size(); ++i) {
    if (i) out += ".";
    out += segs[i];
  }
  return out;
}

double num_channel(const std::string& path, const SensorSnapshot& snap,
                   const EnvironmentalModel& em) {
  auto it = snap.find(path);
  if (it != snap.end()) {
    if (const double* d = std::get_if<double>(&it->second)) return *d;
    throw TypeMismatchError(fmt::format("channel '{}' is not numeric", path));
  }
  if (const AttrValue* a = em.find_attr(split_dots(path))) {
    if (const double* d = std::get_if<double>(a)) return *d;
    throw TypeMismatchError(fmt::format("attribute '{}' is not numeric", path));
  }
  throw UnknownChannelError(path);
}

bool bool_channel(const std::string& path, const SensorSnapshot& snap,
                  const EnvironmentalModel& em) {
  auto it = snap.find(path);
  if (it != snap.end()) {
    if (const bool* b = std::get_if<bool>(&it->second)) return *b;
    throw TypeMismatchError(fmt::format("channel '{}' is not boolean", path));
  }
  if (const AttrValue* a = em.find_attr(split_dots(path))) {
    if (const bool* b = std::get_if<bool>(a)) return *b;
    throw TypeMismatchError(fmt::format("attribute '{}' is not boolean", path));
  }
  throw UnknownChannelError(path);
}

nlohmann::json snapshot_json(const SensorSnapshot& snap) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : snap) {
    if (const double* d = std::get_if<double>(&v))
      j[k] = *d;
    else
      j[k] = std::get<bool>(v);
  }
  return j;
}

nlohmann::json attr_json(const AttrValue& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  Vector6d x = xyzrpy_from_transform(std::get<Transform>(v));
  return nlohmann::json{x[0], x[1], x[2], x[3], x[4], x[5]};
}

}  // namespace

bool eval_condition(const ConditionExpr& expr, const SensorSnapshot& snap,
                    const EnvironmentalModel& em) {
  struct Eval {
    const SensorSnapshot& snap;
    const EnvironmentalModel& em;
    bool operator()(const CondOr& n) const {
      bool a = eval_condition(*n.lhs, snap, em);
      bool b = eval_condition(*n.rhs, snap, em);  // strict, no short circuit
      return a || b;
    }
    bool operator()(const CondAnd& n) const {
      bool a = eval_condition(*n.lhs, snap, em);
      bool b = eval_condition(*n.rhs, snap, em);
      return a && b;
    }
    bool operator()(const CondNot& n) const { return !eval_condition(*n.inner, snap, em); }
    bool operator()(const CondCompare& n) const {
      double v = num_channel(n.path, snap, em);
      switch (n.op) {
        case CmpOp::Lt: return v < n.literal;
        case CmpOp::Le: return v <= n.literal;
        case CmpOp::Gt: return v > n.literal;
        case CmpOp::Ge: return v >= n.literal;
        case CmpOp::Eq: return v == n.literal;
        case CmpOp::Ne: return v != n.literal;
      }
      return false;
    }
    bool operator()(const CondBool& n) const { return bool_channel(n.path, snap, em); }
    bool operator()(const CondConst& n) const { return n.value; }
  };
  return std::visit(Eval{snap, em}, expr.node);
}

RunState::RunState(const SymbolTable& table, WorldFile world, std::uint64_t seed, RunLimits limits,
                   int componentCount)
    : table_(&table),
      world_(std::move(world)),
      rig_(std::make_unique<DeviceRig>(world_, seed)),
      limits_(limits) {
  livelockLimit_ = 10 * std::max(componentCount, 1) + 10;
}

void RunState::emit(const std::string& kind, const std::string& subject, nlohmann::json data) {
  TraceEvent e;
  e.seq = ++seq_;
  e.tick = tick_;
  e.kind = kind;
  e.subject = subject;
  e.data = std::move(data);
  trace_.push_back(e);
  stepEvents_.push_back(e);
  if (sink_) sink_(e);
}

void RunState::finish(RunStatus status, const std::string& endPort, const std::string& detail) {
  RunOutcome o;
  o.status = status;
  o.endPort = endPort;
  o.detail = detail;
  o.ticksUsed = tick_;
  o.finalEmRevision = world_.em.revision();
  nlohmann::json data;
  data["outcome"] = run_status_name(status);
  if (!endPort.empty()) data["endPort"] = endPort;
  if (!detail.empty()) data["detail"] = detail;
  data["ticks"] = o.ticksUsed;
  data["emRevision"] = o.finalEmRevision;
  emit("RunResult", frames_.empty() ? "" : frames_.front().path, std::move(data));
  outcome_ = std::move(o);
}

bool RunState::eval_in_context(const CondPtr& cond) const {
  return eval_condition(*cond, rig_->snapshot(), world_.em);
}

namespace {

GenericActionComponent effective_or_throw(const GenericActionComponent& c,
                                          const SymbolTable& table) {
  std::vector<Diagnostic> diags;
  auto eff = resolve_effective(c, table, diags);
  if (!eff)
    throw EngineError(fmt::format("cannot resolve extension chain of '{}'", c.name));
  return std::move(*eff);
}

/// Parameter-substituted update path: a segment naming a string-valued
/// parameter is replaced by that parameter's value.
std::vector<std::string> substituted_path(const std::vector<std::string>& emPath,
                                          const std::map<std::string, Value>& env) {
  std::vector<std::string> out = emPath;
  for (auto& seg : out) {
    auto it = env.find(seg);
    if (it != env.end() && it->second.kind() == Value::Kind::Str) seg = it->second.as_str();
  }
  return out;
}

}  // namespace

void RunState::begin_leaf(Frame& f) {
  const DeviceCall& call = *f.comp.exec;
  std::map<std::string, Value> args;
  for (const auto& a : call.args) {
    if (a.value.is_literal()) {
      args[a.name] = a.value.literal();
    } else {
      auto it = f.env.find(a.value.param());
      if (it == f.env.end())
        throw EngineError(fmt::format("unbound parameter '{}' in {}", a.value.param(), f.path));
      args[a.name] = it->second;
    }
  }
  ResolvedCall rc = make_command(call.path, args);
  f.session = begin(*rig_, rc, world_.em);
  f.state = Frame::State::Executing;
  emit("ExecBegun", f.path,
       {{"device", device_name(rc.kind)}, {"command", rc.path}});
}

void RunState::enter_child(const Endpoint& target, const std::vector<ArgBinding>& bindings) {
  if (frames_.size() >= 128) throw EngineError("configuration depth limit exceeded");
  Frame& parent = top();
  const Child* ch = find_child(parent.comp, target.owner);
  if (!ch) throw EngineError(fmt::format("'{}' has no child '{}'", parent.path, target.owner));

  GenericActionComponent comp;
  const std::vector<ArgBinding>* refArgs = nullptr;
  if (ch->is_inline()) {
    comp = effective_or_throw(ch->inline_component(), *table_);
  } else {
    const GenericActionComponent* t = table_->lookup(ch->ref().qualifiedName);
    if (!t)
      throw EngineError(fmt::format("unresolved reference '{}'", ch->ref().qualifiedName));
    comp = effective_or_throw(*t, *table_);
    comp.name = ch->ref().alias;
    refArgs = &ch->ref().args;
  }

  std::map<std::string, Value> env;
  for (const auto& p : comp.params)
    if (p.defaultValue) env[p.name] = *p.defaultValue;
  if (refArgs) {
    for (const auto& a : *refArgs)
      if (a.value.is_literal()) env[a.name] = a.value.literal();
  }
  // `set` bindings evaluate in the source scope at fire time.
  for (const auto& b : bindings) {
    if (b.value.is_literal()) {
      env[b.name] = b.value.literal();
    } else {
      auto it = parent.env.find(b.value.param());
      if (it == parent.env.end())
        throw EngineError(fmt::format("unbound parameter '{}' in {}", b.value.param(), parent.path));
      env[b.name] = it->second;
    }
  }
  for (const auto& p : comp.params) {
    if (!env.count(p.name))
      throw EngineError(
          fmt::format("parameter '{}' of '{}' has neither default nor binding", p.name, comp.name));
  }

  const ConditionPort* entry = comp.find_port(target.port);
  if (!entry || entry->kind != PortKind::Start)
    throw EngineError(fmt::format("'{}' has no start port '{}'", target.owner, target.port));
  // Start conditions re-evaluate on every entry.
  std::string childPath = parent.path + "/" + target.owner;
  if (entry->guard && !eval_in_context(entry->guard)) {
    finish(RunStatus::Deadlock, "", childPath + "." + target.port + " (start condition false)");
    return;
  }

  Frame f;
  f.comp = std::move(comp);
  f.instance = target.owner;
  f.path = childPath;
  f.env = std::move(env);
  f.state = Frame::State::AtStartPort;
  f.port = target.port;
  frames_.push_back(std::move(f));
  emit("Entered", top().path, nlohmann::json::object());
  if (top().comp.is_leaf()) begin_leaf(top());
}

void RunState::descend() {
  for (;;) {
    if (finished()) return;
    if (top().comp.is_leaf()) return;  // session already begun at entry
    Frame& f = top();
    const Transition* chosen = nullptr;
    for (const auto& t : f.comp.transitions) {
      if (t.source.is_self() && t.source.port == f.port) {
        if (!t.pre || eval_in_context(t.pre)) {
          chosen = &t;
          break;
        }
      }
    }
    if (!chosen) {
      finish(RunStatus::Deadlock, "", f.path + ".self." + f.port);
      return;
    }
    if (chosen->pre)
      emit("PreEvaluated", f.path, {{"result", true}, {"condition", cond_text(chosen->pre)}});
    if (chosen->post) {
      bool ok = eval_in_context(chosen->post);
      emit("PostEvaluated", f.path, {{"result", ok}, {"condition", cond_text(chosen->post)}});
      if (!ok) {
        Transition t = *chosen;
        route_post_failure(t);
        return;
      }
    }
    emit("TransitionFired", f.path,
         {{"source", chosen->source.text()}, {"target", chosen->target.text()}});
    Endpoint target = chosen->target;
    std::vector<ArgBinding> binds = chosen->bindings;  // survive reallocation
    enter_child(target, binds);
    if (finished()) return;
    if (top().state == Frame::State::Executing) return;
  }
}

void RunState::execute_leaf() {
  Frame& f = top();
  if (tick_ >= limits_.maxTicks) {
    stop(*f.session, StopReason::Timeout);
    finish(RunStatus::Timeout, "", f.path);
    return;
  }
  ++tick_;
  nonExecStreak_ = 0;
  SensorSnapshot snap = tick(*f.session, world_.em, limits_.dt);

  bool stopped = false;
  StopReason reason = StopReason::Completed;
  const CondPtr& lambda = f.comp.exec->stop;
  if (lambda && eval_condition(*lambda, snap, world_.em)) {
    stop(*f.session, StopReason::StopCondition);
    reason = StopReason::StopCondition;
    stopped = true;
  } else if (f.session->status != SessionStatus::Running) {
    reason = f.session->reason;
    stopped = true;
  }
  if (!stopped) return;

  emit("StopTriggered", f.path,
       {{"reason", stop_reason_name(reason)}, {"snapshot", snapshot_json(snap)}});
  // End condition: first whose guard holds, else the first declared.
  const ConditionPort* sel = nullptr;
  const ConditionPort* firstEnd = nullptr;
  for (const auto& p : f.comp.ports) {
    if (p.kind != PortKind::End) continue;
    if (!firstEnd) firstEnd = &p;
    if (!p.guard || eval_condition(*p.guard, snap, world_.em)) {
      sel = &p;
      break;
    }
  }
  if (!sel) sel = firstEnd;
  if (!sel) throw EngineError(fmt::format("'{}' has no end port", f.path));
  emit("Finished", f.path, {{"port", sel->name}});
  f.state = Frame::State::AtEndPort;
  f.port = sel->name;
}

void RunState::route_post_failure(const Transition& t) {
  Frame& owner = top();
  const ConditionPort* fp = owner.comp.find_port("fault");
  if (fp && fp->kind == PortKind::End) {
    owner.state = Frame::State::AtEndPort;
    owner.port = "fault";
    emit("Finished", owner.path, {{"port", "fault"}});
    return;
  }
  finish(RunStatus::PostconditionFailed, "", t.source.text() + " -> " + t.target.text());
}

void RunState::take_transition() {
  size_t fi = frames_.size() - 1;
  if (fi == 0) {
    finish(RunStatus::Success, frames_[0].port, "");
    return;
  }
  Frame& f = frames_[fi];
  Frame& parent = frames_[fi - 1];
  const Transition* chosen = nullptr;
  for (const auto& t : parent.comp.transitions) {
    if (!t.source.is_self() && t.source.owner == f.instance && t.source.port == f.port) {
      // Pre-conditions read the pre-update model and the last snapshot.
      if (!t.pre || eval_in_context(t.pre)) {
        chosen = &t;
        break;
      }
    }
  }
  if (!chosen) {
    finish(RunStatus::Deadlock, "", parent.path + "/" + f.instance + "." + f.port);
    return;
  }
  if (chosen->pre)
    emit("PreEvaluated", parent.path, {{"result", true}, {"condition", cond_text(chosen->pre)}});

  // The finished node's return values update the model, strictly between
  // pre and post.
  if (f.comp.exec && f.session) {
    for (const auto& u : f.comp.exec->updates) {
      auto path = substituted_path(u.emPath, f.env);
      auto it = f.session->result.find(u.resultField);
      if (it == f.session->result.end())
        throw EngineError(fmt::format("no result field '{}' on {}", u.resultField, f.path));
      world_.em.apply_update(path, it->second);
      emit("EmUpdated", f.path,
           {{"path", join_dots(path)},
            {"revision", world_.em.revision()},
            {"value", attr_json(it->second)}});
    }
  }

  if (chosen->post) {
    bool ok = eval_in_context(chosen->post);
    emit("PostEvaluated", parent.path, {{"result", ok}, {"condition", cond_text(chosen->post)}});
    if (!ok) {
      Transition t = *chosen;
      frames_.pop_back();  // the child finished regardless of the failure
      route_post_failure(t);
      return;
    }
  }
  emit("TransitionFired", parent.path,
       {{"source", chosen->source.text()}, {"target", chosen->target.text()}});
  Endpoint target = chosen->target;
  std::vector<ArgBinding> binds = chosen->bindings;
  frames_.pop_back();
  if (target.is_self()) {
    Frame& p = top();
    p.state = Frame::State::AtEndPort;
    p.port = target.port;
    emit("Finished", p.path, {{"port", target.port}});
  } else {
    enter_child(target, binds);
  }
}

void RunState::do_step() {
  switch (top().state) {
    case Frame::State::Executing:
      execute_leaf();
      return;
    case Frame::State::AtStartPort:
    case Frame::State::AtEndPort:
      if (++nonExecStreak_ > livelockLimit_) {
        finish(RunStatus::Fault, "", "livelock");
        return;
      }
      if (top().state == Frame::State::AtStartPort)
        descend();
      else
        take_transition();
      return;
  }
}

RunState init_run(const SymbolTable& table, const std::string& rootName, const WorldFile& world,
                  std::uint64_t seed, RunLimits limits, int componentCount,
                  const std::map<std::string, Value>& rootArgs) {
  const GenericActionComponent* root = table.lookup(rootName);
  if (!root) throw EngineError(fmt::format("unknown component '{}'", rootName));
  RunState r(table, world, seed, limits, componentCount);

  GenericActionComponent comp = effective_or_throw(*root, table);
  std::map<std::string, Value> env;
  for (const auto& p : comp.params)
    if (p.defaultValue) env[p.name] = *p.defaultValue;
  for (const auto& [k, v] : rootArgs) env[k] = v;
  for (const auto& p : comp.params)
    if (!env.count(p.name))
      throw EngineError(fmt::format("root parameter '{}' has neither default nor value", p.name));

  // First connected start port (declaration order) whose condition holds.
  const ConditionPort* sel = nullptr;
  for (const auto& p : comp.ports) {
    if (p.kind != PortKind::Start) continue;
    if (!comp.children.empty()) {
      bool connected = false;
      for (const auto& t : comp.transitions)
        connected = connected || (t.source.is_self() && t.source.port == p.name) ||
                    (t.target.is_self() && t.target.port == p.name);
      if (!connected) continue;
    }
    if (p.guard && !eval_condition(*p.guard, r.rig_->snapshot(), r.world_.em)) continue;
    sel = &p;
    break;
  }
  if (!sel) throw NoEnabledStartError(fmt::format("no enabled start condition on '{}'", rootName));

  Frame f;
  f.instance = root->name;
  f.path = root->name;
  f.env = std::move(env);
  f.state = Frame::State::AtStartPort;
  f.port = sel->name;
  f.comp = std::move(comp);  // after reading sel, which points into comp
  r.frames_.push_back(std::move(f));
  r.emit("Entered", r.frames_.front().path, nlohmann::json::object());
  if (r.top().comp.is_leaf()) r.begin_leaf(r.top());
  return r;
}

std::vector<TraceEvent> step(RunState& run) {
  if (run.finished()) throw EngineError("run already finished");
  run.stepEvents_.clear();
  try {
    run.do_step();
  } catch (const std::exception& e) {
    run.finish(RunStatus::Fault, "", e.what());
  }
  return run.stepEvents_;
}

std::pair<RunOutcome, ExecutionTrace> run_to_end(RunState& run) {
  while (!run.finished()) step(run);
  return {run.outcome(), run.trace()};
}

}  // namespace lr
