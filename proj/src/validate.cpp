#include "lr/validate.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "lr/devices.hpp"
#include "lr/flatten.hpp"

namespace lr {

namespace {

struct Checker {
  const SymbolTable& table;
  Profile profile;
  std::vector<Diagnostic> diags;

  void error(const std::string& code, const SourceSpan& sp, const std::string& msg) {
    diags.push_back(Diagnostic{code, Severity::Error, sp, msg});
  }
  void warn(const std::string& code, const SourceSpan& sp, const std::string& msg) {
    diags.push_back(Diagnostic{code, Severity::Warning, sp, msg});
  }

  /// Effective (extension-resolved) view of a child instance, or null when
  /// the reference or extension chain is broken (reported elsewhere).
  std::optional<GenericActionComponent> child_effective(const Child& ch) {
    std::vector<Diagnostic> scratch;  // merge findings surface at the definition site
    if (ch.is_inline()) return resolve_effective(ch.inline_component(), table, scratch);
    const GenericActionComponent* target = table.lookup(ch.ref().qualifiedName);
    if (!target) return std::nullopt;
    return resolve_effective(*target, table, scratch);
  }

  std::optional<Level> child_level(const Child& ch) {
    if (ch.is_inline()) return ch.inline_component().level;
    const GenericActionComponent* target = table.lookup(ch.ref().qualifiedName);
    if (!target) return std::nullopt;
    return target->level;
  }

  static bool types_compatible(PType a, PType b) {
    if (a == b) return true;
    return (a == PType::Frame && b == PType::Vec6) || (a == PType::Vec6 && b == PType::Frame);
  }

  static bool literal_fits_arg(const Value& v, const ArgSpec& spec) {
    switch (spec.kind) {
      case ArgKind::Num: return v.kind() == Value::Kind::Num;
      case ArgKind::Bool: return v.kind() == Value::Kind::Bool;
      case ArgKind::Str: return v.kind() == Value::Kind::Str;
      case ArgKind::Frame:
        return v.kind() == Value::Kind::Vec && v.as_vec().size() == 6;
      case ArgKind::VecN:
        return v.kind() == Value::Kind::Vec &&
               v.as_vec().size() == static_cast<size_t>(spec.vecLen);
    }
    return false;
  }

  static bool param_fits_arg(PType t, const ArgSpec& spec) {
    switch (spec.kind) {
      case ArgKind::Num: return t == PType::Num;
      case ArgKind::Bool: return t == PType::Bool;
      case ArgKind::Str: return t == PType::String;
      case ArgKind::Frame: return t == PType::Frame || t == PType::Vec6;
      case ArgKind::VecN:
        return spec.vecLen == 6 && (t == PType::Vec6 || t == PType::Frame);
    }
    return false;
  }

  void check_duplicates(const GenericActionComponent& c) {
    std::set<std::string> names;
    for (const auto& p : c.params)
      if (!names.insert(p.name).second)
        error("E009", p.span, fmt::format("duplicate parameter '{}'", p.name));
    names.clear();
    for (const auto& p : c.ports)
      if (!names.insert(p.name).second)
        error("E009", p.span, fmt::format("duplicate port '{}'", p.name));
    names.clear();
    for (const auto& ch : c.children) {
      const SourceSpan& sp = ch.is_inline() ? ch.inline_component().span : ch.ref().span;
      if (!names.insert(ch.instance_name()).second)
        error("E009", sp, fmt::format("duplicate child '{}'", ch.instance_name()));
    }
  }

  void check_param_defaults(const GenericActionComponent& c) {
    for (const auto& p : c.params) {
      if (p.defaultValue && !literal_matches(*p.defaultValue, p.type))
        error("E008", p.span,
              fmt::format("default of parameter '{}' is not a {}", p.name, ptype_name(p.type)));
    }
  }

  void check_levels(const GenericActionComponent& c) {
    for (const auto& ch : c.children) {
      auto lvl = child_level(ch);
      if (!lvl) continue;
      const SourceSpan& sp = ch.is_inline() ? ch.inline_component().span : ch.ref().span;
      int pv = c.level.value();
      int cv = lvl->value();
      if (profile == Profile::Standard && !c.level.is_generic() && !lvl->is_generic()) {
        if (cv != pv - 1)
          error("E012", sp,
                fmt::format("child '{}' at level {} under level {} (must be exactly one below)",
                            ch.instance_name(), cv, pv));
      } else {
        if (cv >= pv)
          error("E012", sp,
                fmt::format("child '{}' at level {} under level {} (must strictly decrease)",
                            ch.instance_name(), cv, pv));
      }
    }
  }

  void check_transitions(const GenericActionComponent& c) {
    // Effective port lists per child alias; null entry = unresolved child.
    std::map<std::string, std::optional<GenericActionComponent>> childViews;
    for (const auto& ch : c.children) childViews[ch.instance_name()] = child_effective(ch);

    auto portOf = [&](const Endpoint& e) -> const ConditionPort* {
      if (e.is_self()) {
        const ConditionPort* p = c.find_port(e.port);
        if (!p) error("E006", e.span, fmt::format("'self' has no port '{}'", e.port));
        return p;
      }
      auto it = childViews.find(e.owner);
      if (it == childViews.end()) {
        error("E006", e.span, fmt::format("no child named '{}'", e.owner));
        return nullptr;
      }
      if (!it->second) return nullptr;  // unresolved reference, reported elsewhere
      const ConditionPort* p = it->second->find_port(e.port);
      if (!p) error("E006", e.span, fmt::format("child '{}' has no port '{}'", e.owner, e.port));
      return p;
    };

    for (const auto& t : c.transitions) {
      const ConditionPort* src = portOf(t.source);
      const ConditionPort* dst = portOf(t.target);
      if (src && dst) {
        // Legal shapes: self.start -> child.start, child.end -> child.start,
        // child.end -> self.end.
        bool ok = false;
        if (t.source.is_self() && !t.target.is_self())
          ok = src->kind == PortKind::Start && dst->kind == PortKind::Start;
        else if (!t.source.is_self() && !t.target.is_self())
          ok = src->kind == PortKind::End && dst->kind == PortKind::Start;
        else if (!t.source.is_self() && t.target.is_self())
          ok = src->kind == PortKind::End && dst->kind == PortKind::End;
        if (!ok)
          error("E005", t.span,
                fmt::format("illegal endpoint shape {} -> {}", t.source.text(), t.target.text()));
      }
      // `set` bindings address parameters of the target endpoint's owner,
      // evaluated in this component's scope.
      const GenericActionComponent* owner = nullptr;
      if (t.target.is_self()) {
        owner = &c;
      } else {
        auto it = childViews.find(t.target.owner);
        if (it != childViews.end() && it->second) owner = &*it->second;
      }
      if (owner) {
        for (const auto& b : t.bindings) {
          const Parameter* p = owner->find_param(b.name);
          if (!p) {
            error("E013", b.span,
                  fmt::format("'{}' has no parameter '{}'", t.target.owner, b.name));
            continue;
          }
          if (b.value.is_literal()) {
            if (!literal_matches(b.value.literal(), p->type))
              error("E008", b.span,
                    fmt::format("binding '{}' is not a {}", b.name, ptype_name(p->type)));
          } else {
            const Parameter* srcParam = c.find_param(b.value.param());
            if (!srcParam)
              error("E013", b.value.span,
                    fmt::format("no parameter '{}' in scope", b.value.param()));
            else if (!types_compatible(srcParam->type, p->type))
              error("E008", b.span,
                    fmt::format("binding '{}': {} is not a {}", b.name,
                                ptype_name(srcParam->type), ptype_name(p->type)));
          }
        }
      }
    }
  }

  void check_ref_args(const GenericActionComponent& c) {
    for (const auto& ch : c.children) {
      if (ch.is_inline()) continue;
      const ChildRef& r = ch.ref();
      const GenericActionComponent* target = table.lookup(r.qualifiedName);
      if (!target) continue;
      for (const auto& a : r.args) {
        if (!a.value.is_literal()) {
          error("E013", a.span,
                fmt::format("reference argument '{}' must be a literal", a.name));
          continue;
        }
        const Parameter* p = target->find_param(a.name);
        if (!p) {
          error("E013", a.span,
                fmt::format("'{}' has no parameter '{}'", r.qualifiedName, a.name));
          continue;
        }
        if (!literal_matches(a.value.literal(), p->type))
          error("E008", a.span,
                fmt::format("argument '{}' is not a {}", a.name, ptype_name(p->type)));
      }
    }
  }

  void check_exec(const GenericActionComponent& c) {
    const DeviceCall& e = *c.exec;
    const CommandSignature* sig = find_signature(e.path);
    if (!sig) {
      error("E007", e.span, fmt::format("unknown device command '{}'", e.path));
      return;
    }
    for (const auto& a : e.args) {
      const ArgSpec* spec = nullptr;
      for (const auto& s : sig->args)
        if (s.name == a.name) spec = &s;
      if (!spec) {
        error("E007", a.span, fmt::format("'{}' has no argument '{}'", e.path, a.name));
        continue;
      }
      if (a.value.is_literal()) {
        if (!literal_fits_arg(a.value.literal(), *spec))
          error("E008", a.span, fmt::format("argument '{}' has the wrong type", a.name));
        // Impedance ranges: non-negative, translational stiffness capped.
        if ((a.name == "stiffness" || a.name == "damping") &&
            a.value.literal().kind() == Value::Kind::Vec) {
          const auto& v = a.value.literal().as_vec();
          for (size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0)
              error("E008", a.span, a.name + " entries must be non-negative");
            else if (a.name == "stiffness" && i < 3 && e.path == "robot.moveCartesian" &&
                     v[i] > 5000.0)
              error("E008", a.span, "translational stiffness exceeds the 5000 N/m cap");
          }
        }
      } else {
        const Parameter* p = c.find_param(a.value.param());
        if (!p)
          error("E013", a.value.span, fmt::format("no parameter '{}' in scope", a.value.param()));
        else if (!param_fits_arg(p->type, *spec))
          error("E008", a.span, fmt::format("argument '{}' has the wrong type", a.name));
      }
    }
    for (const auto& spec : sig->args) {
      if (!spec.required) continue;
      bool present = false;
      for (const auto& a : e.args) present = present || a.name == spec.name;
      if (!present)
        error("E007", e.span, fmt::format("'{}' requires argument '{}'", e.path, spec.name));
    }
    for (const auto& u : e.updates) {
      size_t segs = u.emPath.size();
      if (!u.emPath.empty() && u.emPath.front() == "world" && segs > 2) segs -= 1;
      if (segs < 2)
        error("E014", u.span, "update path needs at least object and attribute segments");
      bool known = false;
      for (const auto& f : sig->resultFields) known = known || f == u.resultField;
      if (!known)
        error("E008", u.span,
              fmt::format("'{}' yields no result field '{}'", e.path, u.resultField));
    }
  }

  void check_connectedness(const GenericActionComponent& c) {
    if (c.children.empty()) return;  // leaves are wired by their parents
    std::set<std::pair<std::string, std::string>> used;
    for (const auto& t : c.transitions) {
      used.emplace(t.source.owner, t.source.port);
      used.emplace(t.target.owner, t.target.port);
    }
    for (const auto& p : c.ports) {
      if (!used.count({"self", p.name}))
        warn("W002", p.span, fmt::format("port '{}' is not connected", p.name));
    }
    for (const auto& ch : c.children) {
      auto eff = child_effective(ch);
      if (!eff) continue;
      const SourceSpan& sp = ch.is_inline() ? ch.inline_component().span : ch.ref().span;
      for (const auto& p : eff->ports) {
        if (!used.count({ch.instance_name(), p.name}))
          warn("W002", sp,
               fmt::format("port '{}.{}' is not connected", ch.instance_name(), p.name));
      }
    }
  }

  void check_component(const GenericActionComponent& raw) {
    std::optional<GenericActionComponent> effStorage;
    const GenericActionComponent* eff = &raw;
    if (raw.extendsRef) {
      effStorage = resolve_effective(raw, table, diags);  // E020/E021 surface here
      if (!effStorage) {
        for (const auto& ch : raw.children)
          if (ch.is_inline()) check_component(ch.inline_component());
        return;
      }
      eff = &*effStorage;
    }

    check_duplicates(*eff);
    check_param_defaults(*eff);

    bool hasStart = false, hasEnd = false;
    for (const auto& p : eff->ports) {
      hasStart = hasStart || p.kind == PortKind::Start;
      hasEnd = hasEnd || p.kind == PortKind::End;
    }
    if (!hasStart)
      error("E002", raw.span,
            fmt::format("component '{}' must declare at least one start condition", raw.name));
    if (!hasEnd)
      error("E001", raw.span,
            fmt::format("component '{}' must declare at least one end condition", raw.name));

    if (!eff->children.empty() && eff->exec)
      error("E003", eff->exec->span,
            fmt::format("exec forbidden on composite '{}'", raw.name));
    if (eff->children.empty() && !eff->exec)
      error("E004", raw.span,
            fmt::format("leaf component '{}' must declare an exec", raw.name));

    check_levels(*eff);
    check_transitions(*eff);
    check_ref_args(*eff);
    if (eff->exec && eff->children.empty()) check_exec(*eff);
    check_connectedness(*eff);

    for (const auto& ch : raw.children)
      if (ch.is_inline()) check_component(ch.inline_component());
  }

  // Reference/extension graph acyclicity across the whole set.
  enum class Color { White, Grey, Black };
  std::map<const GenericActionComponent*, Color> colors;

  void dfs(const GenericActionComponent& c) {
    colors[&c] = Color::Grey;
    auto visit = [&](const GenericActionComponent* t, const SourceSpan& sp,
                     const std::string& name) {
      if (!t) return;
      auto col = colors.find(t);
      if (col != colors.end() && col->second == Color::Grey) {
        error("E021", sp, fmt::format("cyclic reference or extension involving '{}'", name));
      } else if (col == colors.end() || col->second == Color::White) {
        dfs(*t);
      }
    };
    if (c.extendsRef) visit(table.lookup(*c.extendsRef), c.span, *c.extendsRef);
    for (const auto& ch : c.children) {
      if (ch.is_inline()) {
        dfs(ch.inline_component());
      } else {
        visit(table.lookup(ch.ref().qualifiedName), ch.ref().span, ch.ref().qualifiedName);
      }
    }
    colors[&c] = Color::Black;
  }
};

}  // namespace

std::vector<Diagnostic> validate(const ModelSet& set, const SymbolTable& table, Profile profile) {
  Checker ck{table, profile, {}, {}};
  for (const auto& u : set.units) {
    for (const auto& c : u.components) {
      if (ck.colors.find(&c) == ck.colors.end()) ck.dfs(c);
    }
  }
  for (const auto& u : set.units)
    for (const auto& c : u.components) ck.check_component(c);

  sort_diagnostics(ck.diags);
  // resolve_effective runs per use site; identical findings collapse.
  auto eq = [](const Diagnostic& a, const Diagnostic& b) {
    return a.code == b.code && a.span.file == b.span.file && a.span.startLine == b.span.startLine &&
           a.span.startCol == b.span.startCol && a.message == b.message;
  };
  ck.diags.erase(std::unique(ck.diags.begin(), ck.diags.end(), eq), ck.diags.end());
  return ck.diags;
}

std::vector<Diagnostic> validate(const std::vector<GenericActionComponent>& components,
                                 Profile profile) {
  ModelSet set;
  ParsedUnit u;
  u.file = "<memory>";
  u.components = components;
  set.units.push_back(std::move(u));
  std::vector<Diagnostic> resolveDiags;
  SymbolTable table = resolve_names(set, resolveDiags);
  auto diags = validate(set, table, profile);
  diags.insert(diags.end(), resolveDiags.begin(), resolveDiags.end());
  sort_diagnostics(diags);
  return diags;
}

}  // namespace lr
