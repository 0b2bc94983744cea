#include "lr/ast.hpp"

#include <algorithm>
#include <tuple>

#include <fmt/format.h>

namespace lr {

void sort_diagnostics(std::vector<Diagnostic>& diags) {
  // File, then line, then code; column only breaks remaining ties.
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.span.file, a.span.startLine, a.code, a.span.startCol) <
           std::tie(b.span.file, b.span.startLine, b.code, b.span.startCol);
  });
}

std::string format_diagnostic(const Diagnostic& d) {
  const char* sev = d.severity == Severity::Error ? "error" : "warning";
  return fmt::format("{}:{}:{}: {} {}: {}", d.span.file, d.span.startLine, d.span.startCol, sev,
                     d.code, d.message);
}

CondPtr make_cond(ConditionExpr e) { return std::make_shared<const ConditionExpr>(std::move(e)); }

const char* cmp_op_text(CmpOp op) {
  switch (op) {
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    case CmpOp::Eq: return "==";
    case CmpOp::Ne: return "!=";
  }
  return "?";
}

bool cond_equal(const CondPtr& a, const CondPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->node.index() != b->node.index()) return false;
  struct Cmp {
    const ConditionExpr& other;
    bool operator()(const CondOr& x) const {
      const auto& y = std::get<CondOr>(other.node);
      return cond_equal(x.lhs, y.lhs) && cond_equal(x.rhs, y.rhs);
    }
    bool operator()(const CondAnd& x) const {
      const auto& y = std::get<CondAnd>(other.node);
      return cond_equal(x.lhs, y.lhs) && cond_equal(x.rhs, y.rhs);
    }
    bool operator()(const CondNot& x) const {
      return cond_equal(x.inner, std::get<CondNot>(other.node).inner);
    }
    bool operator()(const CondCompare& x) const {
      const auto& y = std::get<CondCompare>(other.node);
      return x.path == y.path && x.op == y.op && x.literal == y.literal;
    }
    bool operator()(const CondBool& x) const { return x.path == std::get<CondBool>(other.node).path; }
    bool operator()(const CondConst& x) const {
      return x.value == std::get<CondConst>(other.node).value;
    }
  };
  return std::visit(Cmp{*b}, a->node);
}

std::string Level::keyword() const {
  switch (tag) {
    case Tag::Task: return "task";
    case Tag::Skill: return "skill";
    case Tag::Action: return "action";
    case Tag::Generic: return fmt::format("component {}", depth);
  }
  return "?";
}

const char* ptype_name(PType t) {
  switch (t) {
    case PType::Num: return "num";
    case PType::Bool: return "bool";
    case PType::String: return "string";
    case PType::Frame: return "frame";
    case PType::Vec6: return "vec6";
  }
  return "?";
}

bool value_equal(const Value& a, const Value& b) { return a.v == b.v; }

bool literal_matches(const Value& v, PType t) {
  switch (t) {
    case PType::Num: return v.kind() == Value::Kind::Num;
    case PType::Bool: return v.kind() == Value::Kind::Bool;
    case PType::String: return v.kind() == Value::Kind::Str;
    case PType::Frame:
    case PType::Vec6: return v.kind() == Value::Kind::Vec && v.as_vec().size() == 6;
  }
  return false;
}

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  if (a.is_literal()) return value_equal(a.literal(), b.literal());
  return a.param() == b.param();
}

const ConditionPort* GenericActionComponent::find_port(const std::string& n) const {
  for (const auto& p : ports)
    if (p.name == n) return &p;
  return nullptr;
}

const Parameter* GenericActionComponent::find_param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}

const std::string& Child::instance_name() const {
  return is_inline() ? inline_component().name : ref().alias;
}

const Child* find_child(const GenericActionComponent& c, const std::string& name) {
  for (const auto& ch : c.children)
    if (ch.instance_name() == name) return &ch;
  return nullptr;
}

namespace {

bool bindings_equal(const std::vector<ArgBinding>& a, const std::vector<ArgBinding>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].name != b[i].name || !expr_equal(a[i].value, b[i].value)) return false;
  return true;
}

bool device_call_equal(const DeviceCall& a, const DeviceCall& b) {
  if (a.path != b.path || !bindings_equal(a.args, b.args) || !cond_equal(a.stop, b.stop))
    return false;
  if (a.updates.size() != b.updates.size()) return false;
  for (size_t i = 0; i < a.updates.size(); ++i)
    if (a.updates[i].emPath != b.updates[i].emPath ||
        a.updates[i].resultField != b.updates[i].resultField)
      return false;
  return true;
}

}  // namespace

bool component_equal(const GenericActionComponent& a, const GenericActionComponent& b) {
  if (a.name != b.name || a.level.tag != b.level.tag || a.level.value() != b.level.value())
    return false;
  if (a.extendsRef != b.extendsRef) return false;
  if (a.params.size() != b.params.size() || a.ports.size() != b.ports.size() ||
      a.children.size() != b.children.size() || a.transitions.size() != b.transitions.size())
    return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    const auto& x = a.params[i];
    const auto& y = b.params[i];
    if (x.name != y.name || x.type != y.type || x.defaultValue.has_value() != y.defaultValue.has_value())
      return false;
    if (x.defaultValue && !value_equal(*x.defaultValue, *y.defaultValue)) return false;
  }
  for (size_t i = 0; i < a.ports.size(); ++i) {
    const auto& x = a.ports[i];
    const auto& y = b.ports[i];
    if (x.name != y.name || x.kind != y.kind || !cond_equal(x.guard, y.guard)) return false;
  }
  for (size_t i = 0; i < a.children.size(); ++i) {
    const auto& x = a.children[i];
    const auto& y = b.children[i];
    if (x.is_inline() != y.is_inline()) return false;
    if (x.is_inline()) {
      if (!component_equal(x.inline_component(), y.inline_component())) return false;
    } else {
      if (x.ref().qualifiedName != y.ref().qualifiedName || x.ref().alias != y.ref().alias ||
          !bindings_equal(x.ref().args, y.ref().args))
        return false;
    }
  }
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    const auto& x = a.transitions[i];
    const auto& y = b.transitions[i];
    if (x.source.owner != y.source.owner || x.source.port != y.source.port ||
        x.target.owner != y.target.owner || x.target.port != y.target.port)
      return false;
    if (!cond_equal(x.pre, y.pre) || !cond_equal(x.post, y.post) ||
        !bindings_equal(x.bindings, y.bindings))
      return false;
  }
  if (a.exec.has_value() != b.exec.has_value()) return false;
  if (a.exec && !device_call_equal(*a.exec, *b.exec)) return false;
  return true;
}

}  // namespace lr
