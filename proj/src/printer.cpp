#include "lr/printer.hpp"

#include <cmath>

#include <fmt/format.h>

namespace lr {

std::string number_text(double d) {
  if (std::isnan(d)) return "0";
  if (d == 0.0) return "0";  // normalizes -0
  return fmt::format("{}", d);
}

namespace {

// Precedence levels for parenthesization: or=0, and=1, not=2, atom=3.
int cond_prec(const ConditionExpr& c) {
  switch (c.node.index()) {
    case 0: return 0;  // Or
    case 1: return 1;  // And
    case 2: return 2;  // Not
    default: return 3;
  }
}

void cond_render(const ConditionExpr& c, int parentPrec, std::string& out) {
  int prec = cond_prec(c);
  bool parens = prec < parentPrec;
  if (parens) out += "(";
  switch (c.node.index()) {
    case 0: {
      const auto& n = std::get<CondOr>(c.node);
      cond_render(*n.lhs, 0, out);
      out += " or ";
      cond_render(*n.rhs, 1, out);  // left-associative
      break;
    }
    case 1: {
      const auto& n = std::get<CondAnd>(c.node);
      cond_render(*n.lhs, 1, out);
      out += " and ";
      cond_render(*n.rhs, 2, out);
      break;
    }
    case 2: {
      const auto& n = std::get<CondNot>(c.node);
      out += "not ";
      cond_render(*n.inner, 2, out);
      break;
    }
    case 3: {
      const auto& n = std::get<CondCompare>(c.node);
      out += fmt::format("{} {} {}", n.path, cmp_op_text(n.op), number_text(n.literal));
      break;
    }
    case 4: out += std::get<CondBool>(c.node).path; break;
    case 5: out += std::get<CondConst>(c.node).value ? "true" : "false"; break;
  }
  if (parens) out += ")";
}

std::string escape_string(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c; break;
    }
  }
  out += "\"";
  return out;
}

std::string bindings_text(const std::vector<ArgBinding>& args) {
  std::string out;
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += args[i].name + " = " + expr_text(args[i].value);
  }
  return out;
}

void render_component(const GenericActionComponent& c, int indent, std::string& out) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  out += pad + c.level.keyword() + " " + c.name;
  if (!c.params.empty()) {
    out += "(";
    for (size_t i = 0; i < c.params.size(); ++i) {
      if (i) out += ", ";
      const auto& p = c.params[i];
      out += std::string(ptype_name(p.type)) + " " + p.name;
      if (p.defaultValue) out += " = " + value_text(*p.defaultValue);
    }
    out += ")";
  }
  if (c.extendsRef) out += " extends " + *c.extendsRef;
  out += " {\n";
  std::string inner(static_cast<size_t>(indent + 1) * 2, ' ');
  for (const auto& p : c.ports) {
    out += inner + (p.kind == PortKind::Start ? "start " : "end ") + p.name;
    if (p.guard) out += " when " + cond_text(p.guard);
    out += ";\n";
  }
  for (const auto& ch : c.children) {
    if (ch.is_inline()) {
      render_component(ch.inline_component(), indent + 1, out);
    } else {
      const auto& r = ch.ref();
      out += inner + "uses " + r.qualifiedName + " as " + r.alias;
      if (!r.args.empty()) out += "(" + bindings_text(r.args) + ")";
      out += ";\n";
    }
  }
  if (c.exec) {
    const auto& e = *c.exec;
    out += inner + "exec " + e.path + "(" + bindings_text(e.args) + ")";
    if (e.stop) out += " until " + cond_text(e.stop);
    if (!e.updates.empty()) {
      out += " yields ";
      for (size_t i = 0; i < e.updates.size(); ++i) {
        if (i) out += ", ";
        const auto& u = e.updates[i];
        for (size_t j = 0; j < u.emPath.size(); ++j) {
          if (j) out += ".";
          out += u.emPath[j];
        }
        out += " := result." + u.resultField;
      }
    }
    out += ";\n";
  }
  for (const auto& t : c.transitions) {
    out += inner + "on " + t.source.text() + " -> " + t.target.text();
    if (t.pre) out += " pre " + cond_text(t.pre);
    if (t.post) out += " post " + cond_text(t.post);
    if (!t.bindings.empty()) out += " set " + bindings_text(t.bindings);
    out += ";\n";
  }
  out += pad + "}\n";
}

}  // namespace

std::string cond_text(const CondPtr& c) {
  if (!c) return "";
  std::string out;
  cond_render(*c, 0, out);
  return out;
}

std::string value_text(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::Num: return number_text(v.as_num());
    case Value::Kind::Bool: return v.as_bool() ? "true" : "false";
    case Value::Kind::Str: return escape_string(v.as_str());
    case Value::Kind::Vec: {
      std::string out = "[";
      const auto& e = v.as_vec();
      for (size_t i = 0; i < e.size(); ++i) {
        if (i) out += ", ";
        out += number_text(e[i]);
      }
      out += "]";
      return out;
    }
  }
  return "";
}

std::string expr_text(const Expr& e) {
  if (e.is_literal()) return value_text(e.literal());
  return e.param();
}

std::string print_component(const GenericActionComponent& c, int indent) {
  std::string out;
  render_component(c, indent, out);
  return out;
}

std::string print_model(const std::vector<GenericActionComponent>& components) {
  std::string out;
  for (size_t i = 0; i < components.size(); ++i) {
    if (i) out += "\n";
    render_component(components[i], 0, out);
  }
  return out;
}

std::string print_model(const ParsedUnit& unit) {
  std::string out;
  for (const auto& u : unit.uses) out += "use " + escape_string(u) + ";\n";
  if (!unit.uses.empty() && !unit.components.empty()) out += "\n";
  out += print_model(unit.components);
  return out;
}

}  // namespace lr
