#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lr/cond.hpp"
#include "lr/diag.hpp"

namespace lr {

/// Abstraction level of a component. The standard profile fixes the mapping
/// task=2, skill=1, action=0; `component N` declares a generic level N.
struct Level {
  enum class Tag { Task, Skill, Action, Generic };
  Tag tag = Tag::Action;
  int depth = 0;  // only meaningful for Generic

  int value() const {
    switch (tag) {
      case Tag::Task: return 2;
      case Tag::Skill: return 1;
      case Tag::Action: return 0;
      case Tag::Generic: return depth;
    }
    return 0;
  }
  bool is_generic() const { return tag == Tag::Generic; }
  std::string keyword() const;
};

enum class PType { Num, Bool, String, Frame, Vec6 };

const char* ptype_name(PType t);

/// A literal value. Frames are carried as their 6-number (x,y,z,roll,pitch,
/// yaw) literal form until a device consumes them; this keeps printing and
/// round-tripping exact.
struct Value {
  enum class Kind { Num, Bool, Str, Vec };
  std::variant<double, bool, std::string, std::vector<double>> v;

  Kind kind() const { return static_cast<Kind>(v.index()); }
  static Value num(double d) { return Value{d}; }
  static Value boolean(bool b) { return Value{b}; }
  static Value str(std::string s) { return Value{std::move(s)}; }
  static Value vec(std::vector<double> e) { return Value{std::move(e)}; }

  double as_num() const { return std::get<double>(v); }
  bool as_bool() const { return std::get<bool>(v); }
  const std::string& as_str() const { return std::get<std::string>(v); }
  const std::vector<double>& as_vec() const { return std::get<std::vector<double>>(v); }
};

bool value_equal(const Value& a, const Value& b);

/// Whether a literal can inhabit a declared parameter type. Vector literals
/// of length 6 serve both vec6 and frame.
bool literal_matches(const Value& v, PType t);

struct ParamRef {
  std::string name;
};

/// Expression language for argument and parameter bindings: a literal or a
/// reference to a parameter of the enclosing scope.
struct Expr {
  std::variant<Value, ParamRef> node;
  SourceSpan span;

  bool is_literal() const { return node.index() == 0; }
  const Value& literal() const { return std::get<Value>(node); }
  const std::string& param() const { return std::get<ParamRef>(node).name; }
};

bool expr_equal(const Expr& a, const Expr& b);

struct Parameter {
  std::string name;
  PType type = PType::Num;
  std::optional<Value> defaultValue;
  SourceSpan span;
};

enum class PortKind { Start, End };

struct ConditionPort {
  std::string name;
  PortKind kind = PortKind::Start;
  CondPtr guard;  // null = unconditional
  SourceSpan span;
};

/// One side of a transition: a port of a child instance or of the component
/// itself (`self`).
struct Endpoint {
  std::string owner;  // "self" or child alias
  std::string port;
  SourceSpan span;

  bool is_self() const { return owner == "self"; }
  std::string text() const { return owner + "." + port; }
};

struct ArgBinding {
  std::string name;
  Expr value;
  SourceSpan span;
};

struct Transition {
  Endpoint source;
  Endpoint target;
  CondPtr pre;   // null = unconditional
  CondPtr post;  // null = unconditional
  std::vector<ArgBinding> bindings;  // `set` assignments to target params
  SourceSpan span;
};

/// One environmental-model write performed after a device call finishes:
/// emPath := result.<field>. Path segments naming a string parameter of the
/// owning component are substituted with the parameter value at run time.
struct UpdateBinding {
  std::vector<std::string> emPath;
  std::string resultField;
  SourceSpan span;
};

struct DeviceCall {
  std::string path;  // e.g. "robot.moveCartesian"
  std::vector<ArgBinding> args;
  CondPtr stop;  // λ; null = only device-side completion stops the call
  std::vector<UpdateBinding> updates;  // μ
  SourceSpan span;
};

/// A child declared by reference: `uses Qualified.Name as alias(arg = lit)`.
/// Reference arguments must be literals; they fold into parameter defaults.
struct ChildRef {
  std::string qualifiedName;
  std::string alias;
  std::vector<ArgBinding> args;
  SourceSpan span;
};

struct Child;

/// The one hierarchical model node: level-tagged, with parameters, start/end
/// condition ports, either a child net (children + transitions) or a device
/// call, and optional extension of another component.
struct GenericActionComponent {
  std::string name;
  Level level;
  std::vector<Parameter> params;
  std::vector<ConditionPort> ports;  // declaration order, both kinds
  std::vector<Child> children;       // declaration order, inline or reference
  std::vector<Transition> transitions;
  std::optional<DeviceCall> exec;
  std::optional<std::string> extendsRef;
  SourceSpan span;

  bool is_leaf() const { return children.empty(); }
  const ConditionPort* find_port(const std::string& name) const;
  const Parameter* find_param(const std::string& name) const;
};

struct Child {
  std::variant<GenericActionComponent, ChildRef> node;

  bool is_inline() const { return node.index() == 0; }
  const GenericActionComponent& inline_component() const {
    return std::get<GenericActionComponent>(node);
  }
  const ChildRef& ref() const { return std::get<ChildRef>(node); }
  /// Instance name: the component name for inline children, the alias for
  /// references.
  const std::string& instance_name() const;
};

/// One parsed source file.
struct ParsedUnit {
  std::string file;
  std::vector<std::string> uses;  // file imports, as written
  std::vector<GenericActionComponent> components;
};

const Child* find_child(const GenericActionComponent& c, const std::string& name);

/// Structural equality ignoring source spans.
bool component_equal(const GenericActionComponent& a, const GenericActionComponent& b);

}  // namespace lr
