#include "lr/flatten.hpp"

#include <set>

#include <fmt/format.h>

namespace lr {

namespace {

std::optional<GenericActionComponent> resolve_effective_impl(const GenericActionComponent& c,
                                                             const SymbolTable& table,
                                                             std::vector<Diagnostic>& diags,
                                                             std::set<const void*>& chain) {
  if (!c.extendsRef) return c;
  if (!chain.insert(&c).second) {
    diags.push_back(Diagnostic{"E021", Severity::Error, c.span,
                               fmt::format("cyclic extension involving '{}'", c.name)});
    return std::nullopt;
  }
  const GenericActionComponent* base = table.lookup(*c.extendsRef);
  if (!base) {
    // E011 is reported by name resolution; nothing to merge against.
    chain.erase(&c);
    return std::nullopt;
  }
  auto baseEff = resolve_effective_impl(*base, table, diags, chain);
  chain.erase(&c);
  if (!baseEff) return std::nullopt;

  GenericActionComponent merged = std::move(*baseEff);
  merged.name = c.name;
  merged.level = c.level;
  merged.span = c.span;
  merged.extendsRef.reset();

  bool clean = true;
  auto collision = [&](const SourceSpan& sp, const std::string& what) {
    diags.push_back(Diagnostic{"E020", Severity::Error, sp,
                               fmt::format("extension of '{}' collides on {}", *c.extendsRef, what)});
    clean = false;
  };

  for (const auto& p : c.params) {
    bool overridden = false;
    for (auto& bp : merged.params) {
      if (bp.name == p.name) {
        if (bp.type != p.type) collision(p.span, fmt::format("parameter '{}'", p.name));
        bp.defaultValue = p.defaultValue;  // default override is the one allowed change
        overridden = true;
        break;
      }
    }
    if (!overridden) merged.params.push_back(p);
  }
  for (const auto& p : c.ports) {
    if (merged.find_port(p.name))
      collision(p.span, fmt::format("port '{}'", p.name));
    else
      merged.ports.push_back(p);
  }
  for (const auto& ch : c.children) {
    if (find_child(merged, ch.instance_name()))
      collision(c.span, fmt::format("child '{}'", ch.instance_name()));
    else
      merged.children.push_back(ch);
  }
  for (const auto& t : c.transitions) merged.transitions.push_back(t);
  if (c.exec) {
    if (merged.exec)
      collision(c.exec->span, "exec");
    else
      merged.exec = c.exec;
  }
  if (!clean) return std::nullopt;
  return merged;
}

struct Flattener {
  const SymbolTable& table;
  std::vector<Diagnostic>& diags;
  std::vector<std::pair<std::string, std::string>> pathMap;
  std::set<const GenericActionComponent*> refStack;  // definitions on the expansion path

  std::optional<GenericActionComponent> expand(const GenericActionComponent& c,
                                               const std::string& path) {
    pathMap.emplace_back(path, path);
    auto eff = resolve_effective(c, table, diags);
    if (!eff) return std::nullopt;
    GenericActionComponent out = std::move(*eff);
    for (auto& ch : out.children) {
      std::string childPath = path + "/" + ch.instance_name();
      if (ch.is_inline()) {
        auto sub = expand(ch.inline_component(), childPath);
        if (!sub) return std::nullopt;
        ch.node = std::move(*sub);
      } else {
        ChildRef ref = ch.ref();
        const GenericActionComponent* target = table.lookup(ref.qualifiedName);
        if (!target) {
          diags.push_back(Diagnostic{"E011", Severity::Error, ref.span,
                                     fmt::format("unresolved reference '{}'", ref.qualifiedName)});
          return std::nullopt;
        }
        if (!refStack.insert(target).second) {
          diags.push_back(
              Diagnostic{"E021", Severity::Error, ref.span,
                         fmt::format("cyclic reference involving '{}'", ref.qualifiedName)});
          return std::nullopt;
        }
        auto sub = expand(*target, childPath);
        refStack.erase(target);
        if (!sub) return std::nullopt;
        // The copy takes the alias as its instance name; argument bindings
        // fold into parameter defaults.
        sub->name = ref.alias;
        for (const auto& arg : ref.args) {
          bool found = false;
          for (auto& p : sub->params) {
            if (p.name == arg.name) {
              found = true;
              if (arg.value.is_literal()) p.defaultValue = arg.value.literal();
              break;
            }
          }
          if (!found) {
            diags.push_back(Diagnostic{
                "E013", Severity::Error, arg.span,
                fmt::format("'{}' has no parameter '{}'", ref.qualifiedName, arg.name)});
          }
        }
        ch.node = std::move(*sub);
      }
    }
    return out;
  }
};

}  // namespace

std::optional<GenericActionComponent> resolve_effective(const GenericActionComponent& c,
                                                        const SymbolTable& table,
                                                        std::vector<Diagnostic>& diags) {
  std::set<const void*> chain;
  return resolve_effective_impl(c, table, diags, chain);
}

std::optional<FlatModel> flatten(const SymbolTable& table, const std::string& rootName,
                                 std::vector<Diagnostic>& diags) {
  const GenericActionComponent* root = table.lookup(rootName);
  if (!root) {
    diags.push_back(Diagnostic{"E011", Severity::Error, SourceSpan{},
                               fmt::format("unresolved reference '{}'", rootName)});
    return std::nullopt;
  }
  Flattener fl{table, diags, {}, {root}};
  auto expanded = fl.expand(*root, root->name);
  if (!expanded) return std::nullopt;
  FlatModel out;
  out.root = std::move(*expanded);
  out.pathMap = std::move(fl.pathMap);
  return out;
}

}  // namespace lr
