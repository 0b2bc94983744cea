#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lr/symbols.hpp"

namespace lr {

/// Resolves the `extends` chain of a component into a self-contained
/// definition: base ports, children and transitions first, the extender's
/// additions after them; parameter defaults may be overridden. Name
/// collisions are E020, cyclic or unresolved bases E021/E011. Returns
/// nothing when the chain cannot be resolved.
std::optional<GenericActionComponent> resolve_effective(const GenericActionComponent& c,
                                                        const SymbolTable& table,
                                                        std::vector<Diagnostic>& diags);

struct FlatModel {
  GenericActionComponent root;
  /// Instance-path correspondence original -> flattened, for trace
  /// rewriting. Paths are '/'-joined instance names.
  std::vector<std::pair<std::string, std::string>> pathMap;
};

/// Replaces every reference child by a deep copy of its target (argument
/// bindings folded into parameter defaults) and resolves every extension.
/// The result contains only inline children and no qualified names.
std::optional<FlatModel> flatten(const SymbolTable& table, const std::string& rootName,
                                 std::vector<Diagnostic>& diags);

}  // namespace lr
