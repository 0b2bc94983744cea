#pragma once

#include <map>
#include <string>
#include <vector>

#include "lr/ast.hpp"

namespace lr {

/// Maps component names to definitions. Every component is reachable under
/// its bare name and under `<fileStem>.<name>`; bare names must be unique
/// across the loaded set.
struct SymbolTable {
  std::map<std::string, const GenericActionComponent*> entries;

  const GenericActionComponent* lookup(const std::string& name) const {
    auto it = entries.find(name);
    return it == entries.end() ? nullptr : it->second;
  }
};

struct ModelSet {
  std::vector<ParsedUnit> units;
  std::vector<Diagnostic> diagnostics;  // parse and I/O findings from loading
};

/// Parses `entryFile` and every file reachable through `use` imports.
/// Imports resolve relative to the importing file's directory, then the
/// search paths, in that order.
ModelSet load_model(const std::string& entryFile, const std::vector<std::string>& searchPaths);

/// Builds the symbol table for a loaded set. Qualified references whose
/// first segment names no loaded file are looked up as `<segment>.lr` on the
/// search paths and loaded on demand. Duplicate definitions are E010,
/// unresolved references and extension targets E011.
SymbolTable resolve_names(ModelSet& set, const std::vector<std::string>& searchPaths,
                          std::vector<Diagnostic>& diags);

/// Convenience for in-memory models (no disk access).
SymbolTable resolve_names(ModelSet& set, std::vector<Diagnostic>& diags);

/// Total number of component definitions, nested inline children included.
int count_components(const ModelSet& set);

}  // namespace lr
