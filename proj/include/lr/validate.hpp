#pragma once

#include <vector>

#include "lr/symbols.hpp"

namespace lr {

/// Level discipline. Standard (the default) fixes task=2/skill=1/action=0
/// and requires each child exactly one level below its parent; generic
/// levels only need to decrease strictly. The generic profile requires
/// strict decrease everywhere.
enum class Profile { Standard, Generic };

/// Checks every structural invariant of the loaded model set: port
/// presence, exec-vs-children exclusivity, endpoint legality, level
/// discipline, binding and device-interface typing, connectedness warnings
/// and reference/extension acyclicity. Pure: identical input produces an
/// identical, deterministically ordered diagnostic list.
std::vector<Diagnostic> validate(const ModelSet& set, const SymbolTable& table,
                                 Profile profile = Profile::Standard);

/// Convenience for a self-contained component list (builds a throwaway
/// symbol table keyed by bare names).
std::vector<Diagnostic> validate(const std::vector<GenericActionComponent>& components,
                                 Profile profile = Profile::Standard);

}  // namespace lr
