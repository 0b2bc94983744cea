#pragma once

#include <string>

#include "lr/ast.hpp"

namespace lr {

/// Graphviz rendering of a flattened component tree: one cluster per
/// composite, one node per condition port and per leaf, one edge per
/// transition labeled with its pre/post conditions. Output order follows
/// declaration order, so structurally equal models render identically.
std::string emit_dot(const GenericActionComponent& flatRoot);

}  // namespace lr
