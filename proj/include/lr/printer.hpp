#pragma once

#include <string>
#include <vector>

#include "lr/ast.hpp"

namespace lr {

/// Canonical text for a model: 2-space indentation, one declaration per
/// line, ports before children before transitions, LF line endings. Output
/// reparses to a structurally identical model.
std::string print_model(const std::vector<GenericActionComponent>& components);
std::string print_model(const ParsedUnit& unit);
std::string print_component(const GenericActionComponent& c, int indent = 0);

std::string cond_text(const CondPtr& c);
std::string value_text(const Value& v);
std::string expr_text(const Expr& e);

/// Shortest round-trip decimal spelling of a double.
std::string number_text(double d);

}  // namespace lr
