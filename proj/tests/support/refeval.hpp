#pragma once

#include <map>
#include <string>
#include <variant>

#include "lr/cond.hpp"

namespace lr::testgen {

/// Flat channel valuation used by the reference evaluator. Paths beginning
/// with "world." stand for environmental-model attributes; everything else
/// is a sensor channel.
using Valuation = std::map<std::string, std::variant<double, bool>>;

/// Reference evaluator, deliberately implemented on a different route than
/// the engine's recursive walk: the condition is compiled to postfix form
/// and executed on an explicit value stack. Used as the independent oracle
/// for the evaluator acceptance check.
bool ref_eval(const ConditionExpr& expr, const Valuation& vals);

}  // namespace lr::testgen
