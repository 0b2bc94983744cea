#pragma once

#include <memory>
#include <string>
#include <variant>

#include "lr/diag.hpp"

namespace lr {

struct ConditionExpr;
using CondPtr = std::shared_ptr<const ConditionExpr>;

enum class CmpOp { Lt, Le, Gt, Ge, Eq, Ne };

struct CondOr {
  CondPtr lhs, rhs;
};
struct CondAnd {
  CondPtr lhs, rhs;
};
struct CondNot {
  CondPtr inner;
};
/// Numeric comparison of a dotted channel (or environmental-model) path
/// against a literal. Comparisons are numeric-only by construction.
struct CondCompare {
  std::string path;
  CmpOp op;
  double literal = 0.0;
};
/// A dotted path that must resolve to a boolean channel or attribute.
struct CondBool {
  std::string path;
};
struct CondConst {
  bool value = false;
};

struct ConditionExpr {
  std::variant<CondOr, CondAnd, CondNot, CondCompare, CondBool, CondConst> node;
  SourceSpan span;
};

CondPtr make_cond(ConditionExpr e);

const char* cmp_op_text(CmpOp op);

bool cond_equal(const CondPtr& a, const CondPtr& b);

}  // namespace lr
