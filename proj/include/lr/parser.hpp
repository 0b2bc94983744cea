#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lr/ast.hpp"

namespace lr {

struct ParseResult {
  ParsedUnit unit;
  std::vector<Diagnostic> diagnostics;
};

/// Parses one source buffer. Never throws and never stops before end of
/// file: syntax errors become diagnostics (code E050) and the parser
/// resynchronizes at declaration boundaries.
ParseResult parse(std::string_view text, const std::string& fileName);

/// Parses a standalone condition expression (precedence: not > and > or).
/// Appends diagnostics on malformed input and returns null in that case.
CondPtr parse_condition(std::string_view text, std::vector<Diagnostic>& diags);

/// Reads a file from disk and parses it. I/O failures are reported as an
/// E051 diagnostic.
ParseResult parse_file(const std::string& path);

}  // namespace lr
