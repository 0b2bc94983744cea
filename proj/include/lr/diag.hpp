#pragma once

#include <string>
#include <vector>

namespace lr {

/// Half-open source region, 1-based lines and columns.
struct SourceSpan {
  std::string file;
  int startLine = 0;
  int startCol = 0;
  int endLine = 0;
  int endCol = 0;
};

enum class Severity { Error, Warning };

/// One validation or parse finding. Codes are stable across releases and
/// documented in the language reference (README).
struct Diagnostic {
  std::string code;      // "E001", "W002", ...
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string message;
};

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  for (const auto& d : diags)
    if (d.severity == Severity::Error) return true;
  return false;
}

/// Deterministic reporting order: file, then line, then column, then code.
void sort_diagnostics(std::vector<Diagnostic>& diags);

std::string format_diagnostic(const Diagnostic& d);

}  // namespace lr
