#include "lr/symbols.hpp"

#include <filesystem>
#include <set>

#include <fmt/format.h>

#include "lr/parser.hpp"

namespace fs = std::filesystem;

namespace lr {

namespace {

std::string unit_stem(const ParsedUnit& u) { return fs::path(u.file).stem().string(); }

std::string find_on_paths(const std::string& name, const std::string& fromDir,
                          const std::vector<std::string>& searchPaths) {
  std::vector<std::string> dirs;
  if (!fromDir.empty()) dirs.push_back(fromDir);
  dirs.insert(dirs.end(), searchPaths.begin(), searchPaths.end());
  for (const auto& d : dirs) {
    fs::path p = fs::path(d) / name;
    std::error_code ec;
    if (fs::exists(p, ec)) return p.string();
  }
  return "";
}

/// Collects the first segment of every dotted reference in a component tree.
void collect_qualifiers(const GenericActionComponent& c, std::set<std::string>& out) {
  auto headOf = [](const std::string& qname) {
    auto dot = qname.find('.');
    return dot == std::string::npos ? std::string() : qname.substr(0, dot);
  };
  if (c.extendsRef) {
    auto h = headOf(*c.extendsRef);
    if (!h.empty()) out.insert(h);
  }
  for (const auto& ch : c.children) {
    if (ch.is_inline()) {
      collect_qualifiers(ch.inline_component(), out);
    } else {
      auto h = headOf(ch.ref().qualifiedName);
      if (!h.empty()) out.insert(h);
    }
  }
}

void collect_refs(const GenericActionComponent& c,
                  std::vector<std::pair<std::string, SourceSpan>>& out) {
  if (c.extendsRef) out.emplace_back(*c.extendsRef, c.span);
  for (const auto& ch : c.children) {
    if (ch.is_inline()) {
      collect_refs(ch.inline_component(), out);
    } else {
      out.emplace_back(ch.ref().qualifiedName, ch.ref().span);
    }
  }
}

void load_into(ModelSet& set, const std::string& file,
               const std::vector<std::string>& searchPaths, std::set<std::string>& seen) {
  std::error_code ec;
  fs::path canon = fs::weakly_canonical(file, ec);
  std::string key = ec ? file : canon.string();
  if (!seen.insert(key).second) return;
  ParseResult r = parse_file(file);
  set.diagnostics.insert(set.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
  std::string dir = fs::path(file).parent_path().string();
  std::vector<std::string> imports = r.unit.uses;
  set.units.push_back(std::move(r.unit));
  for (const auto& imp : imports) {
    std::string found = find_on_paths(imp, dir, searchPaths);
    if (found.empty()) {
      set.diagnostics.push_back(Diagnostic{"E051", Severity::Error,
                                           SourceSpan{file, 0, 0, 0, 0},
                                           fmt::format("imported file not found: {}", imp)});
      continue;
    }
    load_into(set, found, searchPaths, seen);
  }
}

}  // namespace

ModelSet load_model(const std::string& entryFile, const std::vector<std::string>& searchPaths) {
  ModelSet set;
  std::set<std::string> seen;
  load_into(set, entryFile, searchPaths, seen);
  return set;
}

SymbolTable resolve_names(ModelSet& set, const std::vector<std::string>& searchPaths,
                          std::vector<Diagnostic>& diags) {
  // Load files named by qualified references that are not covered yet.
  std::set<std::string> seenFiles;
  for (const auto& u : set.units) {
    std::error_code ec;
    fs::path canon = fs::weakly_canonical(u.file, ec);
    seenFiles.insert(ec ? u.file : canon.string());
  }
  for (size_t i = 0; i < set.units.size(); ++i) {
    std::set<std::string> quals;
    for (const auto& c : set.units[i].components) collect_qualifiers(c, quals);
    std::set<std::string> stems;
    for (const auto& u : set.units) stems.insert(unit_stem(u));
    for (const auto& q : quals) {
      if (stems.count(q)) continue;
      std::string dir = fs::path(set.units[i].file).parent_path().string();
      std::string found = find_on_paths(q + ".lr", dir, searchPaths);
      if (found.empty()) continue;  // unresolved reference reported below
      std::error_code ec;
      fs::path canon = fs::weakly_canonical(found, ec);
      std::string key = ec ? found : canon.string();
      if (!seenFiles.insert(key).second) continue;
      ParseResult r = parse_file(found);
      set.diagnostics.insert(set.diagnostics.end(), r.diagnostics.begin(), r.diagnostics.end());
      set.units.push_back(std::move(r.unit));
    }
  }

  SymbolTable table;
  for (const auto& u : set.units) {
    std::string stem = unit_stem(u);
    for (const auto& c : u.components) {
      for (const std::string& key : {c.name, stem + "." + c.name}) {
        auto [it, inserted] = table.entries.emplace(key, &c);
        if (!inserted && it->second != &c) {
          diags.push_back(Diagnostic{"E010", Severity::Error, c.span,
                                     fmt::format("duplicate definition of '{}'", key)});
        }
      }
    }
  }
  for (const auto& u : set.units) {
    for (const auto& c : u.components) {
      std::vector<std::pair<std::string, SourceSpan>> refs;
      collect_refs(c, refs);
      for (const auto& [name, span] : refs) {
        if (!table.lookup(name)) {
          diags.push_back(Diagnostic{"E011", Severity::Error, span,
                                     fmt::format("unresolved reference '{}'", name)});
        }
      }
    }
  }
  return table;
}

SymbolTable resolve_names(ModelSet& set, std::vector<Diagnostic>& diags) {
  return resolve_names(set, {}, diags);
}

namespace {
int count_tree(const GenericActionComponent& c) {
  int n = 1;
  for (const auto& ch : c.children)
    if (ch.is_inline()) n += count_tree(ch.inline_component());
  return n;
}
}  // namespace

int count_components(const ModelSet& set) {
  int n = 0;
  for (const auto& u : set.units)
    for (const auto& c : u.components) n += count_tree(c);
  return n;
}

}  // namespace lr
