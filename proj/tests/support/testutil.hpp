#pragma once

#include <string>
#include <vector>

#include "lr/engine.hpp"
#include "lr/parser.hpp"
#include "lr/symbols.hpp"
#include "lr/validate.hpp"
#include "modelgen.hpp"
#include "refeval.hpp"

namespace lr::testutil {

inline std::string repo_path(const std::string& rel) {
  return std::string(LR_REPO_DIR) + "/" + rel;
}

/// Parses source text, requiring zero diagnostics.
inline std::vector<GenericActionComponent> parse_ok(const std::string& text) {
  auto r = lr::parse(text, "<test>");
  if (!r.diagnostics.empty()) {
    std::string msg = "unexpected diagnostics:";
    for (const auto& d : r.diagnostics) msg += "\n  " + lr::format_diagnostic(d);
    throw std::runtime_error(msg);
  }
  return std::move(r.unit.components);
}

/// Wraps in-memory components as a loaded set.
inline ModelSet as_set(std::vector<GenericActionComponent> comps,
                       const std::string& file = "<test>") {
  ModelSet set;
  ParsedUnit u;
  u.file = file;
  u.components = std::move(comps);
  set.units.push_back(std::move(u));
  return set;
}

/// Builds the valuation-backed snapshot and environmental model pair used
/// by the condition-evaluator comparisons.
struct EvalFixture {
  SensorSnapshot snap;
  EnvironmentalModel em;

  explicit EvalFixture(const testgen::Valuation& vals) {
    bool needsObj = false;
    for (const auto& [path, value] : vals) {
      if (path.rfind("world.", 0) == 0) {
        needsObj = true;
      } else if (const double* d = std::get_if<double>(&value)) {
        snap[path] = *d;
      } else {
        snap[path] = std::get<bool>(value);
      }
    }
    if (needsObj) {
      SceneObject obj;
      obj.name = "obj";
      obj.parent = EnvironmentalModel::kRoot;
      em.add_object(obj);
      for (const auto& [path, value] : vals) {
        if (path.rfind("world.", 0) != 0) continue;
        if (const double* d = std::get_if<double>(&value))
          em.apply_update({"world", "obj", path.substr(path.rfind('.') + 1)}, *d);
        else
          em.apply_update({"world", "obj", path.substr(path.rfind('.') + 1)},
                          std::get<bool>(value));
      }
    }
  }
};

/// Random well-typed valuation over the generator's channel universe.
inline testgen::Valuation random_valuation(std::mt19937_64& rng) {
  auto num = [&] { return static_cast<double>(static_cast<int>(rng() % 101)) / 10.0 - 5.0; };
  auto boolean = [&] { return rng() % 2 == 0; };
  return testgen::Valuation{
      {"a.x", num()},          {"a.y", num()},           {"b.z", num()},
      {"world.obj.val", num()}, {"f.ok", boolean()},      {"g.up", boolean()},
      {"world.obj.flag", boolean()},
  };
}

}  // namespace lr::testutil
