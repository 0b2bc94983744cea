// Command-line entry point: parse | validate | compile | run | trace.
//
// Exit codes: 0 success, 1 diagnostics with errors, 2 usage error,
// 3 run finished with a non-success outcome.

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lr/dot.hpp"
#include "lr/engine.hpp"
#include "lr/flatten.hpp"
#include "lr/parser.hpp"
#include "lr/printer.hpp"
#include "lr/scenario.hpp"
#include "lr/symbols.hpp"
#include "lr/trace.hpp"
#include "lr/validate.hpp"

namespace {

std::vector<std::string> search_paths() {
  std::vector<std::string> out;
  if (const char* env = std::getenv("LR_PATH")) {
    std::string s(env);
    size_t start = 0;
    while (start <= s.size()) {
      size_t sep = s.find(':', start);
      std::string part = s.substr(start, sep == std::string::npos ? sep : sep - start);
      if (!part.empty()) out.push_back(part);
      if (sep == std::string::npos) break;
      start = sep + 1;
    }
  }
  return out;
}

void print_diagnostics(const std::vector<lr::Diagnostic>& diags) {
  for (const auto& d : diags) std::cerr << lr::format_diagnostic(d) << "\n";
}

struct Loaded {
  lr::ModelSet set;
  lr::SymbolTable table;
  std::vector<lr::Diagnostic> diags;
  bool ok = false;
};

Loaded load_and_validate(const std::string& file, lr::Profile profile) {
  Loaded l;
  auto paths = search_paths();
  l.set = lr::load_model(file, paths);
  l.diags = l.set.diagnostics;
  l.table = lr::resolve_names(l.set, paths, l.diags);
  if (!lr::has_errors(l.diags)) {
    auto v = lr::validate(l.set, l.table, profile);
    l.diags.insert(l.diags.end(), v.begin(), v.end());
  }
  lr::sort_diagnostics(l.diags);
  l.ok = !lr::has_errors(l.diags);
  return l;
}

lr::Profile parse_profile(const std::string& s) {
  return s == "generic" ? lr::Profile::Generic : lr::Profile::Standard;
}

int cmd_parse(const std::string& file) {
  lr::ParseResult r = lr::parse_file(file);
  print_diagnostics(r.diagnostics);
  for (const auto& c : r.unit.components) {
    std::cout << fmt::format("{} {}: params={} ports={} children={} transitions={}\n",
                             c.level.keyword(), c.name, c.params.size(), c.ports.size(),
                             c.children.size(), c.transitions.size());
  }
  return lr::has_errors(r.diagnostics) ? 1 : 0;
}

int cmd_validate(const std::string& file, const std::string& profile) {
  Loaded l = load_and_validate(file, parse_profile(profile));
  print_diagnostics(l.diags);
  return l.ok ? 0 : 1;
}

int cmd_compile(const std::string& file, const std::string& root, const std::string& outFile,
                const std::string& dotFile, const std::string& profile) {
  Loaded l = load_and_validate(file, parse_profile(profile));
  if (!l.ok) {
    print_diagnostics(l.diags);
    return 1;
  }
  std::vector<lr::Diagnostic> fdiags;
  auto flat = lr::flatten(l.table, root, fdiags);
  if (!flat) {
    lr::sort_diagnostics(fdiags);
    print_diagnostics(fdiags);
    return 1;
  }
  auto check = lr::validate({flat->root}, parse_profile(profile));
  if (lr::has_errors(check)) {
    print_diagnostics(check);
    return 1;
  }
  std::string text = lr::print_component(flat->root);
  if (outFile.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(outFile, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << outFile << "\n";
      return 1;
    }
    out << text;
  }
  if (!dotFile.empty()) {
    std::ofstream out(dotFile, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << dotFile << "\n";
      return 1;
    }
    out << lr::emit_dot(flat->root);
  }
  return 0;
}

int cmd_run(const std::string& file, const std::string& root, const std::string& worldFile,
            std::uint64_t seed, std::int64_t maxTicks, double dt, const std::string& traceFile,
            const std::string& profile) {
  if (dt <= 0.0 || maxTicks < 1) {
    std::cerr << "run: --dt must be positive and --max-ticks at least 1\n";
    return 2;
  }
  Loaded l = load_and_validate(file, parse_profile(profile));
  if (!l.ok) {
    print_diagnostics(l.diags);
    return 1;
  }
  lr::WorldFile world;
  try {
    world = lr::load_world(worldFile);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  lr::RunLimits limits;
  limits.maxTicks = maxTicks;
  limits.dt = dt;
  lr::RunOutcome outcome;
  lr::ExecutionTrace trace;
  try {
    lr::RunState run =
        lr::init_run(l.table, root, world, seed, limits, lr::count_components(l.set));
    std::tie(outcome, trace) = lr::run_to_end(run);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 3;
  }
  // The trace invariants are checked on every run, streamed or not.
  auto violations = lr::check_trace(trace);
  for (const auto& v : violations) std::cerr << "trace invariant violated: " << v << "\n";
  if (!traceFile.empty()) {
    std::ofstream out(traceFile, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write " << traceFile << "\n";
      return 3;
    }
    lr::write_trace(out, trace);
  }
  std::cout << fmt::format("outcome={} ticks={} end={}\n", lr::run_status_name(outcome.status),
                           outcome.ticksUsed, outcome.endPort.empty() ? "-" : outcome.endPort);
  if (!outcome.detail.empty()) std::cerr << "detail: " << outcome.detail << "\n";
  if (!violations.empty()) return 3;
  return outcome.status == lr::RunStatus::Success ? 0 : 3;
}

int cmd_trace(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    std::cerr << "cannot read " << file << "\n";
    return 1;
  }
  lr::ExecutionTrace trace;
  try {
    trace = lr::read_trace(in);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  auto violations = lr::check_trace(trace);
  for (const auto& v : violations) std::cerr << "trace invariant violated: " << v << "\n";
  std::cout << lr::trace_summary(trace);
  return violations.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Toolchain for three-layer task/skill/action robot programs"};
  app.require_subcommand(1);

  std::string file, root, worldFile, outFile, dotFile, traceFile;
  std::string profile = "standard";
  std::uint64_t seed = 0;
  std::int64_t maxTicks = 100000;
  double dt = 0.01;

  auto* parseCmd = app.add_subcommand("parse", "Parse a model file and print a summary");
  parseCmd->add_option("file", file, "model file (.lr)")->required();

  auto* validateCmd = app.add_subcommand("validate", "Check a model against all invariants");
  validateCmd->add_option("file", file, "model file (.lr)")->required();
  validateCmd->add_option("--profile", profile, "level profile: standard|generic")
      ->check(CLI::IsMember({"standard", "generic"}));

  auto* compileCmd =
      app.add_subcommand("compile", "Flatten references and extensions; emit text and DOT");
  compileCmd->add_option("file", file, "model file (.lr)")->required();
  compileCmd->add_option("--root", root, "root component")->required();
  compileCmd->add_option("-o,--output", outFile, "flattened model output (default stdout)");
  compileCmd->add_option("--dot", dotFile, "DOT graph output");
  compileCmd->add_option("--profile", profile, "level profile: standard|generic")
      ->check(CLI::IsMember({"standard", "generic"}));

  auto* runCmd = app.add_subcommand("run", "Execute a model against a world");
  runCmd->add_option("file", file, "model file (.lr)")->required();
  runCmd->add_option("--root", root, "root component")->required();
  runCmd->add_option("--world", worldFile, "world JSON file")->required();
  runCmd->add_option("--seed", seed, "random seed");
  runCmd->add_option("--max-ticks", maxTicks, "tick limit");
  runCmd->add_option("--dt", dt, "tick duration in seconds");
  runCmd->add_option("--trace", traceFile, "trace output (JSON lines)");
  runCmd->add_option("--profile", profile, "level profile: standard|generic")
      ->check(CLI::IsMember({"standard", "generic"}));

  auto* traceCmd = app.add_subcommand("trace", "Summarize a recorded trace");
  traceCmd->add_option("file", file, "trace file (.jsonl)")->required();
  traceCmd->add_flag("--summary", "print the per-component summary (default)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (parseCmd->parsed()) return cmd_parse(file);
  if (validateCmd->parsed()) return cmd_validate(file, profile);
  if (compileCmd->parsed()) return cmd_compile(file, root, outFile, dotFile, profile);
  if (runCmd->parsed()) return cmd_run(file, root, worldFile, seed, maxTicks, dt, traceFile, profile);
  if (traceCmd->parsed()) return cmd_trace(file);
  return 2;
}
