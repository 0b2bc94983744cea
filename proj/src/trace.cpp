#include "lr/trace.hpp"

#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace lr {

std::string trace_line(const TraceEvent& e) {
  nlohmann::json j;
  j["seq"] = e.seq;
  j["tick"] = e.tick;
  j["kind"] = e.kind;
  j["subject"] = e.subject;
  j["data"] = e.data;
  return j.dump();
}

void write_trace(std::ostream& out, const ExecutionTrace& trace) {
  for (const auto& e : trace) out << trace_line(e) << "\n";
}

ExecutionTrace read_trace(std::istream& in) {
  ExecutionTrace out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw std::runtime_error(fmt::format("trace line {}: {}", n, ex.what()));
    }
    TraceEvent e;
    e.seq = j.value("seq", 0);
    e.tick = j.value("tick", 0);
    e.kind = j.value("kind", "");
    e.subject = j.value("subject", "");
    e.data = j.value("data", nlohmann::json::object());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<std::string> check_trace(const ExecutionTrace& trace) {
  std::vector<std::string> bad;
  if (trace.empty()) {
    bad.push_back("trace is empty");
    return bad;
  }
  for (size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].seq != static_cast<std::int64_t>(i) + 1) {
      bad.push_back(fmt::format("seq not contiguous at index {}", i));
      break;
    }
  }
  int runResults = 0;
  for (const auto& e : trace)
    if (e.kind == "RunResult") ++runResults;
  if (runResults != 1) bad.push_back(fmt::format("expected 1 RunResult, found {}", runResults));
  if (trace.back().kind != "RunResult") bad.push_back("RunResult is not the last event");

  // Entered/Finished discipline: Finished always names the innermost
  // currently entered subject; at most one active leaf at a time.
  std::vector<std::string> stack;
  for (const auto& e : trace) {
    if (e.kind == "Entered") {
      if (!stack.empty()) {
        const std::string& top = stack.back();
        if (e.subject.size() <= top.size() || e.subject.compare(0, top.size(), top) != 0)
          bad.push_back(fmt::format("seq {}: entered '{}' outside '{}'", e.seq, e.subject, top));
      }
      stack.push_back(e.subject);
    } else if (e.kind == "Finished") {
      if (stack.empty() || stack.back() != e.subject) {
        bad.push_back(fmt::format("seq {}: finished '{}' which is not innermost", e.seq, e.subject));
      } else {
        stack.pop_back();
      }
    }
  }

  // Micro-step ordering law per firing: any PreEvaluated, then all
  // EmUpdated, then any PostEvaluated, then TransitionFired.
  int phase = 0;  // 0 idle, 1 pre seen, 2 in updates, 3 post seen
  std::int64_t firingStart = 0;
  for (const auto& e : trace) {
    if (e.kind == "PreEvaluated") {
      if (phase != 0) bad.push_back(fmt::format("seq {}: PreEvaluated out of order", e.seq));
      phase = 1;
      firingStart = e.seq;
    } else if (e.kind == "EmUpdated") {
      if (phase == 3) bad.push_back(fmt::format("seq {}: EmUpdated after PostEvaluated", e.seq));
      if (phase == 0) firingStart = e.seq;
      phase = 2;
    } else if (e.kind == "PostEvaluated") {
      if (phase == 3) bad.push_back(fmt::format("seq {}: duplicate PostEvaluated", e.seq));
      phase = 3;
      if (phase == 3 && firingStart == 0) firingStart = e.seq;
    } else if (e.kind == "TransitionFired") {
      phase = 0;
      firingStart = 0;
    } else if (e.kind == "Entered" || e.kind == "StopTriggered" || e.kind == "Finished" ||
               e.kind == "RunResult") {
      // A new micro-step context. A dangling phase 3 is the post-failure
      // routing path; dangling phase 1 or 2 means updates never finished.
      if (phase == 1 || phase == 2)
        bad.push_back(fmt::format("seq {}: firing at {} never completed", e.seq, firingStart));
      phase = 0;
      firingStart = 0;
    }
  }
  return bad;
}

std::string trace_summary(const ExecutionTrace& trace) {
  struct PerSubject {
    int entered = 0;
    std::map<std::string, int> stops;
  };
  std::map<std::string, PerSubject> subjects;
  std::string outcome = "?";
  std::int64_t ticks = 0;
  for (const auto& e : trace) {
    if (e.kind == "Entered") subjects[e.subject].entered++;
    if (e.kind == "StopTriggered")
      subjects[e.subject].stops[e.data.value("reason", "?")]++;
    if (e.kind == "RunResult") {
      outcome = e.data.value("outcome", "?");
      ticks = e.data.value("ticks", 0);
    }
  }
  std::string out;
  for (const auto& [subject, info] : subjects) {
    out += fmt::format("{} entered={}", subject, info.entered);
    for (const auto& [reason, count] : info.stops) out += fmt::format(" stops[{}]={}", reason, count);
    out += "\n";
  }
  out += fmt::format("events={} ticks={} outcome={}\n", trace.size(), ticks, outcome);
  return out;
}

}  // namespace lr
