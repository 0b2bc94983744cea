#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace lr {

/// One observable event of a run. Serialized as one JSON object per line:
/// {"seq":n,"tick":n,"kind":"...","subject":"root/child/leaf","data":{...}}.
/// The schema is frozen; golden tests compare traces byte for byte.
struct TraceEvent {
  std::int64_t seq = 0;
  std::int64_t tick = 0;
  std::string kind;     // Entered, ExecBegun, StopTriggered, PreEvaluated,
                        // EmUpdated, PostEvaluated, TransitionFired,
                        // Finished, RunResult
  std::string subject;  // '/'-joined instance path
  nlohmann::json data = nlohmann::json::object();
};

using ExecutionTrace = std::vector<TraceEvent>;
using TraceSink = std::function<void(const TraceEvent&)>;

std::string trace_line(const TraceEvent& e);
void write_trace(std::ostream& out, const ExecutionTrace& trace);
ExecutionTrace read_trace(std::istream& in);  // throws std::runtime_error on malformed lines

/// Structural checks over a finished trace: seq starts at 1 and is
/// contiguous, exactly one RunResult and it is last, Entered/Finished
/// nesting is balanced, and for every transition firing the micro-step
/// ordering law holds (PreEvaluated before all EmUpdated before
/// PostEvaluated before TransitionFired). Returns human-readable violation
/// messages; empty = valid.
std::vector<std::string> check_trace(const ExecutionTrace& trace);

/// Per-subject entry counts and stop reasons, one line per subject in
/// lexicographic order, followed by a run summary line.
std::string trace_summary(const ExecutionTrace& trace);

}  // namespace lr
