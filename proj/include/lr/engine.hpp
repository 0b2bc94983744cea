#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lr/devices.hpp"
#include "lr/symbols.hpp"
#include "lr/trace.hpp"
#include "lr/world.hpp"

namespace lr {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoEnabledStartError : EngineError {
  using EngineError::EngineError;
};

struct RunLimits {
  std::int64_t maxTicks = 100000;
  double dt = 0.01;  // s
};

enum class RunStatus { Success, Deadlock, Timeout, Fault, PostconditionFailed };
const char* run_status_name(RunStatus s);

struct RunOutcome {
  RunStatus status = RunStatus::Fault;
  std::string endPort;  // set on Success
  std::string detail;   // deadlock location, fault message, failed transition
  std::int64_t ticksUsed = 0;
  std::uint64_t finalEmRevision = 0;
};

/// Evaluates a condition against a sensor snapshot and the environmental
/// model. Paths resolve in the snapshot first, then as [world.]object.attr
/// attribute paths. Evaluation is strict: both operands of and/or are
/// always evaluated. Comparisons require numeric channels; boolean paths
/// must resolve to booleans. Throws UnknownChannelError or
/// TypeMismatchError otherwise.
bool eval_condition(const ConditionExpr& expr, const SensorSnapshot& snap,
                    const EnvironmentalModel& em);

/// One level of the active configuration: the effective component, its
/// instance path, its parameter environment, and where control sits.
struct Frame {
  enum class State { AtStartPort, Executing, AtEndPort };
  GenericActionComponent comp;  // extension-resolved; references stay children
  std::string instance;
  std::string path;
  std::map<std::string, Value> env;
  State state = State::AtStartPort;
  std::string port;
  std::optional<CommandSession> session;  // leaves only
};

class RunState {
 public:
  RunState(const SymbolTable& table, WorldFile world, std::uint64_t seed, RunLimits limits,
           int componentCount);

  bool finished() const { return outcome_.has_value(); }
  const RunOutcome& outcome() const { return *outcome_; }
  const ExecutionTrace& trace() const { return trace_; }
  const EnvironmentalModel& em() const { return world_.em; }
  const DeviceRig& rig() const { return *rig_; }
  const std::vector<Frame>& frames() const { return frames_; }
  void set_sink(TraceSink sink) { sink_ = std::move(sink); }

 private:
  friend RunState init_run(const SymbolTable&, const std::string&, const WorldFile&,
                           std::uint64_t, RunLimits, int,
                           const std::map<std::string, Value>&);
  friend std::vector<TraceEvent> step(RunState& run);

  void emit(const std::string& kind, const std::string& subject, nlohmann::json data);
  void finish(RunStatus status, const std::string& endPort, const std::string& detail);
  void do_step();
  void descend();
  void execute_leaf();
  void take_transition();
  void enter_child(const Endpoint& target, const std::vector<ArgBinding>& bindings);
  void begin_leaf(Frame& f);
  bool eval_in_context(const CondPtr& cond) const;
  void route_post_failure(const Transition& t);
  Frame& top() { return frames_.back(); }

  const SymbolTable* table_;
  WorldFile world_;
  // Heap-allocated: sessions inside frames keep a pointer to the rig, which
  // must stay put when the RunState moves.
  std::unique_ptr<DeviceRig> rig_;
  RunLimits limits_;
  std::vector<Frame> frames_;
  ExecutionTrace trace_;
  std::vector<TraceEvent> stepEvents_;
  TraceSink sink_;
  std::optional<RunOutcome> outcome_;
  std::int64_t seq_ = 0;
  std::int64_t tick_ = 0;
  int nonExecStreak_ = 0;
  int livelockLimit_ = 0;
};

/// Enters the root through its first connected start port whose guard
/// holds (declaration order). Root parameters take their defaults,
/// overridden by `rootArgs`. Throws NoEnabledStartError when no start port
/// is enabled, EngineError on unresolvable roots or unbound parameters.
RunState init_run(const SymbolTable& table, const std::string& rootName, const WorldFile& world,
                  std::uint64_t seed, RunLimits limits = {}, int componentCount = 0,
                  const std::map<std::string, Value>& rootArgs = {});

/// Advances one micro-step: descend to a leaf, tick the active device
/// session once, or fire one transition from a reached end port. Returns
/// the events emitted. Errors surface as a Fault outcome, never as
/// exceptions.
std::vector<TraceEvent> step(RunState& run);

/// Steps until the run finishes; the trace is seq-contiguous and ends with
/// the single RunResult event.
std::pair<RunOutcome, ExecutionTrace> run_to_end(RunState& run);

}  // namespace lr
