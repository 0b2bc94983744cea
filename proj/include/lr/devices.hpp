#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "lr/ast.hpp"
#include "lr/world.hpp"

namespace lr {

// The simulated device adapters. The quasi-static contact model:
//
//   - the commanded pose advances toward the goal along a straight segment
//     at capped speeds (v_lin translation, v_rot rotation),
//   - the actual pose is the commanded pose projected onto the feasible set
//     of the active contact features,
//   - the reported wrench is diag(ST) times the 6-dim pose error
//     (commanded minus actual; rotation as axis-angle), expressed in the
//     task frame, except along feature-owned directions where the feature's
//     own stiffness applies: a plane contributes k * penetration along its
//     normal, a screw joint contributes resistK * rotation-advance about
//     its axis.
//
// Damping values (DA) are accepted, range-checked and recorded, but do not
// affect the simulation: there is no velocity state in the quasi-static
// model. They are carried so models stay faithful to the motion-command
// interface.

enum class DeviceKind { Robot, Tool, Perception };

struct MalformedCommandError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SimFaultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownChannelError : std::runtime_error {
  explicit UnknownChannelError(const std::string& path)
      : std::runtime_error("unknown channel: " + path) {}
};

struct TaskFrame {
  Transform T = Transform::Identity();
  std::string ref = "world";
  std::optional<std::string> link;  // carried, never interpreted
};

struct GoalFrame {
  Transform T = Transform::Identity();
  std::string ref = "world";
};

/// Per-axis stiffness (N/m, Nm/rad) and damping ratios. Translational
/// stiffness above 5000 N/m is rejected as a simulation stability cap.
struct ImpedanceParams {
  Vector6d stiffness;
  Vector6d damping;
};

struct CartesianMove {
  TaskFrame tf;
  GoalFrame gf;
  ImpedanceParams imp;
};

struct JointMove {
  Vector7d joints;
  Vector7d stiffness;
  Vector7d damping;
};

struct ToolCommand {
  enum class Op { Grip, Release };
  Op op = Op::Grip;
  std::optional<double> width;
};

struct PerceiveCommand {
  std::string object;
};

using DeviceCommand = std::variant<CartesianMove, JointMove, ToolCommand, PerceiveCommand>;

struct ResolvedCall {
  DeviceKind kind = DeviceKind::Robot;
  std::string path;
  DeviceCommand command;
};

/// Builds a typed command from evaluated argument values; throws
/// MalformedCommandError on unknown commands, missing or ill-typed
/// arguments, or impedance values outside the accepted range.
ResolvedCall make_command(const std::string& path, const std::map<std::string, Value>& args);

// --- static command catalog (shared with validation) ----------------------

enum class ArgKind { Num, Bool, Str, Frame, VecN };

struct ArgSpec {
  std::string name;
  ArgKind kind;
  bool required;
  int vecLen;  // for VecN
};

struct CommandSignature {
  std::string path;
  DeviceKind kind;
  std::vector<ArgSpec> args;
  std::vector<std::string> resultFields;
};

const CommandSignature* find_signature(const std::string& path);
const std::vector<CommandSignature>& all_signatures();
const char* device_name(DeviceKind k);

// --- sessions --------------------------------------------------------------

using ChannelValue = std::variant<double, bool>;
/// Channel map: robot.pose.{x,y,z,rx,ry,rz}, robot.force.{x,y,z},
/// robot.torque.{x,y,z}, robot.joints.0..6, robot.converged, tool.width,
/// tool.grasped, time (seconds since command start). A device's channels
/// appear once it has been commanded and persist across later sessions.
using SensorSnapshot = std::map<std::string, ChannelValue>;

using ResultRecord = std::map<std::string, AttrValue>;

enum class SessionStatus { Running, Stopped, Faulted };

enum class StopReason { Converged, Completed, StopCondition, Timeout };

const char* stop_reason_name(StopReason r);

class DeviceRig;

struct CommandSession {
  DeviceRig* rig = nullptr;
  ResolvedCall call;
  SessionStatus status = SessionStatus::Running;
  StopReason reason = StopReason::Completed;
  std::string faultMessage;
  ResultRecord result;
  std::int64_t ticks = 0;

  // robot state
  Transform goal = Transform::Identity();      // flange target, frozen at begin
  Transform commanded = Transform::Identity();  // flange setpoint
  Eigen::Matrix3d taskRot = Eigen::Matrix3d::Identity();  // frozen task frame
  Vector6d lastWrench = Vector6d::Zero();
  bool converged = false;
  bool engaged = false;       // screw joint engagement, sticky per session
  double engageRefZ = 0.0;    // contact z at engagement
  double screwAdvance = 0.0;  // accumulated |rotation| about the screw axis, rad
  Vector7d jointGoal = Vector7d::Zero();
  // tool state
  double widthTarget = 0.0;
  // perception state
  int remainingTicks = 0;
};

/// Simulation ground truth shared by all sessions of one run: true object
/// poses, the robot flange, the tool state and the contact features. The
/// environmental model is the run's belief and is only ever written through
/// update bindings; the rig never touches it.
class DeviceRig {
 public:
  DeviceRig(const WorldFile& world, std::uint64_t seed);

  const SensorSnapshot& snapshot() const { return merged_; }
  const Transform& flange() const { return flange_; }
  bool grasped() const { return grasped_; }
  const std::string& grasped_object() const { return graspedObject_; }
  double tool_width() const { return toolWidth_; }
  Transform true_pose(const std::string& name) const;
  bool has_true_pose(const std::string& name) const { return truth_.count(name) != 0; }

  /// Gaussian draw truncated at 3 sigma; portable Box-Muller over the
  /// seeded engine so traces are reproducible across platforms.
  double noise(double sigma);

 private:
  friend CommandSession begin(DeviceRig&, const ResolvedCall&, const EnvironmentalModel&);
  friend SensorSnapshot tick(CommandSession&, const EnvironmentalModel&, double dt);
  friend ResultRecord stop(CommandSession&, StopReason);

  void tick_cartesian(CommandSession& s, double dt);
  void tick_joint(CommandSession& s, double dt);
  void tick_tool(CommandSession& s, double dt);
  void tick_perception(CommandSession& s);
  void fill_result(CommandSession& s);
  void publish_robot(const CommandSession& s, double time);
  void publish_tool(double time);
  void set_time(double time) { merged_["time"] = time; }
  double uniform01();

  WorldFile cfg_;
  std::map<std::string, Transform> truth_;  // world-frame true poses
  std::map<std::string, double> widths_;    // grasp widths per object
  Transform flange_ = Transform::Identity();
  Vector7d joints_ = Vector7d::Zero();
  Transform robotBase_ = Transform::Identity();
  double toolWidth_ = 0.08;
  bool grasped_ = false;
  std::string graspedObject_;
  Transform graspOffset_ = Transform::Identity();  // flange -> object
  SensorSnapshot merged_;
  std::mt19937_64 rng_;
};

/// Starts a command. The goal pose of Cartesian commands is frozen here as
/// resolve_pose(em, gf.ref, "world") * gf.T. The initial sensor snapshot is
/// published immediately.
CommandSession begin(DeviceRig& rig, const ResolvedCall& call, const EnvironmentalModel& em);

/// Advances one step of dt seconds and returns the fresh snapshot. No-op
/// once the session has stopped or faulted.
SensorSnapshot tick(CommandSession& s, const EnvironmentalModel& em, double dt);

/// Finalizes the session with the given reason and returns the result
/// record: robot commands yield pose/contact/converged and the final
/// wrench, localize yields pose, tool commands yield width/grasped.
ResultRecord stop(CommandSession& s, StopReason reason);

}  // namespace lr
