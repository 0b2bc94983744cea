#include "lr/devices.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lr {

const char* device_name(DeviceKind k) {
  switch (k) {
    case DeviceKind::Robot: return "robot";
    case DeviceKind::Tool: return "tool";
    case DeviceKind::Perception: return "perception";
  }
  return "?";
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::Converged: return "converged";
    case StopReason::Completed: return "completed";
    case StopReason::StopCondition: return "stop_condition";
    case StopReason::Timeout: return "timeout";
  }
  return "?";
}

const std::vector<CommandSignature>& all_signatures() {
  static const std::vector<CommandSignature> sigs = {
      {"robot.moveCartesian",
       DeviceKind::Robot,
       {{"goal", ArgKind::Frame, true, 0},
        {"goalRef", ArgKind::Str, true, 0},
        {"tf", ArgKind::Frame, false, 0},
        {"tfRef", ArgKind::Str, false, 0},
        {"link", ArgKind::Str, false, 0},
        {"stiffness", ArgKind::VecN, false, 6},
        {"damping", ArgKind::VecN, false, 6}},
       {"pose", "contact", "converged", "force_x", "force_y", "force_z", "torque_x", "torque_y",
        "torque_z"}},
      {"robot.moveJoint",
       DeviceKind::Robot,
       {{"joints", ArgKind::VecN, true, 7},
        {"stiffness", ArgKind::VecN, false, 7},
        {"damping", ArgKind::VecN, false, 7}},
       {"pose", "contact", "converged", "force_x", "force_y", "force_z", "torque_x", "torque_y",
        "torque_z"}},
      {"tool.grip", DeviceKind::Tool, {{"width", ArgKind::Num, false, 0}}, {"width", "grasped"}},
      {"tool.release", DeviceKind::Tool, {{"width", ArgKind::Num, false, 0}}, {"width", "grasped"}},
      {"perception.localize",
       DeviceKind::Perception,
       {{"object", ArgKind::Str, true, 0}},
       {"pose"}},
  };
  return sigs;
}

const CommandSignature* find_signature(const std::string& path) {
  for (const auto& s : all_signatures())
    if (s.path == path) return &s;
  return nullptr;
}

namespace {

constexpr double kConvergedPos = 1e-4;  // m
constexpr double kConvergedRot = 1e-3;  // rad
constexpr double kStiffnessCap = 5000.0;
constexpr double kGraspAxialTol = 0.01;  // m

const Value* find_arg(const std::map<std::string, Value>& args, const std::string& name) {
  auto it = args.find(name);
  return it == args.end() ? nullptr : &it->second;
}

Vector6d vec6_of(const Value& v, const std::string& what) {
  if (v.kind() != Value::Kind::Vec || v.as_vec().size() != 6)
    throw MalformedCommandError(what + " must be a 6-vector");
  Vector6d out;
  for (int i = 0; i < 6; ++i) out[i] = v.as_vec()[static_cast<size_t>(i)];
  return out;
}

Vector7d vec7_of(const Value& v, const std::string& what) {
  if (v.kind() != Value::Kind::Vec || v.as_vec().size() != 7)
    throw MalformedCommandError(what + " must be a 7-vector");
  Vector7d out;
  for (int i = 0; i < 7; ++i) out[i] = v.as_vec()[static_cast<size_t>(i)];
  return out;
}

void check_impedance(const Vector6d& st) {
  for (int i = 0; i < 6; ++i)
    if (st[i] < 0) throw MalformedCommandError("stiffness must be non-negative");
  for (int i = 0; i < 3; ++i)
    if (st[i] > kStiffnessCap)
      throw SimFaultError(
          fmt::format("translational stiffness {} exceeds the {} N/m cap", st[i], kStiffnessCap));
}

std::vector<const PlaneFeature*> active_planes(const std::vector<ContactFeature>& contacts,
                                               const std::map<std::string, Transform>& truth,
                                               const Vector3d& contactPos) {
  std::vector<const PlaneFeature*> out;
  for (const auto& f : contacts) {
    if (const auto* p = std::get_if<PlaneFeature>(&f)) {
      if (!p->nearObject.empty()) {
        auto it = truth.find(p->nearObject);
        if (it == truth.end()) continue;
        if ((contactPos - it->second.translation()).norm() > p->nearRadius) continue;
      }
      out.push_back(p);
    }
  }
  return out;
}

const ScrewJointFeature* screw_feature(const std::vector<ContactFeature>& contacts) {
  for (const auto& f : contacts)
    if (const auto* s = std::get_if<ScrewJointFeature>(&f)) return s;
  return nullptr;
}

}  // namespace

ResolvedCall make_command(const std::string& path, const std::map<std::string, Value>& args) {
  const CommandSignature* sig = find_signature(path);
  if (!sig) throw MalformedCommandError("unknown device command: " + path);
  for (const auto& [name, value] : args) {
    bool known = false;
    for (const auto& spec : sig->args) known = known || spec.name == name;
    if (!known)
      throw MalformedCommandError(fmt::format("unknown argument '{}' for {}", name, path));
  }
  for (const auto& spec : sig->args) {
    if (spec.required && !find_arg(args, spec.name))
      throw MalformedCommandError(fmt::format("missing argument '{}' for {}", spec.name, path));
  }

  ResolvedCall call;
  call.kind = sig->kind;
  call.path = path;
  if (path == "robot.moveCartesian") {
    CartesianMove m;
    const Value* goal = find_arg(args, "goal");
    if (goal->kind() != Value::Kind::Vec || goal->as_vec().size() != 6)
      throw MalformedCommandError("goal must be a frame (6 numbers)");
    m.gf.T = transform_from_vec6(goal->as_vec());
    const Value* goalRef = find_arg(args, "goalRef");
    if (goalRef->kind() != Value::Kind::Str) throw MalformedCommandError("goalRef must be a string");
    m.gf.ref = goalRef->as_str();
    if (const Value* tf = find_arg(args, "tf")) {
      if (tf->kind() != Value::Kind::Vec || tf->as_vec().size() != 6)
        throw MalformedCommandError("tf must be a frame (6 numbers)");
      m.tf.T = transform_from_vec6(tf->as_vec());
    }
    if (const Value* tfRef = find_arg(args, "tfRef")) {
      if (tfRef->kind() != Value::Kind::Str) throw MalformedCommandError("tfRef must be a string");
      m.tf.ref = tfRef->as_str();
    }
    if (const Value* link = find_arg(args, "link")) {
      if (link->kind() != Value::Kind::Str) throw MalformedCommandError("link must be a string");
      m.tf.link = link->as_str();
    }
    m.imp.stiffness << 1000, 1000, 1000, 50, 50, 50;
    m.imp.damping << 0.7, 0.7, 0.7, 0.7, 0.7, 0.7;
    if (const Value* st = find_arg(args, "stiffness")) m.imp.stiffness = vec6_of(*st, "stiffness");
    if (const Value* da = find_arg(args, "damping")) m.imp.damping = vec6_of(*da, "damping");
    for (int i = 0; i < 6; ++i)
      if (m.imp.damping[i] < 0) throw MalformedCommandError("damping must be non-negative");
    check_impedance(m.imp.stiffness);
    call.command = m;
  } else if (path == "robot.moveJoint") {
    JointMove m;
    m.joints = vec7_of(*find_arg(args, "joints"), "joints");
    m.stiffness.setConstant(1000.0);
    m.damping.setConstant(0.7);
    if (const Value* st = find_arg(args, "stiffness")) m.stiffness = vec7_of(*st, "stiffness");
    if (const Value* da = find_arg(args, "damping")) m.damping = vec7_of(*da, "damping");
    for (int i = 0; i < 7; ++i)
      if (m.stiffness[i] < 0 || m.damping[i] < 0)
        throw MalformedCommandError("stiffness and damping must be non-negative");
    call.command = m;
  } else if (path == "tool.grip" || path == "tool.release") {
    ToolCommand t;
    t.op = path == "tool.grip" ? ToolCommand::Op::Grip : ToolCommand::Op::Release;
    if (const Value* w = find_arg(args, "width")) {
      if (w->kind() != Value::Kind::Num) throw MalformedCommandError("width must be a number");
      if (w->as_num() < 0) throw MalformedCommandError("width must be non-negative");
      t.width = w->as_num();
    }
    call.command = t;
  } else {  // perception.localize
    PerceiveCommand p;
    const Value* obj = find_arg(args, "object");
    if (obj->kind() != Value::Kind::Str) throw MalformedCommandError("object must be a string");
    p.object = obj->as_str();
    call.command = p;
  }
  return call;
}

// --- rig -------------------------------------------------------------------

DeviceRig::DeviceRig(const WorldFile& world, std::uint64_t seed) : cfg_(world), rng_(seed) {
  for (const auto& [name, obj] : world.em.objects()) {
    truth_[name] = world.em.resolve_pose(name, EnvironmentalModel::kRoot);
    auto it = obj.attrs.find("width");
    if (it != obj.attrs.end() && std::holds_alternative<double>(it->second))
      widths_[name] = std::get<double>(it->second);
  }
  toolWidth_ = cfg_.gripper.maxWidth;
  if (world.em.has_object("robot"))
    robotBase_ = world.em.resolve_pose("robot", EnvironmentalModel::kRoot);
  // The initial flange pose is taken from a `tcp` object when present.
  if (world.em.has_object("tcp"))
    flange_ = world.em.resolve_pose("tcp", EnvironmentalModel::kRoot);
  else
    flange_ = robotBase_;
}

Transform DeviceRig::true_pose(const std::string& name) const {
  if (name == EnvironmentalModel::kRoot) return Transform::Identity();
  auto it = truth_.find(name);
  if (it == truth_.end()) throw UnknownObjectError(name);
  return it->second;
}

double DeviceRig::uniform01() {
  // 53-bit mantissa in (0,1); avoids exact 0 for the Box-Muller log.
  return (static_cast<double>(rng_() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

double DeviceRig::noise(double sigma) {
  if (sigma <= 0.0) return 0.0;
  for (;;) {
    double u1 = uniform01();
    double u2 = uniform01();
    double n = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    if (std::abs(n) <= 3.0) return n * sigma;  // truncated at 3 sigma
  }
}

void DeviceRig::publish_robot(const CommandSession& s, double time) {
  Vector6d pose = xyzrpy_from_transform(flange_);
  merged_["robot.pose.x"] = pose[0];
  merged_["robot.pose.y"] = pose[1];
  merged_["robot.pose.z"] = pose[2];
  merged_["robot.pose.rx"] = pose[3];
  merged_["robot.pose.ry"] = pose[4];
  merged_["robot.pose.rz"] = pose[5];
  merged_["robot.force.x"] = s.lastWrench[0];
  merged_["robot.force.y"] = s.lastWrench[1];
  merged_["robot.force.z"] = s.lastWrench[2];
  merged_["robot.torque.x"] = s.lastWrench[3];
  merged_["robot.torque.y"] = s.lastWrench[4];
  merged_["robot.torque.z"] = s.lastWrench[5];
  for (int i = 0; i < 7; ++i) merged_[fmt::format("robot.joints.{}", i)] = joints_[i];
  merged_["robot.converged"] = s.converged;
  set_time(time);
}

void DeviceRig::publish_tool(double time) {
  merged_["tool.width"] = toolWidth_;
  merged_["tool.grasped"] = grasped_;
  set_time(time);
}

// --- session lifecycle -------------------------------------------------

CommandSession begin(DeviceRig& rig, const ResolvedCall& call, const EnvironmentalModel& em) {
  CommandSession s;
  s.rig = &rig;
  s.call = call;
  if (const auto* m = std::get_if<CartesianMove>(&call.command)) {
    // Goal and task frames freeze against the belief at begin time.
    s.goal = em.resolve_pose(m->gf.ref, EnvironmentalModel::kRoot) * m->gf.T;
    s.taskRot = (em.resolve_pose(m->tf.ref, EnvironmentalModel::kRoot) * m->tf.T).linear();
    s.commanded = rig.flange_;
    rig.publish_robot(s, 0.0);
  } else if (const auto* j = std::get_if<JointMove>(&call.command)) {
    s.jointGoal = j->joints;
    rig.publish_robot(s, 0.0);
  } else if (const auto* t = std::get_if<ToolCommand>(&call.command)) {
    // A grip only ever closes, a release only ever opens.
    if (t->op == ToolCommand::Op::Grip) {
      s.widthTarget = std::clamp(t->width.value_or(0.0), 0.0, rig.toolWidth_);
    } else {
      s.widthTarget = std::clamp(t->width.value_or(rig.cfg_.gripper.maxWidth), rig.toolWidth_,
                                 rig.cfg_.gripper.maxWidth);
    }
    rig.publish_tool(0.0);
  } else {
    const auto& p = std::get<PerceiveCommand>(call.command);
    if (!rig.has_true_pose(p.object)) throw UnknownObjectError(p.object);
    s.remainingTicks = rig.cfg_.perception.latencyTicks;
    rig.set_time(0.0);
  }
  return s;
}

void DeviceRig::tick_cartesian(CommandSession& s, double dt) {
  const auto& m = std::get<CartesianMove>(s.call.command);
  check_impedance(m.imp.stiffness);

  // Advance the commanded flange pose toward the goal.
  Vector3d dp = s.goal.translation() - s.commanded.translation();
  double lin = cfg_.robot.vLin * dt;
  if (dp.norm() <= lin)
    s.commanded.translation() = s.goal.translation();
  else
    s.commanded.translation() += dp.normalized() * lin;

  Eigen::AngleAxisd delta(s.commanded.linear().transpose() * s.goal.linear());
  double rotStep = std::min(delta.angle(), cfg_.robot.vRot * dt);
  Vector3d stepAxisWorld = Vector3d::Zero();
  if (delta.angle() > 1e-12) {
    stepAxisWorld = s.commanded.linear() * delta.axis();
    if (rotStep >= delta.angle() - 1e-15)
      s.commanded.linear() = s.goal.linear();
    else
      s.commanded.linear() =
          s.commanded.linear() * Eigen::AngleAxisd(rotStep, delta.axis()).toRotationMatrix();
  } else {
    rotStep = 0.0;
  }

  // Contact frame: the grasped object if any, otherwise the flange.
  Transform contactCmd = grasped_ ? Transform(s.commanded * graspOffset_) : s.commanded;
  Transform contactAct = contactCmd;

  // Plane features: Dykstra's cyclic projection computes the nearest point
  // of the feasible intersection (plain alternating projection would settle
  // on a wall instead of the corner of a funnel).
  auto planes = active_planes(cfg_.contacts, truth_, contactCmd.translation());
  if (!planes.empty()) {
    Vector3d x = contactCmd.translation();
    std::vector<Vector3d> corr(planes.size(), Vector3d::Zero());
    for (int pass = 0; pass < 64; ++pass) {
      for (size_t i = 0; i < planes.size(); ++i) {
        Vector3d y = x + corr[i];
        double v = planes[i]->offset - planes[i]->normal.dot(y);
        Vector3d proj = y + std::max(v, 0.0) * planes[i]->normal;
        corr[i] = y - proj;
        x = proj;
      }
    }
    contactAct.translation() = x;
  }

  // Screw joint: a world-vertical helix through the axis object (engageZ
  // and zMin are world-z coordinates). While a grasped object sits within
  // the capture radius at or below engageZ, rotation advance drives z down
  // the thread and the xy snaps onto the axis.
  const ScrewJointFeature* sj = screw_feature(cfg_.contacts);
  bool screwActive = false;
  const Vector3d screwAxisDir = Vector3d::UnitZ();
  if (sj && grasped_) {
    Vector3d axisPos = true_pose(sj->axisObject).translation();
    Vector3d toAxis = contactCmd.translation() - axisPos;
    if (toAxis.head<2>().norm() <= sj->captureRadius) {
      if (!s.engaged) {
        double prevZ = (flange_ * graspOffset_).translation().z();
        if (std::min(contactCmd.translation().z(), prevZ) <= sj->engageZ) {
          s.engaged = true;
          s.engageRefZ = std::min(std::min(contactCmd.translation().z(), prevZ), sj->engageZ);
          s.screwAdvance = 0.0;
        }
      }
      if (s.engaged) {
        screwActive = true;
        s.screwAdvance += std::abs(rotStep * stepAxisWorld.dot(screwAxisDir));
        double helixZ = s.engageRefZ - sj->pitchPerRev * s.screwAdvance / (2.0 * M_PI);
        helixZ = std::max(helixZ, sj->zMin);
        contactAct.translation() = Vector3d(axisPos.x(), axisPos.y(), helixZ);
      }
    }
  }

  // Wrench: diag(ST) on the pose error, feature stiffness along
  // feature-owned directions, expressed in the task frame.
  Vector6d err = pose_error(contactCmd, contactAct);
  Vector3d force = m.imp.stiffness.head<3>().cwiseProduct(Vector3d(s.taskRot.transpose() * err.head<3>()));
  Vector3d torque = m.imp.stiffness.tail<3>().cwiseProduct(Vector3d(s.taskRot.transpose() * err.tail<3>()));
  for (const auto* p : planes) {
    Vector3d nT = s.taskRot.transpose() * p->normal;
    double pen = p->offset - p->normal.dot(contactCmd.translation());
    double fn = p->k * std::max(pen, 0.0);
    force = force - force.dot(nT) * nT + fn * nT;
  }
  if (screwActive) {
    Vector3d aT = s.taskRot.transpose() * screwAxisDir;
    torque = torque - torque.dot(aT) * aT + sj->resistK * s.screwAdvance * aT;
  }
  s.lastWrench.head<3>() = force;
  s.lastWrench.tail<3>() = torque;

  // Settle the actual flange and carry the grasped object along.
  flange_ = grasped_ ? Transform(contactAct * graspOffset_.inverse()) : contactAct;
  if (grasped_) truth_[graspedObject_] = contactAct;

  Vector6d toGoal = pose_error(flange_, s.goal);
  s.converged = toGoal.head<3>().norm() < kConvergedPos && toGoal.tail<3>().norm() < kConvergedRot;
  if (s.converged && s.status == SessionStatus::Running) {
    s.status = SessionStatus::Stopped;
    s.reason = StopReason::Converged;
  }
}

void DeviceRig::tick_joint(CommandSession& s, double dt) {
  // Joint motions track rigidly; contact features do not apply.
  double step = cfg_.robot.vRot * dt;
  double maxErr = 0.0;
  for (int i = 0; i < 7; ++i) {
    double d = s.jointGoal[i] - joints_[i];
    joints_[i] += std::clamp(d, -step, step);
    maxErr = std::max(maxErr, std::abs(s.jointGoal[i] - joints_[i]));
  }
  // Forward-kinematics stub: position from the first three joints relative
  // to the robot base, orientation from the next three, joint 6 spare.
  flange_ = robotBase_ * transform_from_xyzrpy(Vector3d(joints_[0], joints_[1], joints_[2]),
                                               Vector3d(joints_[3], joints_[4], joints_[5]));
  if (grasped_) truth_[graspedObject_] = flange_ * graspOffset_;
  s.lastWrench.setZero();
  s.converged = maxErr < kConvergedRot;
  if (s.converged && s.status == SessionStatus::Running) {
    s.status = SessionStatus::Stopped;
    s.reason = StopReason::Converged;
  }
}

void DeviceRig::tick_tool(CommandSession& s, double dt) {
  const auto& t = std::get<ToolCommand>(s.call.command);
  double step = cfg_.gripper.jawSpeed * dt;
  if (t.op == ToolCommand::Op::Release) {
    if (grasped_) {
      grasped_ = false;
      graspedObject_.clear();
    }
    toolWidth_ = std::min(toolWidth_ + step, s.widthTarget);
    if (toolWidth_ >= s.widthTarget) {
      s.status = SessionStatus::Stopped;
      s.reason = StopReason::Completed;
    }
    return;
  }
  toolWidth_ = std::max(toolWidth_ - step, s.widthTarget);
  if (!grasped_) {
    // A grasp closes on the first graspable object (one declaring a grasp
    // `width` attribute) whose grasp point lies within max_width/2
    // laterally and 10 mm axially of the tool frame.
    for (const auto& [name, objWidth] : widths_) {
      Transform rel = flange_.inverse() * truth_.at(name);
      double lateral = rel.translation().head<2>().norm();
      double axial = std::abs(rel.translation().z());
      if (lateral <= cfg_.gripper.maxWidth / 2.0 && axial <= kGraspAxialTol) {
        if (toolWidth_ <= objWidth) {
          toolWidth_ = objWidth;
          grasped_ = true;
          graspedObject_ = name;
          graspOffset_ = flange_.inverse() * truth_.at(name);
          s.status = SessionStatus::Stopped;
          s.reason = StopReason::Completed;
        }
        break;
      }
    }
  } else {
    auto wit = widths_.find(graspedObject_);
    double objWidth = wit == widths_.end() ? 0.01 : wit->second;
    if (toolWidth_ <= objWidth) {
      toolWidth_ = objWidth;
      s.status = SessionStatus::Stopped;
      s.reason = StopReason::Completed;
    }
  }
  if (s.status == SessionStatus::Running && toolWidth_ <= s.widthTarget) {
    s.status = SessionStatus::Stopped;
    s.reason = StopReason::Completed;
  }
}

void DeviceRig::tick_perception(CommandSession& s) {
  if (--s.remainingTicks <= 0) {
    const auto& p = std::get<PerceiveCommand>(s.call.command);
    Transform truth = true_pose(p.object);
    Vector3d dPos(noise(cfg_.perception.sigmaPos), noise(cfg_.perception.sigmaPos),
                  noise(cfg_.perception.sigmaPos));
    Vector3d dRot(noise(cfg_.perception.sigmaRot), noise(cfg_.perception.sigmaRot),
                  noise(cfg_.perception.sigmaRot));
    Transform noisy = Transform::Identity();
    noisy.linear() = transform_from_xyzrpy(Vector3d::Zero(), dRot).linear() * truth.linear();
    noisy.translation() = truth.translation() + dPos;
    s.result["pose"] = noisy;
    s.status = SessionStatus::Stopped;
    s.reason = StopReason::Completed;
  }
}

void DeviceRig::fill_result(CommandSession& s) {
  switch (s.call.kind) {
    case DeviceKind::Robot:
      s.result["pose"] = flange_;
      s.result["contact"] = grasped_ ? truth_[graspedObject_] : flange_;
      s.result["converged"] = s.converged;
      s.result["force_x"] = s.lastWrench[0];
      s.result["force_y"] = s.lastWrench[1];
      s.result["force_z"] = s.lastWrench[2];
      s.result["torque_x"] = s.lastWrench[3];
      s.result["torque_y"] = s.lastWrench[4];
      s.result["torque_z"] = s.lastWrench[5];
      break;
    case DeviceKind::Tool:
      s.result["width"] = toolWidth_;
      s.result["grasped"] = grasped_;
      break;
    case DeviceKind::Perception:
      break;  // pose recorded when the localization completed
  }
}

SensorSnapshot tick(CommandSession& s, const EnvironmentalModel&, double dt) {
  DeviceRig& rig = *s.rig;
  if (s.status != SessionStatus::Running) return rig.snapshot();
  ++s.ticks;
  switch (s.call.kind) {
    case DeviceKind::Robot:
      if (std::holds_alternative<CartesianMove>(s.call.command))
        rig.tick_cartesian(s, dt);
      else
        rig.tick_joint(s, dt);
      rig.publish_robot(s, static_cast<double>(s.ticks) * dt);
      break;
    case DeviceKind::Tool:
      rig.tick_tool(s, dt);
      rig.publish_tool(static_cast<double>(s.ticks) * dt);
      break;
    case DeviceKind::Perception:
      rig.tick_perception(s);
      rig.set_time(static_cast<double>(s.ticks) * dt);
      break;
  }
  if (s.status == SessionStatus::Stopped && s.result.empty()) rig.fill_result(s);
  return rig.snapshot();
}

ResultRecord stop(CommandSession& s, StopReason reason) {
  if (s.status == SessionStatus::Running) {
    s.status = SessionStatus::Stopped;
    s.reason = reason;
  }
  if (s.result.empty()) s.rig->fill_result(s);
  return s.result;
}

}  // namespace lr
