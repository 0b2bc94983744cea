#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Geometry>

namespace lr {

using Transform = Eigen::Isometry3d;
using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;
using Vector7d = Eigen::Matrix<double, 7, 1>;

/// Rotation convention for serialized poses: (roll, pitch, yaw) applied
/// about the fixed axes in Z, then Y, then X order (ZYX-extrinsic), i.e.
/// R = Rx(roll) * Ry(pitch) * Rz(yaw).
Transform transform_from_xyzrpy(const Vector3d& xyz, const Vector3d& rpy);
Transform transform_from_vec6(const std::vector<double>& v);
Vector6d xyzrpy_from_transform(const Transform& t);

/// Renormalizes the rotation block through a unit quaternion.
Transform orthonormalized(const Transform& t);

/// 6-dim pose error a ⊖ b: translation difference and the axis-angle vector
/// of Ra * Rb^T, both in the common parent frame.
Vector6d pose_error(const Transform& a, const Transform& b);

struct WorldError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownObjectError : WorldError {
  explicit UnknownObjectError(const std::string& name)
      : WorldError("unknown object: " + name) {}
};
struct TypeMismatchError : WorldError {
  using WorldError::WorldError;
};

/// Attribute values stored on scene objects. The `pose` attribute is an
/// alias of the object transform.
using AttrValue = std::variant<double, bool, std::string, Transform>;

struct SceneObject {
  std::string name;
  std::string parent;  // "world" is the root
  Transform local = Transform::Identity();  // pose relative to parent
  std::map<std::string, AttrValue> attrs;
};

/// The environmental model: a tree of named rigid objects, mutated only via
/// apply_update. `revision` increments by exactly one per applied binding.
class EnvironmentalModel {
 public:
  static constexpr const char* kRoot = "world";

  void add_object(SceneObject obj);
  bool has_object(const std::string& name) const { return objects_.count(name) != 0; }
  const SceneObject& object(const std::string& name) const;
  const std::map<std::string, SceneObject>& objects() const { return objects_; }
  std::uint64_t revision() const { return revision_; }

  /// Pose of `obj` expressed in the frame of `ref`.
  Transform resolve_pose(const std::string& obj, const std::string& ref) const;

  /// Applies one update binding. A path of [world,] object, attr... writes
  /// the dotted attribute; attribute `pose` replaces the object transform
  /// (given relative to its parent's frame resolved in world coordinates).
  void apply_update(const std::vector<std::string>& emPath, const AttrValue& value);

  /// Reads an attribute through the same path convention; null if the path
  /// does not name an existing object, throws only for the root name itself.
  const AttrValue* find_attr(const std::vector<std::string>& emPath) const;

 private:
  Transform chain_to_root(const std::string& name) const;

  std::map<std::string, SceneObject> objects_;
  std::uint64_t revision_ = 0;
};

bool em_equal(const EnvironmentalModel& a, const EnvironmentalModel& b, double tol = 0.0);

// --- contact and device configuration carried by world files -------------

/// Unilateral plane constraint n·p >= offset with contact stiffness k.
/// When `nearObject` is set the plane is active only while the contact
/// point is within `nearRadius` of that object (for localized features such
/// as sockets).
struct PlaneFeature {
  Vector3d normal = Vector3d::UnitZ();
  double offset = 0.0;
  double k = 1000.0;
  std::string nearObject;  // empty = always active
  double nearRadius = 0.0;
};

/// Helical joint about the z-axis through `axisObject`. Engages while the
/// grasped object sits within `captureRadius` of the axis at or below
/// `engageZ`; rotation advance then drives the z coordinate down by
/// pitch/rev and produces a resisting torque resistK per radian. The thread
/// model is symmetric in rotation direction and the z coordinate never goes
/// below zMin.
struct ScrewJointFeature {
  std::string axisObject;
  double pitchPerRev = 0.01;
  double engageZ = 0.0;
  double resistK = 0.1;
  double zMin = 0.0;
  double captureRadius = 0.01;
};

using ContactFeature = std::variant<PlaneFeature, ScrewJointFeature>;

struct PerceptionConfig {
  double sigmaPos = 0.0;  // m, per axis, truncated at 3 sigma
  double sigmaRot = 0.0;  // rad, per axis, truncated at 3 sigma
  int latencyTicks = 10;
};

struct GripperConfig {
  double maxWidth = 0.08;  // m
  double jawSpeed = 0.1;   // m/s
};

struct RobotConfig {
  double vLin = 0.1;  // m/s commanded translation speed cap
  double vRot = 0.5;  // rad/s commanded rotation speed cap
};

struct WorldFile {
  EnvironmentalModel em;
  std::vector<ContactFeature> contacts;
  PerceptionConfig perception;
  GripperConfig gripper;
  RobotConfig robot;
};

/// Loads and validates a world JSON file. Schema violations raise
/// WorldError with a path-qualified message.
WorldFile load_world(const std::string& file);

}  // namespace lr
