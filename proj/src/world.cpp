#include "lr/world.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

namespace lr {

Transform transform_from_xyzrpy(const Vector3d& xyz, const Vector3d& rpy) {
  Transform t = Transform::Identity();
  t.linear() = (Eigen::AngleAxisd(rpy.x(), Vector3d::UnitX()) *
                Eigen::AngleAxisd(rpy.y(), Vector3d::UnitY()) *
                Eigen::AngleAxisd(rpy.z(), Vector3d::UnitZ()))
                   .toRotationMatrix();
  t.translation() = xyz;
  return t;
}

Transform transform_from_vec6(const std::vector<double>& v) {
  if (v.size() != 6) throw WorldError("frame literal must have 6 entries");
  return transform_from_xyzrpy(Vector3d(v[0], v[1], v[2]), Vector3d(v[3], v[4], v[5]));
}

Vector6d xyzrpy_from_transform(const Transform& t) {
  Vector6d out;
  out.head<3>() = t.translation();
  const Eigen::Matrix3d R = t.linear();
  // R = Rx(r) * Ry(p) * Rz(y): R(0,2) = sin(p)
  double sp = std::clamp(R(0, 2), -1.0, 1.0);
  double p = std::asin(sp);
  double r, y;
  if (std::abs(sp) < 1.0 - 1e-12) {
    r = std::atan2(-R(1, 2), R(2, 2));
    y = std::atan2(-R(0, 1), R(0, 0));
  } else {
    // Gimbal lock: fold everything into roll.
    r = std::atan2(R(2, 1), R(1, 1));
    y = 0.0;
  }
  out.tail<3>() = Vector3d(r, p, y);
  return out;
}

Transform orthonormalized(const Transform& t) {
  Transform out = t;
  Eigen::Quaterniond q(t.linear());
  q.normalize();
  out.linear() = q.toRotationMatrix();
  return out;
}

Vector6d pose_error(const Transform& a, const Transform& b) {
  Vector6d err;
  err.head<3>() = a.translation() - b.translation();
  Eigen::AngleAxisd aa(a.linear() * b.linear().transpose());
  err.tail<3>() = aa.angle() * aa.axis();
  return err;
}

void EnvironmentalModel::add_object(SceneObject obj) {
  if (obj.name == kRoot) throw WorldError("object may not be named 'world'");
  objects_[obj.name] = std::move(obj);
}

const SceneObject& EnvironmentalModel::object(const std::string& name) const {
  auto it = objects_.find(name);
  if (it == objects_.end()) throw UnknownObjectError(name);
  return it->second;
}

Transform EnvironmentalModel::chain_to_root(const std::string& name) const {
  if (name == kRoot) return Transform::Identity();
  Transform acc = Transform::Identity();
  std::string cur = name;
  int hops = 0;
  while (cur != kRoot) {
    const SceneObject& o = object(cur);
    acc = o.local * acc;
    cur = o.parent;
    // Parent links form a tree; long chains are renormalized.
    if (++hops > 100) acc = orthonormalized(acc);
    if (hops > 10000) throw WorldError("parent chain too deep at " + name);
  }
  return acc;
}

Transform EnvironmentalModel::resolve_pose(const std::string& obj, const std::string& ref) const {
  Transform to = chain_to_root(obj);
  Transform from = chain_to_root(ref);
  return from.inverse() * to;
}

namespace {

/// Normalizes [world,] object, attr... into (object, attrKey).
std::pair<std::string, std::string> split_path(const std::vector<std::string>& emPath) {
  std::vector<std::string> p = emPath;
  if (!p.empty() && p.front() == EnvironmentalModel::kRoot && p.size() > 2) {
    p.erase(p.begin());
  }
  if (p.size() < 2)
    throw WorldError("update path needs at least object and attribute segments");
  std::string attr = p[1];
  for (size_t i = 2; i < p.size(); ++i) attr += "." + p[i];
  return {p[0], attr};
}

}  // namespace

void EnvironmentalModel::apply_update(const std::vector<std::string>& emPath,
                                      const AttrValue& value) {
  auto [objName, attr] = split_path(emPath);
  auto it = objects_.find(objName);
  if (it == objects_.end()) throw UnknownObjectError(objName);
  SceneObject& obj = it->second;
  if (attr == "pose") {
    if (!std::holds_alternative<Transform>(value))
      throw TypeMismatchError("attribute 'pose' requires a transform value");
    // Incoming poses are world-frame; store relative to the parent.
    Transform parentWorld = resolve_pose(obj.parent, kRoot);
    obj.local = parentWorld.inverse() * std::get<Transform>(value);
  } else {
    auto existing = obj.attrs.find(attr);
    if (existing != obj.attrs.end() && existing->second.index() != value.index())
      throw TypeMismatchError(
          fmt::format("attribute '{}.{}' cannot change type", objName, attr));
    obj.attrs[attr] = value;
  }
  ++revision_;
}

const AttrValue* EnvironmentalModel::find_attr(const std::vector<std::string>& emPath) const {
  std::pair<std::string, std::string> split;
  try {
    split = split_path(emPath);
  } catch (const WorldError&) {
    return nullptr;
  }
  auto it = objects_.find(split.first);
  if (it == objects_.end()) return nullptr;
  auto at = it->second.attrs.find(split.second);
  if (at != it->second.attrs.end()) return &at->second;
  return nullptr;
}

bool em_equal(const EnvironmentalModel& a, const EnvironmentalModel& b, double tol) {
  if (a.objects().size() != b.objects().size()) return false;
  auto ia = a.objects().begin();
  auto ib = b.objects().begin();
  for (; ia != a.objects().end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.parent != ib->second.parent) return false;
    if (!ia->second.local.isApprox(ib->second.local, tol)) return false;
    if (ia->second.attrs.size() != ib->second.attrs.size()) return false;
    auto aa = ia->second.attrs.begin();
    auto ab = ib->second.attrs.begin();
    for (; aa != ia->second.attrs.end(); ++aa, ++ab) {
      if (aa->first != ab->first || aa->second.index() != ab->second.index()) return false;
      bool same = true;
      if (const double* d = std::get_if<double>(&aa->second))
        same = *d == std::get<double>(ab->second);
      else if (const bool* bv = std::get_if<bool>(&aa->second))
        same = *bv == std::get<bool>(ab->second);
      else if (const std::string* s = std::get_if<std::string>(&aa->second))
        same = *s == std::get<std::string>(ab->second);
      else
        same = std::get<Transform>(aa->second).isApprox(std::get<Transform>(ab->second), tol);
      if (!same) return false;
    }
  }
  return true;
}

namespace {

using nlohmann::json;

[[noreturn]] void schema_error(const std::string& path, const std::string& msg) {
  throw WorldError(fmt::format("{}: {}", path, msg));
}

Vector3d read_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) schema_error(path, "expected 3 numbers");
  for (const auto& e : j)
    if (!e.is_number()) schema_error(path, "expected 3 numbers");
  return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

double read_num(const json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

}  // namespace

WorldFile load_world(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw WorldError("cannot read world file: " + file);
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*allow comments*/ true);
  } catch (const json::exception& e) {
    throw WorldError(fmt::format("{}: invalid JSON: {}", file, e.what()));
  }
  if (!doc.is_object()) throw WorldError(file + ": top level must be an object");

  WorldFile w;
  if (doc.contains("objects")) {
    const json& objs = doc["objects"];
    if (!objs.is_array()) schema_error("objects", "expected an array");
    std::set<std::string> names;
    for (size_t i = 0; i < objs.size(); ++i) {
      const json& jo = objs[i];
      std::string where = fmt::format("objects[{}]", i);
      if (!jo.is_object()) schema_error(where, "expected an object");
      SceneObject o;
      if (!jo.contains("name") || !jo["name"].is_string())
        schema_error(where + ".name", "expected a string");
      o.name = jo["name"].get<std::string>();
      if (o.name.empty() || o.name == EnvironmentalModel::kRoot)
        schema_error(where + ".name", "invalid object name");
      if (!names.insert(o.name).second)
        schema_error(where + ".name", "duplicate object name " + o.name);
      o.parent = jo.value("parent", std::string(EnvironmentalModel::kRoot));
      Vector3d xyz = jo.contains("xyz") ? read_vec3(jo["xyz"], where + ".xyz") : Vector3d::Zero();
      Vector3d rpy = jo.contains("rpy") ? read_vec3(jo["rpy"], where + ".rpy") : Vector3d::Zero();
      o.local = transform_from_xyzrpy(xyz, rpy);
      if (jo.contains("attrs")) {
        const json& attrs = jo["attrs"];
        if (!attrs.is_object()) schema_error(where + ".attrs", "expected an object");
        for (auto it = attrs.begin(); it != attrs.end(); ++it) {
          const json& v = it.value();
          if (v.is_number()) {
            o.attrs[it.key()] = v.get<double>();
          } else if (v.is_boolean()) {
            o.attrs[it.key()] = v.get<bool>();
          } else if (v.is_string()) {
            o.attrs[it.key()] = v.get<std::string>();
          } else {
            schema_error(where + ".attrs." + it.key(), "expected number, bool or string");
          }
        }
      }
      w.em.add_object(std::move(o));
    }
    // Parent links must exist and form a tree rooted at `world`.
    for (const auto& [name, o] : w.em.objects()) {
      if (o.parent != EnvironmentalModel::kRoot && !w.em.has_object(o.parent))
        schema_error("objects", fmt::format("unknown parent '{}' of '{}'", o.parent, name));
    }
    for (const auto& [name, o] : w.em.objects()) {
      std::set<std::string> seen{name};
      std::string cur = o.parent;
      while (cur != EnvironmentalModel::kRoot) {
        if (!seen.insert(cur).second) schema_error("objects", "cycle at " + name);
        cur = w.em.object(cur).parent;
      }
    }
  }

  if (doc.contains("contacts")) {
    const json& contacts = doc["contacts"];
    if (!contacts.is_array()) schema_error("contacts", "expected an array");
    for (size_t i = 0; i < contacts.size(); ++i) {
      const json& jc = contacts[i];
      std::string where = fmt::format("contacts[{}]", i);
      std::string kind = jc.value("kind", std::string());
      if (kind == "plane") {
        PlaneFeature p;
        if (!jc.contains("normal")) schema_error(where, "plane requires 'normal'");
        p.normal = read_vec3(jc["normal"], where + ".normal");
        if (p.normal.norm() < 1e-12) schema_error(where + ".normal", "zero normal");
        p.normal.normalize();
        p.offset = read_num(jc.value("offset", json(0.0)), where + ".offset");
        p.k = read_num(jc.value("k", json(1000.0)), where + ".k");
        if (p.k <= 0) schema_error(where + ".k", "stiffness must be positive");
        if (jc.contains("nearObject")) {
          p.nearObject = jc["nearObject"].get<std::string>();
          if (!w.em.has_object(p.nearObject))
            schema_error(where + ".nearObject", "unknown object " + p.nearObject);
          p.nearRadius = read_num(jc.value("nearRadius", json(0.02)), where + ".nearRadius");
        }
        w.contacts.emplace_back(p);
      } else if (kind == "screwjoint") {
        ScrewJointFeature s;
        if (!jc.contains("axisObject") || !jc["axisObject"].is_string())
          schema_error(where + ".axisObject", "expected a string");
        s.axisObject = jc["axisObject"].get<std::string>();
        if (!w.em.has_object(s.axisObject))
          schema_error(where + ".axisObject", "unknown object " + s.axisObject);
        s.pitchPerRev = read_num(jc.value("pitch", json(0.0)), where + ".pitch");
        if (s.pitchPerRev <= 0) schema_error(where + ".pitch", "pitch must be positive");
        s.engageZ = read_num(jc.value("engageZ", json(0.0)), where + ".engageZ");
        s.resistK = read_num(jc.value("resistK", json(0.0)), where + ".resistK");
        if (s.resistK <= 0) schema_error(where + ".resistK", "resistK must be positive");
        s.zMin = read_num(jc.value("zMin", json(0.0)), where + ".zMin");
        s.captureRadius = read_num(jc.value("captureRadius", json(0.01)), where + ".captureRadius");
        w.contacts.emplace_back(s);
      } else {
        schema_error(where + ".kind", "expected 'plane' or 'screwjoint'");
      }
    }
  }

  if (doc.contains("perception")) {
    const json& jp = doc["perception"];
    if (!jp.is_object()) schema_error("perception", "expected an object");
    w.perception.sigmaPos = read_num(jp.value("sigma_pos", json(0.0)), "perception.sigma_pos");
    w.perception.sigmaRot = read_num(jp.value("sigma_rot", json(0.0)), "perception.sigma_rot");
    if (w.perception.sigmaPos < 0 || w.perception.sigmaRot < 0)
      schema_error("perception", "sigma must be non-negative");
    w.perception.latencyTicks =
        static_cast<int>(read_num(jp.value("latency_ticks", json(10.0)), "perception.latency_ticks"));
    if (w.perception.latencyTicks < 1) schema_error("perception.latency_ticks", "must be >= 1");
  }
  if (doc.contains("gripper")) {
    const json& jg = doc["gripper"];
    if (!jg.is_object()) schema_error("gripper", "expected an object");
    w.gripper.maxWidth = read_num(jg.value("max_width", json(0.08)), "gripper.max_width");
    w.gripper.jawSpeed = read_num(jg.value("jaw_speed", json(0.1)), "gripper.jaw_speed");
    if (w.gripper.maxWidth <= 0 || w.gripper.jawSpeed <= 0)
      schema_error("gripper", "max_width and jaw_speed must be positive");
  }
  if (doc.contains("robot")) {
    const json& jr = doc["robot"];
    if (!jr.is_object()) schema_error("robot", "expected an object");
    w.robot.vLin = read_num(jr.value("v_lin", json(0.1)), "robot.v_lin");
    w.robot.vRot = read_num(jr.value("v_rot", json(0.5)), "robot.v_rot");
    if (w.robot.vLin <= 0 || w.robot.vRot <= 0) schema_error("robot", "speeds must be positive");
  }
  return w;
}

}  // namespace lr
