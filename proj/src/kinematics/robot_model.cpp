#include "teleop/kinematics/robot_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "teleop/common/json_fields.hpp"
#include "teleop/kinematics/pose.hpp"

namespace teleop::kinematics {

namespace jf = teleop::json_fields;
using nlohmann::json;

double JointState::at(std::string_view name) const {
  auto it = positions.find(name);
  if (it == positions.end()) throw MissingJoint("joint state has no entry for '" + std::string(name) + "'");
  return it->second;
}

std::optional<std::size_t> RobotModel::find_joint(std::string_view name) const {
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    if (joints_[i].name == name) return i;
  }
  return std::nullopt;
}

const JointSpec& RobotModel::joint(std::string_view name) const {
  auto idx = find_joint(name);
  if (!idx) throw UnknownJoint("unknown joint '" + std::string(name) + "'");
  return joints_[*idx];
}

const Chain& RobotModel::chain(std::string_view name) const {
  auto it = chains_.find(name);
  if (it == chains_.end()) throw UnknownChain("unknown chain '" + std::string(name) + "'");
  return it->second;
}

std::vector<std::string> RobotModel::chain_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : chains_) out.push_back(name);
  return out;
}

std::vector<std::string> RobotModel::arm_joint_names(std::string_view arm) const {
  const Chain& c = chain(arm);
  std::vector<std::string> out;
  for (std::size_t k = c.shared_torso; k < c.joints.size(); ++k) out.push_back(joints_[c.joints[k]].name);
  return out;
}

JointState RobotModel::mid_range() const {
  JointState q;
  for (const auto& j : joints_) q.set(j.name, 0.5 * (j.limits.min + j.limits.max));
  return q;
}

JointState RobotModel::neutral() const {
  JointState q;
  for (const auto& j : joints_) q.set(j.name, std::clamp(0.0, j.limits.min, j.limits.max));
  return q;
}

namespace {

Eigen::Isometry3d parse_origin(const json& j, std::string_view where) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": origin must be an object");
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  Eigen::Vector3d rpy = Eigen::Vector3d::Zero();
  if (j.contains("xyz")) {
    auto a = jf::require_array<3>(j, "xyz", where);
    xyz = {a[0], a[1], a[2]};
  }
  if (j.contains("rpy")) {
    auto a = jf::require_array<3>(j, "rpy", where);
    rpy = {a[0], a[1], a[2]};
  }
  return make_transform(xyz, rpy);
}

JointSpec parse_joint(const json& j) {
  JointSpec spec;
  spec.name = jf::require_string(j, "name", "joint");
  const std::string where = "joint '" + spec.name + "'";
  const std::string type = jf::require_string(j, "type", where);
  if (type == "revolute") {
    spec.kind = JointKind::Revolute;
    spec.parent = jf::require_string(j, "parent", where);
    spec.child = jf::require_string(j, "child", where);
    spec.origin = parse_origin(jf::require(j, "origin", where), where);
    auto axis = jf::require_array<3>(j, "axis", where);
    spec.axis = {axis[0], axis[1], axis[2]};
  } else if (type == "closure") {
    spec.kind = JointKind::Closure;
    spec.hand = jf::require_string(j, "hand", where);
  } else {
    throw ParseError(where + ": unknown joint type '" + type + "'");
  }
  auto limits = jf::require_array<2>(j, "limits", where);
  spec.limits = {limits[0], limits[1]};
  spec.max_velocity = jf::require_number(j, "max_velocity", where);
  return spec;
}

void check_joint(const JointSpec& j) {
  const std::string where = "joint '" + j.name + "'";
  if (!(j.limits.min < j.limits.max)) throw ModelError(where + ": limits must satisfy min < max");
  if (!(j.max_velocity > 0.0)) throw ModelError(where + ": max_velocity must be positive");
  if (j.kind == JointKind::Revolute && std::abs(j.axis.norm() - 1.0) > 1e-9) {
    throw ModelError(where + ": axis must be a unit vector");
  }
  if (j.kind == JointKind::Closure) {
    if (j.limits.min < 0.0 || j.limits.max > 1.0) throw ModelError(where + ": closure limits must lie in [0, 1]");
    if (j.hand != "left" && j.hand != "right") throw ModelError(where + ": hand must be 'left' or 'right'");
  }
}

}  // namespace

RobotModel load_robot_model(std::string_view document) {
  const json doc = jf::parse_document(document, "robot model");
  RobotModel model;
  model.name_ = jf::require_string(doc, "name", "robot model");
  model.base_frame_ = jf::require_string(doc, "base_frame", "robot model");
  model.base_height_ = jf::require_number(doc, "base_height", "robot model");

  const json& joints = jf::require(doc, "joints", "robot model");
  if (!joints.is_array()) throw ParseError("robot model: 'joints' must be an array");
  std::set<std::string> names;
  std::map<std::string, std::size_t> child_of;  // link -> joint that produces it
  for (const auto& j : joints) {
    JointSpec spec = parse_joint(j);
    check_joint(spec);
    if (!names.insert(spec.name).second) throw ModelError("duplicate joint name '" + spec.name + "'");
    if (spec.kind == JointKind::Revolute) {
      if (spec.child == model.base_frame_) throw ModelError("joint '" + spec.name + "' moves the base frame");
      if (!child_of.emplace(spec.child, model.joints_.size()).second) {
        throw ModelError("link '" + spec.child + "' is the child of two joints");
      }
    }
    model.joints_.push_back(std::move(spec));
  }

  const json& chains = jf::require(doc, "chains", "robot model");
  if (!chains.is_object()) throw ParseError("robot model: 'chains' must be an object");
  for (const auto& [cname, cj] : chains.items()) {
    const std::string where = "chain '" + cname + "'";
    Chain chain;
    chain.name = cname;
    const json& list = jf::require(cj, "joints", where);
    if (!list.is_array()) throw ParseError(where + ": 'joints' must be an array");
    for (const auto& jn : list) {
      if (!jn.is_string()) throw ParseError(where + ": joint names must be strings");
      auto idx = model.find_joint(jn.get<std::string>());
      if (!idx) throw ModelError(where + ": unknown joint '" + jn.get<std::string>() + "'");
      chain.joints.push_back(*idx);
    }
    if (chain.joints.empty()) throw ModelError(where + " has no joints");
    if (cj.contains("tip")) chain.tip = parse_origin(cj.at("tip"), where);
    chain.kinematic = model.joints_[chain.joints.front()].kind == JointKind::Revolute;
    for (std::size_t idx : chain.joints) {
      if ((model.joints_[idx].kind == JointKind::Revolute) != chain.kinematic) {
        throw ModelError(where + " mixes revolute and closure joints");
      }
    }
    if (chain.kinematic) {
      for (std::size_t k = 1; k < chain.joints.size(); ++k) {
        const auto& prev = model.joints_[chain.joints[k - 1]];
        const auto& cur = model.joints_[chain.joints[k]];
        if (cur.parent != prev.child) {
          throw ModelError(where + ": joint '" + cur.name + "' does not attach to '" + prev.child + "'");
        }
      }
      // Walk ancestors back to the base frame.
      std::vector<std::size_t> ancestors;
      std::string link = model.joints_[chain.joints.front()].parent;
      while (link != model.base_frame_) {
        auto it = child_of.find(link);
        if (it == child_of.end() || ancestors.size() > model.joints_.size()) {
          throw ModelError(where + ": no connected path from '" + link + "' to the base frame");
        }
        ancestors.push_back(it->second);
        link = model.joints_[it->second].parent;
      }
      std::reverse(ancestors.begin(), ancestors.end());
      chain.path = ancestors;
      chain.path.insert(chain.path.end(), chain.joints.begin(), chain.joints.end());
    }
    model.chains_.emplace(cname, std::move(chain));
  }

  auto need = [&](std::string_view name, std::size_t count) -> Chain& {
    auto it = model.chains_.find(name);
    if (it == model.chains_.end()) throw ModelError("robot model is missing chain '" + std::string(name) + "'");
    if (it->second.joints.size() != count) {
      throw ModelError("chain '" + std::string(name) + "' must have " + std::to_string(count) + " joints, found " +
                       std::to_string(it->second.joints.size()));
    }
    return it->second;
  };
  const Chain& torso = need(kTorso, kTorsoJoints);
  if (!torso.kinematic) throw ModelError("chain 'torso' must be revolute");
  if (torso.path.size() != kTorsoJoints) throw ModelError("chain 'torso' must start at the base frame");
  Chain& neck = need(kNeck, kNeckJoints);
  if (!neck.kinematic) throw ModelError("chain 'neck' must be revolute");
  for (std::string_view arm : {kLeftArm, kRightArm}) {
    Chain& c = need(arm, kTorsoJoints + kArmJoints);
    if (!c.kinematic) throw ModelError("chain '" + std::string(arm) + "' must be revolute");
    if (!std::equal(torso.joints.begin(), torso.joints.end(), c.joints.begin())) {
      throw ModelError("chain '" + std::string(arm) + "' must begin with the torso joints");
    }
    c.shared_torso = kTorsoJoints;
  }
  for (auto [fingers, hand] : {std::pair{kLeftFingers, "left"}, std::pair{kRightFingers, "right"}}) {
    const Chain& c = need(fingers, kFingerJoints);
    for (std::size_t idx : c.joints) {
      if (model.joints_[idx].kind != JointKind::Closure || model.joints_[idx].hand != hand) {
        throw ModelError("chain '" + std::string(fingers) + "' must hold closure joints of the " + hand + " hand");
      }
    }
  }
  return model;
}

RobotModel load_robot_model_file(const std::string& path) {
  return load_robot_model(json_fields::read_file(path));
}

}  // namespace teleop::kinematics
