#include "teleop/kinematics/kinematics.hpp"

#include <algorithm>

namespace teleop::kinematics {

namespace {

const Chain& kinematic_chain(const RobotModel& model, std::string_view name) {
  const Chain& c = model.chain(name);
  if (!c.kinematic) throw UnknownChain("chain '" + std::string(name) + "' has no kinematic tip");
  return c;
}

std::size_t first_movable(const Chain& c, ChainJoints movable) {
  return movable == ChainJoints::FreezeTorso ? c.shared_torso : 0;
}

Eigen::Isometry3d joint_motion(const JointSpec& j, double angle) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = Eigen::AngleAxisd(angle, j.axis).toRotationMatrix();
  return t;
}

}  // namespace

Pose forward_kinematics(const RobotModel& model, const JointState& q, std::string_view chain) {
  const Chain& c = kinematic_chain(model, chain);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t idx : c.path) {
    const JointSpec& j = model.joints()[idx];
    t = t * j.origin * joint_motion(j, q.at(j.name));
  }
  return Pose::from_isometry(t * c.tip);
}

std::vector<std::string> movable_joints(const RobotModel& model, std::string_view chain, ChainJoints movable) {
  const Chain& c = kinematic_chain(model, chain);
  std::vector<std::string> out;
  for (std::size_t k = first_movable(c, movable); k < c.joints.size(); ++k) {
    out.push_back(model.joints()[c.joints[k]].name);
  }
  return out;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const RobotModel& model, const JointState& q,
                                                  std::string_view chain, ChainJoints movable) {
  const Chain& c = kinematic_chain(model, chain);
  const std::size_t ancestors = c.path.size() - c.joints.size();
  const std::size_t first = ancestors + first_movable(c, movable);

  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> axes;
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t k = 0; k < c.path.size(); ++k) {
    const JointSpec& j = model.joints()[c.path[k]];
    t = t * j.origin;
    if (k >= first) {
      positions.push_back(t.translation());
      axes.push_back(t.linear() * j.axis);
    }
    t = t * joint_motion(j, q.at(j.name));
  }
  const Eigen::Vector3d tip = (t * c.tip).translation();

  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, static_cast<Eigen::Index>(axes.size()));
  for (std::size_t i = 0; i < axes.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    jac.block<3, 1>(0, col) = axes[i].cross(tip - positions[i]);
    jac.block<3, 1>(3, col) = axes[i];
  }
  return jac;
}

JointState clamp_to_limits(const RobotModel& model, const JointState& q) {
  JointState out = q;
  for (const auto& j : model.joints()) {
    out.set(j.name, std::clamp(q.at(j.name), j.limits.min, j.limits.max));
  }
  return out;
}

double chain_extension(const RobotModel& model, std::string_view chain, ChainJoints movable) {
  const Chain& c = kinematic_chain(model, chain);
  const std::size_t ancestors = c.path.size() - c.joints.size();
  const std::size_t first = ancestors + first_movable(c, movable);
  double reach = c.tip.translation().norm();
  for (std::size_t k = first + 1; k < c.path.size(); ++k) {
    reach += model.joints()[c.path[k]].origin.translation().norm();
  }
  return reach;
}

}  // namespace teleop::kinematics
