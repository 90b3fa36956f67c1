#include "teleop/kinematics/pose.hpp"

#include <cmath>

namespace teleop::kinematics {

Pose Pose::from_isometry(const Eigen::Isometry3d& t) {
  Pose p;
  p.position = t.translation();
  p.orientation = Eigen::Quaterniond(t.rotation()).normalized();
  return p;
}

Eigen::Isometry3d Pose::to_isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = orientation.normalized().toRotationMatrix();
  t.translation() = position;
  return t;
}

Eigen::Isometry3d make_transform(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = (Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  t.translation() = xyz;
  return t;
}

Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target,
                                  const Eigen::Quaterniond& current) {
  Eigen::Quaterniond delta = (target.normalized() * current.normalized().conjugate()).normalized();
  // Shortest arc.
  if (delta.w() < 0.0) delta.coeffs() = -delta.coeffs();
  Eigen::AngleAxisd aa(delta);
  if (aa.angle() < 1e-15) return Eigen::Vector3d::Zero();
  return aa.axis() * aa.angle();
}

double orientation_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  Eigen::Quaterniond delta = a.normalized() * b.normalized().conjugate();
  return 2.0 * std::atan2(delta.vec().norm(), std::abs(delta.w()));
}

}  // namespace teleop::kinematics
