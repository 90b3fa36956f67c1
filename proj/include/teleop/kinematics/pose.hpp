#pragma once

#include <Eigen/Geometry>

namespace teleop::kinematics {

/// Position (meters) plus unit-quaternion orientation.
struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  static Pose from_isometry(const Eigen::Isometry3d& t);
  Eigen::Isometry3d to_isometry() const;
};

/// Builds a transform from a translation and fixed-axis roll/pitch/yaw (R = Rz*Ry*Rx).
Eigen::Isometry3d make_transform(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);

/// Rotation taking `current` onto `target`, as axis*angle in the common frame.
Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target,
                                  const Eigen::Quaterniond& current);

/// Angle in [0, pi] between two orientations.
double orientation_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

}  // namespace teleop::kinematics
