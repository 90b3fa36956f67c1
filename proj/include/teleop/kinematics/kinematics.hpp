#pragma once

#include <string_view>

#include <Eigen/Core>

#include "teleop/kinematics/pose.hpp"
#include "teleop/kinematics/robot_model.hpp"

namespace teleop::kinematics {

/// Which of a chain's own joints are free to move.
enum class ChainJoints {
  All,          // every member joint (torso + arm for arm chains)
  FreezeTorso,  // arm-local joints only; torso held at its current position
};

/// Tip pose of `chain` in the base frame. Every joint on the path from the
/// base must be present in `q`.
Pose forward_kinematics(const RobotModel& model, const JointState& q, std::string_view chain);

/// Geometric Jacobian of the chain tip, rows [linear; angular], one column per
/// movable joint in chain order.
Eigen::Matrix<double, 6, Eigen::Dynamic> jacobian(const RobotModel& model, const JointState& q,
                                                  std::string_view chain,
                                                  ChainJoints movable = ChainJoints::All);

/// Names of the joints `jacobian` and `solve_ik` move, in column order.
std::vector<std::string> movable_joints(const RobotModel& model, std::string_view chain,
                                        ChainJoints movable = ChainJoints::All);

/// Clamps every model joint into its limits. Entries for unknown names pass through.
JointState clamp_to_limits(const RobotModel& model, const JointState& q);

/// Upper bound on the distance from the first movable joint to the chain tip.
double chain_extension(const RobotModel& model, std::string_view chain,
                       ChainJoints movable = ChainJoints::All);

}  // namespace teleop::kinematics
