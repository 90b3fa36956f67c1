#pragma once

#include <string_view>

#include "teleop/kinematics/kinematics.hpp"

namespace teleop::kinematics {

struct IkParams {
  double damping = 0.05;
  int max_iterations = 200;
  double position_tolerance = 1e-3;     // meters
  double orientation_tolerance = 1e-2;  // radians
  double step_scale = 1.0;              // in (0, 1]
  ChainJoints movable = ChainJoints::All;
  bool position_only = false;  // ignore target orientation
};

enum class IkStatus {
  Success,
  NoConvergence,  // iteration cap hit; solution holds the best iterate
  Unreachable,    // target beyond the chain's maximum extension; no iterations run
};

struct IkResult {
  IkStatus status = IkStatus::NoConvergence;
  JointState solution;
  int iterations = 0;
  double position_residual = 0.0;
  double orientation_residual = 0.0;

  bool ok() const { return status == IkStatus::Success; }
};

/// Damped-least-squares IK for a kinematic chain. The seed must lie within
/// the joint limits; every iterate is clamped back into them.
IkResult solve_ik(const RobotModel& model, std::string_view chain, const Pose& target,
                  const JointState& seed, const IkParams& params = {});

/// Throws KinematicsError when a parameter is out of range.
void validate(const IkParams& params);

const char* to_string(IkStatus status);

}  // namespace teleop::kinematics
