#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>

#include "teleop/common/error.hpp"

namespace teleop::kinematics {

class KinematicsError : public Error {
 public:
  using Error::Error;
};

/// Model document is structurally valid but violates a model invariant.
class ModelError : public KinematicsError {
 public:
  using KinematicsError::KinematicsError;
};

class UnknownChain : public KinematicsError {
 public:
  using KinematicsError::KinematicsError;
};

class MissingJoint : public KinematicsError {
 public:
  using KinematicsError::KinematicsError;
};

class UnknownJoint : public KinematicsError {
 public:
  using KinematicsError::KinematicsError;
};

enum class JointKind {
  Revolute,  // rotates about `axis`
  Closure,   // finger closure, normalized 0 (open) .. 1 (closed)
};

struct JointLimits {
  double min = 0.0;
  double max = 0.0;
};

struct JointSpec {
  std::string name;
  JointKind kind = JointKind::Revolute;
  std::string parent;  // link the joint hangs off
  std::string child;   // link the joint moves
  Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  JointLimits limits;
  double max_velocity = 1.0;  // rad/s, or closure fraction per second
  std::string hand;           // "left"/"right" for closure joints
};

/// Joint positions keyed by joint name.
struct JointState {
  std::map<std::string, double, std::less<>> positions;

  double at(std::string_view name) const;
  void set(std::string_view name, double value) { positions[std::string(name)] = value; }
  bool contains(std::string_view name) const { return positions.find(name) != positions.end(); }

  friend bool operator==(const JointState&, const JointState&) = default;
};

/// A named chain. `path` holds every joint from the base to the tip (including
/// ancestors such as the torso below the neck); `joints` are the chain's own
/// members, which are the ones IK and the Jacobian move.
struct Chain {
  std::string name;
  std::vector<std::size_t> joints;
  std::vector<std::size_t> path;
  std::size_t shared_torso = 0;  // leading entries of `joints` owned by the torso chain
  Eigen::Isometry3d tip = Eigen::Isometry3d::Identity();
  bool kinematic = true;  // false for finger closure groups
};

inline constexpr std::string_view kTorso = "torso";
inline constexpr std::string_view kNeck = "neck";
inline constexpr std::string_view kLeftArm = "left_arm";
inline constexpr std::string_view kRightArm = "right_arm";
inline constexpr std::string_view kLeftFingers = "left_fingers";
inline constexpr std::string_view kRightFingers = "right_fingers";

inline constexpr std::size_t kArmJoints = 7;
inline constexpr std::size_t kTorsoJoints = 3;
inline constexpr std::size_t kNeckJoints = 3;
inline constexpr std::size_t kFingerJoints = 4;

class RobotModel {
 public:
  RobotModel() = default;

  const std::string& name() const { return name_; }
  const std::string& base_frame() const { return base_frame_; }
  /// Height of the base (pelvis) frame above the stance midpoint on the ground.
  double base_height() const { return base_height_; }

  const std::vector<JointSpec>& joints() const { return joints_; }
  std::optional<std::size_t> find_joint(std::string_view name) const;
  const JointSpec& joint(std::string_view name) const;  // throws UnknownJoint

  const Chain& chain(std::string_view name) const;  // throws UnknownChain
  std::vector<std::string> chain_names() const;

  /// Names of the arm-local joints J1..J7 of an arm chain.
  std::vector<std::string> arm_joint_names(std::string_view arm) const;

  /// Every joint at the midpoint of its limits.
  JointState mid_range() const;
  /// Every joint at 0 clamped into its limits.
  JointState neutral() const;

 private:
  friend RobotModel load_robot_model(std::string_view document);

  std::string name_;
  std::string base_frame_;
  double base_height_ = 0.0;
  std::vector<JointSpec> joints_;
  std::map<std::string, Chain, std::less<>> chains_;
};

/// Parses and validates a model document. Throws ParseError or ModelError.
RobotModel load_robot_model(std::string_view document);
RobotModel load_robot_model_file(const std::string& path);

}  // namespace teleop::kinematics
