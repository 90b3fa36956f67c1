#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Geometry>
#include <nlohmann/json.hpp>

#include "teleop/common/error.hpp"
#include "teleop/footstep/plan.hpp"
#include "teleop/kinematics/pose.hpp"
#include "teleop/kinematics/robot_model.hpp"

namespace teleop::world {

using footstep::Side;

class WorldError : public Error {
 public:
  using Error::Error;
};

enum class Mode { Idle, Planning, AwaitingApproval, Walking, Manipulating };

std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);
/// Declared mode graph; Planning is transient inside SetNavGoal.
bool can_transition(Mode from, Mode to);

enum class ObjectKind { SmallObstacle, Table, GraspableBox, Valve };

std::string_view to_string(ObjectKind k);
std::optional<ObjectKind> object_kind_from_string(std::string_view s);

enum class TaskStatus { Incomplete, Complete, Violated };

std::string_view to_string(TaskStatus s);
std::optional<TaskStatus> task_status_from_string(std::string_view s);

enum class Task { WalkToPose, AvoidObstacles, PickUpBox, TurnValve };
inline constexpr std::array kTasks{Task::WalkToPose, Task::AvoidObstacles, Task::PickUpBox, Task::TurnValve};

std::string_view to_string(Task t);  // "walk_to_pose", ...
std::optional<Task> task_from_string(std::string_view s);

inline std::size_t arm_index(Side s) { return s == Side::Left ? 0 : 1; }
std::string_view arm_chain(Side s);
std::string_view finger_chain(Side s);
std::string_view side_name(Side s);  // "left" / "right"
std::optional<Side> side_from_name(std::string_view s);

struct WorldObject {
  std::string id;
  ObjectKind kind = ObjectKind::SmallObstacle;
  // Obstacle/Table: footprint center on the ground, size = extents (z = height).
  // Box: center of the box. Valve: hub center; grasp point is the hub.
  kinematics::Pose pose;
  Eigen::Vector3d size = Eigen::Vector3d::Zero();
  double angle = 0.0;     // valve, normalized
  double rotation = 0.0;  // valve, accumulated signed turn since load
  double handle_radius = 0.0;
  std::optional<Side> grasped_by;
};

struct PendingPosture {
  std::string id;
  Side side = Side::Left;
  kinematics::JointState joints;  // arm setpoints applied on approval
  friend bool operator==(const PendingPosture&, const PendingPosture&) = default;
};

struct Joystick {
  double vx = 0.0;  // m/s, base frame
  double vy = 0.0;
  double wz = 0.0;  // rad/s
  std::uint64_t refreshed_tick = 0;
  bool zero() const { return vx == 0.0 && vy == 0.0 && wz == 0.0; }
};

/// Object held by a palm: pose relative to the palm captured at attach time.
struct Hold {
  std::string object_id;
  Eigen::Isometry3d palm_to_object = Eigen::Isometry3d::Identity();
  double wrist_roll = 0.0;  // J7 at the previous tick (valve coupling)
};

struct RobotState {
  kinematics::Pose base;  // stance midpoint on the ground, facing the stance heading
  footstep::StancePose stance;
  kinematics::JointState joints;
  kinematics::JointState setpoints;
  Mode mode = Mode::Idle;
  std::optional<footstep::FootstepPlan> active_plan;  // pending or executing
  std::optional<PendingPosture> pending_posture;
  std::array<std::optional<kinematics::Pose>, 2> arm_targets;  // world frame, last accepted
  std::size_t step_index = 0;   // step being executed
  double step_progress = 0.0;   // fraction of the current step
  std::uint64_t step_tick = 0;  // ticks spent on the current step
  bool joystick_walk = false;   // the executing plan is synthesized from the joystick
  Joystick joystick;
  std::array<std::optional<Hold>, 2> holds;
};

struct TaskParams {
  std::optional<footstep::Goal2D> walk_goal;  // no goal: the walking tasks stay Incomplete
  double position_tolerance = 0.15;
  double yaw_tolerance = 0.15;
  std::vector<footstep::Cell> protected_cells;
  double lift_height = 0.10;
  double valve_target = 1.5707963267948966;
  std::string box_id;
  std::string table_id;
  std::string valve_id;
};

struct SimParams {
  double dt = 0.02;
  double step_duration = 1.2;
  double deadman = 0.2;
  double grasp_distance = 0.05;
  double grasp_close = 0.8;
  double grasp_release = 0.4;
  double battery_idle_rate = 0.01;    // percent per second
  double battery_motion_rate = 0.05;  // extra percent per second while anything moves
  double battery_low = 20.0;
  std::size_t planner_budget = 50'000;  // node expansions per SetNavGoal; bounds the stall on unreachable goals

  std::uint64_t ticks_per_step() const;
};

/// Throws WorldError on non-positive durations/thresholds or release >= close.
void validate(const SimParams& p);

struct WorldState {
  std::shared_ptr<const footstep::HeightMap> map;
  std::vector<WorldObject> objects;
  RobotState robot;
  double battery = 100.0;
  std::uint64_t tick_count = 0;
  std::array<TaskStatus, 4> tasks{TaskStatus::Incomplete, TaskStatus::Incomplete, TaskStatus::Incomplete,
                                  TaskStatus::Incomplete};
  bool battery_low_reported = false;
  std::uint64_t next_id = 1;  // plan / posture ids

  TaskStatus task(Task t) const { return tasks[static_cast<std::size_t>(t)]; }
  const WorldObject* find_object(std::string_view id) const;
  WorldObject* find_object(std::string_view id);
};

/// Everything needed to run a simulation.
struct World {
  std::string name;
  nlohmann::json document;  // self-contained: model embedded, random obstacles expanded
  std::shared_ptr<const kinematics::RobotModel> model;
  footstep::StepConstraints constraints;
  SimParams params;
  TaskParams tasks;
  WorldState initial;
};

}  // namespace teleop::world
