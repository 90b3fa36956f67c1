#pragma once

#include <optional>
#include <string>
#include <vector>

#include "teleop/world/command.hpp"
#include "teleop/world/event.hpp"
#include "teleop/world/telemetry.hpp"
#include "teleop/world/types.hpp"

namespace teleop::world {

struct ApplyResult {
  bool accepted = true;
  std::optional<RejectReason> reason;
  std::string message;
  std::vector<Event> events;  // includes CommandRejected on failure
};

/// Deterministic fixed-step world. All mutation goes through apply() and tick();
/// a rejected command leaves the state untouched.
class Simulator {
 public:
  explicit Simulator(World world);

  const World& world() const { return world_; }
  const WorldState& state() const { return state_; }
  std::uint64_t tick_count() const { return state_.tick_count; }
  double time() const { return static_cast<double>(state_.tick_count) * world_.params.dt; }

  ApplyResult apply(const Command& command);
  std::vector<Event> tick();
  Telemetry snapshot() const { return world::snapshot(state_, world_.params.dt); }

  /// Pelvis frame in the world.
  Eigen::Isometry3d pelvis() const;
  /// Palm pose in the world from the current joint positions.
  kinematics::Pose palm(Side s) const;
  /// Setpoint IK for a world-frame palm target (no state change).
  std::optional<kinematics::JointState> solve_arm(Side s, const kinematics::Pose& target, bool position_only) const;

 private:
  struct Rejection {
    RejectReason reason;
    std::string message;
  };

  void emit(EventKind kind, nlohmann::json payload);
  void set_mode(Mode to);
  void plan_status(footstep::PlanStatus to, nlohmann::json extra = nlohmann::json::object());
  std::string next_id();

  std::optional<Rejection> handle(const SetNavGoal& c);
  std::optional<Rejection> handle(const JoystickCommand& c);
  std::optional<Rejection> handle(const EditFootstep& c);
  std::optional<Rejection> handle(const ApprovePlan& c);
  std::optional<Rejection> handle(const RejectPlan& c);
  std::optional<Rejection> handle(const ArmTarget& c);
  std::optional<Rejection> handle(const JointSlider& c);
  std::optional<Rejection> handle(const JointNudge& c);
  std::optional<Rejection> handle(const Fingers& c);
  std::optional<Rejection> handle(const NeckTorso& c);
  std::optional<Rejection> handle(const AbortWalk& c);

  void drop_pending();
  void start_step();
  void finish_walk(footstep::PlanStatus status, std::string_view why);
  void advance_walk();
  std::optional<footstep::Footstep> joystick_step() const;
  void update_base();
  bool move_joints();
  void couple_valves();
  void carry_boxes();
  void update_grasps();
  void update_tasks();
  void settle(WorldObject& box) const;
  void check_protected(const footstep::Footstep& step);
  double clamp_joint(std::string_view name, double value) const;

  World world_;
  WorldState state_;
  std::vector<Event>* sink_ = nullptr;
  std::uint64_t event_seq_ = 0;
};

}  // namespace teleop::world
