#include "teleop/world/types.hpp"

#include <cmath>
#include <utility>

#include "teleop/kinematics/robot_model.hpp"

namespace teleop::world {

namespace {

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [k, n] : table)
    if (k == v) return n;
  return "?";
}

template <typename E, std::size_t N>
std::optional<E> parse_name(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s) {
  for (const auto& [k, n] : table)
    if (n == s) return k;
  return std::nullopt;
}

constexpr std::array<std::pair<Mode, std::string_view>, 5> kModes{{
    {Mode::Idle, "Idle"},
    {Mode::Planning, "Planning"},
    {Mode::AwaitingApproval, "AwaitingApproval"},
    {Mode::Walking, "Walking"},
    {Mode::Manipulating, "Manipulating"},
}};

constexpr std::array<std::pair<ObjectKind, std::string_view>, 4> kKinds{{
    {ObjectKind::SmallObstacle, "SmallObstacle"},
    {ObjectKind::Table, "Table"},
    {ObjectKind::GraspableBox, "GraspableBox"},
    {ObjectKind::Valve, "Valve"},
}};

constexpr std::array<std::pair<TaskStatus, std::string_view>, 3> kStatus{{
    {TaskStatus::Incomplete, "Incomplete"},
    {TaskStatus::Complete, "Complete"},
    {TaskStatus::Violated, "Violated"},
}};

constexpr std::array<std::pair<Task, std::string_view>, 4> kTaskNames{{
    {Task::WalkToPose, "walk_to_pose"},
    {Task::AvoidObstacles, "avoid_obstacles"},
    {Task::PickUpBox, "pick_up_box"},
    {Task::TurnValve, "turn_valve"},
}};

}  // namespace

std::string_view to_string(Mode m) { return name_of(kModes, m); }
std::optional<Mode> mode_from_string(std::string_view s) { return parse_name(kModes, s); }

bool can_transition(Mode from, Mode to) {
  switch (from) {
    case Mode::Idle:
      return to == Mode::Planning || to == Mode::Walking || to == Mode::Manipulating || to == Mode::AwaitingApproval;
    case Mode::Planning: return to == Mode::AwaitingApproval || to == Mode::Idle || to == Mode::Manipulating;
    case Mode::AwaitingApproval:
      return to == Mode::Walking || to == Mode::Manipulating || to == Mode::Idle || to == Mode::Planning;
    case Mode::Walking: return to == Mode::Idle;
    case Mode::Manipulating:
      return to == Mode::Idle || to == Mode::Planning || to == Mode::AwaitingApproval || to == Mode::Walking;
  }
  return false;
}

std::string_view to_string(ObjectKind k) { return name_of(kKinds, k); }
std::optional<ObjectKind> object_kind_from_string(std::string_view s) { return parse_name(kKinds, s); }
std::string_view to_string(TaskStatus s) { return name_of(kStatus, s); }
std::optional<TaskStatus> task_status_from_string(std::string_view s) { return parse_name(kStatus, s); }
std::string_view to_string(Task t) { return name_of(kTaskNames, t); }
std::optional<Task> task_from_string(std::string_view s) { return parse_name(kTaskNames, s); }

std::string_view arm_chain(Side s) { return s == Side::Left ? kinematics::kLeftArm : kinematics::kRightArm; }
std::string_view finger_chain(Side s) {
  return s == Side::Left ? kinematics::kLeftFingers : kinematics::kRightFingers;
}
std::string_view side_name(Side s) { return s == Side::Left ? "left" : "right"; }
std::optional<Side> side_from_name(std::string_view s) {
  if (s == "left" || s == "Left") return Side::Left;
  if (s == "right" || s == "Right") return Side::Right;
  return std::nullopt;
}

std::uint64_t SimParams::ticks_per_step() const {
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(step_duration / dt)));
}

void validate(const SimParams& p) {
  for (double v : {p.dt, p.step_duration, p.deadman, p.grasp_distance, p.grasp_close, p.grasp_release}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw WorldError("simulation parameters must be positive");
  }
  if (!(p.grasp_release < p.grasp_close) || p.grasp_close > 1.0) {
    throw WorldError("grasp release threshold must be below the close threshold (<= 1)");
  }
  if (p.battery_idle_rate < 0.0 || p.battery_motion_rate < 0.0) throw WorldError("battery rates must be >= 0");
}

const WorldObject* WorldState::find_object(std::string_view id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

WorldObject* WorldState::find_object(std::string_view id) {
  for (auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

}  // namespace teleop::world
