#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "teleop/world/types.hpp"

namespace teleop::world {

enum class GoalSource { Pointer, Minimap };
enum class ArmMode { Mimic, GrabMarker };

struct SetNavGoal {
  double x = 0.0, y = 0.0, yaw = 0.0;
  GoalSource source = GoalSource::Pointer;
  friend bool operator==(const SetNavGoal&, const SetNavGoal&) = default;
};

struct JoystickCommand {
  double vx = 0.0, vy = 0.0, wz = 0.0;  // m/s, m/s, rad/s in the base frame
  friend bool operator==(const JoystickCommand&, const JoystickCommand&) = default;
};

struct EditFootstep {
  std::string plan_id;
  std::size_t index = 0;
  footstep::Goal2D pose;
  friend bool operator==(const EditFootstep&, const EditFootstep&) = default;
};

struct ApprovePlan {
  std::string plan_id;
  friend bool operator==(const ApprovePlan&, const ApprovePlan&) = default;
};

struct RejectPlan {
  std::string plan_id;
  friend bool operator==(const RejectPlan&, const RejectPlan&) = default;
};

/// Palm target in the world frame; without orientation only the position is solved.
struct ArmTarget {
  Side side = Side::Left;
  std::array<double, 3> position{};
  std::optional<std::array<double, 4>> orientation;  // w, x, y, z (normalized on decode)
  ArmMode mode = ArmMode::Mimic;
  friend bool operator==(const ArmTarget&, const ArmTarget&) = default;
};

struct JointSlider {
  std::string joint;
  double position = 0.0;
  friend bool operator==(const JointSlider&, const JointSlider&) = default;
};

struct JointNudge {
  std::string joint;
  double delta = 0.0;
  friend bool operator==(const JointNudge&, const JointNudge&) = default;
};

struct Fingers {
  Side side = Side::Left;
  std::array<double, 4> closure{};  // thumb, index, middle, pinky
  friend bool operator==(const Fingers&, const Fingers&) = default;
};

struct NeckTorso {
  std::map<std::string, double> positions;
  friend bool operator==(const NeckTorso&, const NeckTorso&) = default;
};

struct AbortWalk {
  friend bool operator==(const AbortWalk&, const AbortWalk&) = default;
};

using Command = std::variant<SetNavGoal, JoystickCommand, EditFootstep, ApprovePlan, RejectPlan, ArmTarget,
                             JointSlider, JointNudge, Fingers, NeckTorso, AbortWalk>;

/// "SetNavGoal", "Joystick", ...
std::string_view command_type(const Command& c);

/// {"type": ..., fields...}. Decoding ignores unknown fields and throws
/// ParseError on a missing/ill-typed field or a non-finite number.
nlohmann::json to_json(const Command& c);
Command command_from_json(const nlohmann::json& j);

}  // namespace teleop::world
