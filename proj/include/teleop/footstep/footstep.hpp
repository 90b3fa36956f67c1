#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace teleop::footstep {

enum class Side { Left, Right };

inline Side opposite(Side s) { return s == Side::Left ? Side::Right : Side::Left; }

enum class Violation {
  NoStepCell,
  HeightSpread,
  OutOfBounds,
  OutOfReachForward,
  OutOfReachBackward,
  OutOfReachLateral,
  LateralTooNarrow,
  CrossedFeet,
  YawOutOfRange,
  Alternation,
  FeetOverlap,
};

/// Wire/file spelling, e.g. "NO_STEP_CELL".
std::string_view to_string(Violation v);
std::optional<Violation> violation_from_string(std::string_view s);
std::string_view to_string(Side s);
std::optional<Side> side_from_string(std::string_view s);

struct Footstep {
  Side side = Side::Left;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // (-pi, pi]
  double z = 0.0;    // snapped terrain height
  bool valid = true;
  std::vector<Violation> violations;

  Eigen::Vector2d position() const { return {x, y}; }

  friend bool operator==(const Footstep&, const Footstep&) = default;
};

Footstep make_footstep(Side side, double x, double y, double yaw);

struct StancePose {
  Footstep left;
  Footstep right;

  const Footstep& foot(Side s) const { return s == Side::Left ? left : right; }
  Footstep& foot(Side s) { return s == Side::Left ? left : right; }
  Eigen::Vector2d midpoint() const { return 0.5 * (left.position() + right.position()); }
  double heading() const;
  double elevation() const { return 0.5 * (left.z + right.z); }

  friend bool operator==(const StancePose&, const StancePose&) = default;
};

/// Planar navigation goal for the stance midpoint.
struct Goal2D {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  friend bool operator==(const Goal2D&, const Goal2D&) = default;
};

/// Step feasibility bounds. All stepping code reads these from one place.
struct StepConstraints {
  double max_forward = 0.40;
  double max_backward = 0.15;
  double min_lateral_separation = 0.15;
  double max_lateral = 0.35;
  double max_yaw_per_step = 0.30;
  double foot_length = 0.27;
  double foot_width = 0.16;
  double max_height_delta = 0.05;
  double goal_position_tolerance = 0.10;
  double goal_yaw_tolerance = 0.10;
  double nominal_separation = 0.25;  // foot-center distance of a square stance
};

/// Throws FootstepError if a bound is non-positive or min >= max lateral.
void validate(const StepConstraints& c);

/// Square stance about `goal`: feet at +-nominal_separation/2, facing goal.yaw.
StancePose stance_at(const Goal2D& goal, const StepConstraints& c);

nlohmann::json to_json(const Footstep& f);
Footstep footstep_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StancePose& s);
StancePose stance_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Goal2D& g);
Goal2D goal_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StepConstraints& c);
StepConstraints constraints_from_json(const nlohmann::json& j);

}  // namespace teleop::footstep
