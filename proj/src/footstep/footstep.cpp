#include "teleop/footstep/footstep.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "teleop/common/angles.hpp"
#include "teleop/common/json_fields.hpp"
#include "teleop/footstep/height_map.hpp"

namespace teleop::footstep {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<Violation, std::string_view>, 11> kViolationNames{{
    {Violation::NoStepCell, "NO_STEP_CELL"},
    {Violation::HeightSpread, "HEIGHT_SPREAD"},
    {Violation::OutOfBounds, "OUT_OF_BOUNDS"},
    {Violation::OutOfReachForward, "OUT_OF_REACH_FORWARD"},
    {Violation::OutOfReachBackward, "OUT_OF_REACH_BACKWARD"},
    {Violation::OutOfReachLateral, "OUT_OF_REACH_LATERAL"},
    {Violation::LateralTooNarrow, "LATERAL_TOO_NARROW"},
    {Violation::CrossedFeet, "CROSSED_FEET"},
    {Violation::YawOutOfRange, "YAW_OUT_OF_RANGE"},
    {Violation::Alternation, "ALTERNATION"},
    {Violation::FeetOverlap, "FEET_OVERLAP"},
}};

}  // namespace

std::string_view to_string(Violation v) {
  for (const auto& [k, name] : kViolationNames)
    if (k == v) return name;
  return "UNKNOWN";
}

std::optional<Violation> violation_from_string(std::string_view s) {
  for (const auto& [k, name] : kViolationNames)
    if (name == s) return k;
  return std::nullopt;
}

std::string_view to_string(Side s) { return s == Side::Left ? "Left" : "Right"; }

std::optional<Side> side_from_string(std::string_view s) {
  if (s == "Left") return Side::Left;
  if (s == "Right") return Side::Right;
  return std::nullopt;
}

Footstep make_footstep(Side side, double x, double y, double yaw) {
  Footstep f;
  f.side = side;
  f.x = x;
  f.y = y;
  f.yaw = normalize_angle(yaw);
  return f;
}

double StancePose::heading() const { return mean_angle(left.yaw, right.yaw); }

void validate(const StepConstraints& c) {
  for (double v : {c.max_forward, c.max_backward, c.min_lateral_separation, c.max_lateral, c.max_yaw_per_step,
                   c.foot_length, c.foot_width, c.max_height_delta, c.goal_position_tolerance,
                   c.goal_yaw_tolerance, c.nominal_separation}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw FootstepError("step constraints must all be positive");
  }
  if (!(c.min_lateral_separation < c.max_lateral)) {
    throw FootstepError("min_lateral_separation must be below max_lateral");
  }
}

StancePose stance_at(const Goal2D& goal, const StepConstraints& c) {
  const double half = 0.5 * c.nominal_separation;
  const double s = std::sin(goal.yaw), co = std::cos(goal.yaw);
  // Left is +y in the goal frame.
  StancePose st;
  st.left = make_footstep(Side::Left, goal.x - s * half, goal.y + co * half, goal.yaw);
  st.right = make_footstep(Side::Right, goal.x + s * half, goal.y - co * half, goal.yaw);
  return st;
}

json to_json(const Footstep& f) {
  json v = json::array();
  for (auto x : f.violations) v.push_back(to_string(x));
  return json{{"side", to_string(f.side)}, {"x", f.x},         {"y", f.y},
              {"yaw", f.yaw},              {"z", f.z},         {"valid", f.valid},
              {"violations", std::move(v)}};
}

Footstep footstep_from_json(const json& j) {
  const auto side = side_from_string(jf::require_string(j, "side", "footstep"));
  if (!side) throw ParseError("footstep: side must be 'Left' or 'Right'");
  Footstep f = make_footstep(*side, jf::require_number(j, "x", "footstep"), jf::require_number(j, "y", "footstep"),
                             jf::number_or(j, "yaw", 0.0, "footstep"));
  f.z = jf::number_or(j, "z", 0.0, "footstep");
  f.valid = jf::bool_or(j, "valid", true, "footstep");
  if (j.contains("violations")) {
    for (const auto& v : j.at("violations")) {
      if (!v.is_string()) throw ParseError("footstep: violation codes must be strings");
      auto code = violation_from_string(v.get<std::string>());
      if (!code) throw ParseError("footstep: unknown violation '" + v.get<std::string>() + "'");
      f.violations.push_back(*code);
    }
  }
  return f;
}

json to_json(const StancePose& s) { return json{{"left", to_json(s.left)}, {"right", to_json(s.right)}}; }

StancePose stance_from_json(const json& j) {
  StancePose s{footstep_from_json(jf::require(j, "left", "stance")),
               footstep_from_json(jf::require(j, "right", "stance"))};
  if (s.left.side != Side::Left || s.right.side != Side::Right) {
    throw ParseError("stance: 'left' and 'right' must carry matching sides");
  }
  return s;
}

json to_json(const Goal2D& g) { return json{{"x", g.x}, {"y", g.y}, {"yaw", g.yaw}}; }

Goal2D goal_from_json(const json& j) {
  return Goal2D{jf::require_number(j, "x", "goal"), jf::require_number(j, "y", "goal"),
                normalize_angle(jf::number_or(j, "yaw", 0.0, "goal"))};
}

json to_json(const StepConstraints& c) {
  return json{{"max_forward", c.max_forward},
              {"max_backward", c.max_backward},
              {"min_lateral_separation", c.min_lateral_separation},
              {"max_lateral", c.max_lateral},
              {"max_yaw_per_step", c.max_yaw_per_step},
              {"foot_length", c.foot_length},
              {"foot_width", c.foot_width},
              {"max_height_delta", c.max_height_delta},
              {"goal_position_tolerance", c.goal_position_tolerance},
              {"goal_yaw_tolerance", c.goal_yaw_tolerance},
              {"nominal_separation", c.nominal_separation}};
}

StepConstraints constraints_from_json(const json& j) {
  StepConstraints c;
  const char* w = "step constraints";
  c.max_forward = jf::number_or(j, "max_forward", c.max_forward, w);
  c.max_backward = jf::number_or(j, "max_backward", c.max_backward, w);
  c.min_lateral_separation = jf::number_or(j, "min_lateral_separation", c.min_lateral_separation, w);
  c.max_lateral = jf::number_or(j, "max_lateral", c.max_lateral, w);
  c.max_yaw_per_step = jf::number_or(j, "max_yaw_per_step", c.max_yaw_per_step, w);
  c.foot_length = jf::number_or(j, "foot_length", c.foot_length, w);
  c.foot_width = jf::number_or(j, "foot_width", c.foot_width, w);
  c.max_height_delta = jf::number_or(j, "max_height_delta", c.max_height_delta, w);
  c.goal_position_tolerance = jf::number_or(j, "goal_position_tolerance", c.goal_position_tolerance, w);
  c.goal_yaw_tolerance = jf::number_or(j, "goal_yaw_tolerance", c.goal_yaw_tolerance, w);
  c.nominal_separation = jf::number_or(j, "nominal_separation", c.nominal_separation, w);
  validate(c);
  return c;
}

}  // namespace teleop::footstep
