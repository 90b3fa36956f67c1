#include "teleop/footstep/transition.hpp"

#include <cmath>

#include "teleop/common/angles.hpp"
#include "teleop/footstep/height_map.hpp"

namespace teleop::footstep {

namespace {
constexpr double kBoundEps = 1e-9;
}

RelativeStep relative_step(const Footstep& stance_foot, const Footstep& candidate) {
  const double dx = candidate.x - stance_foot.x, dy = candidate.y - stance_foot.y;
  const double c = std::cos(stance_foot.yaw), s = std::sin(stance_foot.yaw);
  const double local_y = -s * dx + c * dy;
  RelativeStep r;
  r.forward = c * dx + s * dy;
  r.lateral = candidate.side == Side::Left ? local_y : -local_y;
  r.yaw = angle_diff(candidate.yaw, stance_foot.yaw);
  return r;
}

Footstep place_relative(const Footstep& stance_foot, const RelativeStep& rel) {
  const Side side = opposite(stance_foot.side);
  const double local_y = side == Side::Left ? rel.lateral : -rel.lateral;
  const double c = std::cos(stance_foot.yaw), s = std::sin(stance_foot.yaw);
  return make_footstep(side, stance_foot.x + c * rel.forward - s * local_y,
                       stance_foot.y + s * rel.forward + c * local_y, stance_foot.yaw + rel.yaw);
}

std::vector<Violation> validate_transition(const Footstep& stance_foot, const Footstep& candidate,
                                           const StepConstraints& c) {
  if (stance_foot.side == candidate.side) throw SameSide("stance and candidate feet are on the same side");
  const RelativeStep r = relative_step(stance_foot, candidate);
  std::vector<Violation> out;
  if (r.forward > c.max_forward + kBoundEps) out.push_back(Violation::OutOfReachForward);
  if (r.forward < -c.max_backward - kBoundEps) out.push_back(Violation::OutOfReachBackward);
  if (r.lateral < 0.0) {
    out.push_back(Violation::CrossedFeet);
  } else if (r.lateral < c.min_lateral_separation - kBoundEps) {
    out.push_back(Violation::LateralTooNarrow);
  }
  if (r.lateral > c.max_lateral + kBoundEps) out.push_back(Violation::OutOfReachLateral);
  if (std::abs(r.yaw) > c.max_yaw_per_step + kBoundEps) out.push_back(Violation::YawOutOfRange);
  return out;
}

}  // namespace teleop::footstep
