#pragma once

#include <vector>

#include "teleop/footstep/footstep.hpp"
#include "teleop/footstep/height_map.hpp"

namespace teleop::footstep {

/// Candidate and stance foot are the same side.
class SameSide : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

/// Candidate expressed in the stance foot's frame: forward, lateral (positive
/// toward the candidate's own side) and relative yaw.
struct RelativeStep {
  double forward = 0.0;
  double lateral = 0.0;
  double yaw = 0.0;
};

RelativeStep relative_step(const Footstep& stance_foot, const Footstep& candidate);

/// Reach/yaw/separation violations of placing `candidate` while standing on
/// `stance_foot`; empty when the step is feasible.
std::vector<Violation> validate_transition(const Footstep& stance_foot, const Footstep& candidate,
                                           const StepConstraints& c = {});

/// Inverse of relative_step.
Footstep place_relative(const Footstep& stance_foot, const RelativeStep& rel);

}  // namespace teleop::footstep
