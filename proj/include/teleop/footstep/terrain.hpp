#pragma once

#include <array>
#include <vector>

#include "teleop/footstep/footstep.hpp"
#include "teleop/footstep/height_map.hpp"

namespace teleop::footstep {

/// Footprint partly or wholly outside the map.
class OutOfBounds : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

/// Corners of the oriented foot rectangle, counter-clockwise from front-left.
std::array<Eigen::Vector2d, 4> footprint_corners(const Footstep& step, const StepConstraints& c);

bool footprint_in_bounds(const HeightMap& map, const Footstep& step, const StepConstraints& c);

/// Cells whose centers lie inside (or on the edge of) the foot rectangle.
std::vector<Cell> footprint_cells(const HeightMap& map, const Footstep& step, const StepConstraints& c);

/// Sets z to the mean footprint elevation and records NO_STEP_CELL / HEIGHT_SPREAD.
/// Throws OutOfBounds when the footprint leaves the map.
Footstep snap_footstep(const HeightMap& map, const Footstep& step, const StepConstraints& c = {});

/// Same as snap_footstep, but an out-of-bounds footprint is flagged
/// OUT_OF_BOUNDS instead of thrown.
Footstep snap_or_flag(const HeightMap& map, const Footstep& step, const StepConstraints& c = {});

/// True if the two foot rectangles intersect (separating-axis test).
bool feet_overlap(const Footstep& a, const Footstep& b, const StepConstraints& c);

}  // namespace teleop::footstep
