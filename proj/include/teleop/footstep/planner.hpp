#pragma once

#include <cstddef>
#include <stop_token>
#include <string>
#include <vector>

#include "teleop/footstep/plan.hpp"

namespace teleop::footstep {

class NoPath : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

class PlanningCancelled : public NoPath {
 public:
  using NoPath::NoPath;
};

class InvalidStart : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

/// Swing-foot placement relative to the stance foot (see RelativeStep).
struct StepTemplate {
  double forward = 0.0;
  double lateral = 0.0;
  double yaw = 0.0;
};

/// Four forward lengths (0, 3/8, 3/4, 1 x max_forward) each straight and
/// turning +-max_yaw, a wide and a narrow side step, and one back step.
std::vector<StepTemplate> default_templates(const StepConstraints& c);

/// Admissible: distance/reach and heading/max_yaw lower bounds, so plans are
/// cost-optimal. Informed: adds the turn onto the travel bearing and counts
/// full-stride steps; not a lower bound, but expands orders of magnitude fewer
/// nodes on goals that need turning.
enum class Heuristic { Admissible, Informed };

struct PlannerParams {
  std::size_t node_budget = 200'000;  // expansions before giving up
  double path_length_weight = 1.0;    // cost per meter of stance-midpoint travel
  std::vector<StepTemplate> templates;  // empty: default_templates()
  Heuristic heuristic = Heuristic::Informed;
  bool goal_snap = true;  // also try stepping straight onto the goal stance
  double key_resolution = 0.025;       // m, duplicate-state detection
  double key_yaw_resolution = 0.05;    // rad
};

struct PlannerStats {
  std::size_t expanded = 0;
  std::size_t generated = 0;
  double cost = 0.0;
};

/// Cost of placing `next` from stance (prev, last): one per step plus the
/// weighted stance-midpoint displacement.
double step_cost(const Footstep& prev, const Footstep& last, const Footstep& next, double path_length_weight);

/// Total cost of a plan's step sequence from its start stance.
double plan_cost(const FootstepPlan& plan, double path_length_weight);

/// Midpoint within goal_position_tolerance and heading within goal_yaw_tolerance.
bool stance_reaches_goal(const StancePose& stance, const Goal2D& goal, const StepConstraints& c);

/// Snaps and checks a start stance; throws InvalidStart.
StancePose prepare_start(const HeightMap& map, const StancePose& start, const StepConstraints& c);

/// A* over stance states. Returns a Proposed plan whose steps are snapped and
/// valid and whose final stance satisfies the goal tolerances. Throws
/// InvalidStart, NoPath (budget exhausted / unreachable) or PlanningCancelled.
FootstepPlan plan_footsteps(const HeightMap& map, const StancePose& start, const Goal2D& goal,
                            const StepConstraints& c = {}, const PlannerParams& params = {},
                            std::string id = {}, PlannerStats* stats = nullptr, std::stop_token stop = {});

}  // namespace teleop::footstep
