#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/footstep/footstep.hpp"
#include "teleop/footstep/height_map.hpp"

namespace teleop::footstep {

enum class PlanStatus { Proposed, Edited, Approved, Rejected, Executing, Done, Aborted };

std::string_view to_string(PlanStatus s);
std::optional<PlanStatus> plan_status_from_string(std::string_view s);

/// Declared lifecycle graph: Proposed->{Edited,Approved,Rejected},
/// Edited->{Edited,Approved,Rejected}, Approved->Executing,
/// Executing->{Done,Aborted}.
bool can_transition(PlanStatus from, PlanStatus to);
bool is_editable(PlanStatus s);

class InvalidTransition : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

class PlanLocked : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

class IndexOutOfRange : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

/// Approval refused because the plan still carries violations.
class PlanInvalid : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

struct FootstepPlan {
  std::string id;
  Goal2D goal;
  StancePose start;
  std::vector<Footstep> steps;
  PlanStatus status = PlanStatus::Proposed;

  /// Stance after executing the first `count` steps.
  StancePose stance_after(std::size_t count) const;
  StancePose final_stance() const { return stance_after(steps.size()); }

  friend bool operator==(const FootstepPlan&, const FootstepPlan&) = default;
};

/// Returns the plan with a new status; throws InvalidTransition off the graph.
FootstepPlan with_status(FootstepPlan plan, PlanStatus to);

struct PlanViolation {
  std::size_t index = 0;
  Violation code = Violation::NoStepCell;
  friend bool operator==(const PlanViolation&, const PlanViolation&) = default;
};

/// Re-checks every step against the terrain and its predecessor (the start
/// stance for the first step). Empty iff the plan is executable.
std::vector<PlanViolation> validate_plan(const HeightMap& map, const FootstepPlan& plan, const StancePose& start,
                                         const StepConstraints& c = {});

/// Moves step `index` to `new_pose` (x, y, yaw), re-snaps it and refreshes
/// the violations of it and its successor. Invalid edits are kept and flagged.
FootstepPlan edit_footstep(const HeightMap& map, const FootstepPlan& plan, std::size_t index, const Goal2D& new_pose,
                           const StepConstraints& c = {});

/// Approves a Proposed/Edited plan whose validation report is empty.
FootstepPlan approve_plan(const HeightMap& map, const FootstepPlan& plan, const StepConstraints& c = {});

nlohmann::json to_json(const FootstepPlan& plan);
FootstepPlan plan_from_json(const nlohmann::json& j);

}  // namespace teleop::footstep
