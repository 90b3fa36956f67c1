#include "teleop/footstep/plan.hpp"

#include <algorithm>
#include <array>
#include <utility>

#include "teleop/common/json_fields.hpp"
#include "teleop/footstep/terrain.hpp"
#include "teleop/footstep/transition.hpp"

namespace teleop::footstep {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<PlanStatus, std::string_view>, 7> kStatusNames{{
    {PlanStatus::Proposed, "Proposed"},
    {PlanStatus::Edited, "Edited"},
    {PlanStatus::Approved, "Approved"},
    {PlanStatus::Rejected, "Rejected"},
    {PlanStatus::Executing, "Executing"},
    {PlanStatus::Done, "Done"},
    {PlanStatus::Aborted, "Aborted"},
}};

/// Violations of step `i` against its predecessor, without terrain checks.
std::vector<Violation> link_violations(const FootstepPlan& plan, const StancePose& start, std::size_t i,
                                       const StepConstraints& c) {
  const Footstep& step = plan.steps[i];
  std::vector<Violation> out;
  if (i > 0 && plan.steps[i - 1].side == step.side) {
    out.push_back(Violation::Alternation);
    return out;
  }
  const Footstep& stance = i == 0 ? start.foot(opposite(step.side)) : plan.steps[i - 1];
  out = validate_transition(stance, step, c);
  if (feet_overlap(stance, step, c)) out.push_back(Violation::FeetOverlap);
  return out;
}

Footstep recheck(const HeightMap& map, const FootstepPlan& plan, const StancePose& start, std::size_t i,
                 const StepConstraints& c) {
  Footstep s = snap_or_flag(map, plan.steps[i], c);
  for (auto v : link_violations(plan, start, i, c)) s.violations.push_back(v);
  s.valid = s.violations.empty();
  return s;
}

}  // namespace

std::string_view to_string(PlanStatus s) {
  for (const auto& [k, name] : kStatusNames)
    if (k == s) return name;
  return "?";
}

std::optional<PlanStatus> plan_status_from_string(std::string_view s) {
  for (const auto& [k, name] : kStatusNames)
    if (name == s) return k;
  return std::nullopt;
}

bool can_transition(PlanStatus from, PlanStatus to) {
  using S = PlanStatus;
  switch (from) {
    case S::Proposed:
    case S::Edited: return to == S::Edited || to == S::Approved || to == S::Rejected;
    case S::Approved: return to == S::Executing;
    case S::Executing: return to == S::Done || to == S::Aborted;
    default: return false;
  }
}

bool is_editable(PlanStatus s) { return s == PlanStatus::Proposed || s == PlanStatus::Edited; }

StancePose FootstepPlan::stance_after(std::size_t count) const {
  StancePose st = start;
  for (std::size_t i = 0; i < std::min(count, steps.size()); ++i) st.foot(steps[i].side) = steps[i];
  return st;
}

FootstepPlan with_status(FootstepPlan plan, PlanStatus to) {
  if (!can_transition(plan.status, to)) {
    throw InvalidTransition("plan '" + plan.id + "' cannot go from " + std::string(to_string(plan.status)) + " to " +
                            std::string(to_string(to)));
  }
  plan.status = to;
  return plan;
}

std::vector<PlanViolation> validate_plan(const HeightMap& map, const FootstepPlan& plan, const StancePose& start,
                                         const StepConstraints& c) {
  std::vector<PlanViolation> report;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    for (auto v : recheck(map, plan, start, i, c).violations) report.push_back({i, v});
  }
  return report;
}

FootstepPlan edit_footstep(const HeightMap& map, const FootstepPlan& plan, std::size_t index, const Goal2D& new_pose,
                           const StepConstraints& c) {
  if (!is_editable(plan.status)) {
    throw PlanLocked("plan '" + plan.id + "' is " + std::string(to_string(plan.status)) + " and cannot be edited");
  }
  if (index >= plan.steps.size()) {
    throw IndexOutOfRange("step " + std::to_string(index) + " is outside a plan of " +
                          std::to_string(plan.steps.size()) + " steps");
  }
  FootstepPlan out = with_status(plan, PlanStatus::Edited);
  out.steps[index] = make_footstep(plan.steps[index].side, new_pose.x, new_pose.y, new_pose.yaw);
  out.steps[index] = recheck(map, out, out.start, index, c);
  if (index + 1 < out.steps.size()) out.steps[index + 1] = recheck(map, out, out.start, index + 1, c);
  return out;
}

FootstepPlan approve_plan(const HeightMap& map, const FootstepPlan& plan, const StepConstraints& c) {
  if (!can_transition(plan.status, PlanStatus::Approved)) {
    throw InvalidTransition("plan '" + plan.id + "' cannot be approved while " + std::string(to_string(plan.status)));
  }
  const auto report = validate_plan(map, plan, plan.start, c);
  if (!report.empty()) {
    throw PlanInvalid("plan '" + plan.id + "' has " + std::to_string(report.size()) + " violation(s); first at step " +
                      std::to_string(report.front().index) + ": " + std::string(to_string(report.front().code)));
  }
  return with_status(plan, PlanStatus::Approved);
}

json to_json(const FootstepPlan& plan) {
  json steps = json::array();
  for (const auto& s : plan.steps) steps.push_back(to_json(s));
  return json{{"id", plan.id},
              {"status", to_string(plan.status)},
              {"goal", to_json(plan.goal)},
              {"start", to_json(plan.start)},
              {"steps", std::move(steps)}};
}

FootstepPlan plan_from_json(const json& j) {
  FootstepPlan plan;
  plan.id = jf::require_string(j, "id", "plan");
  const auto status = plan_status_from_string(jf::require_string(j, "status", "plan"));
  if (!status) throw ParseError("plan: unknown status");
  plan.status = *status;
  plan.goal = goal_from_json(jf::require(j, "goal", "plan"));
  plan.start = stance_from_json(jf::require(j, "start", "plan"));
  const json& steps = jf::require(j, "steps", "plan");
  if (!steps.is_array()) throw ParseError("plan: 'steps' must be an array");
  for (const auto& s : steps) plan.steps.push_back(footstep_from_json(s));
  return plan;
}

}  // namespace teleop::footstep
