#include <set>

#include <gtest/gtest.h>

#include "oracles/footstep_oracle.hpp"
#include "world/world_fixture.hpp"

namespace teleop::test {
namespace {

using footstep::PlanStatus;
using nlohmann::json;

std::vector<std::string> statuses(const std::vector<Event>& events) {
  std::vector<std::string> out;
  for (const auto& e : events)
    if (e.kind == EventKind::PlanStatusChanged) out.push_back(e.payload.at("status"));
  return out;
}

TEST(Walking, SetNavGoalProposesAlternatingPlan) {
  Simulator sim(flat_world());
  const auto r = sim.apply(SetNavGoal{2.5, 1.0, 0.0, GoalSource::Minimap});
  ASSERT_TRUE(r.accepted) << r.message;
  EXPECT_EQ(count_kind(r.events, EventKind::PlanProposed), 1u);
  EXPECT_EQ(sim.state().robot.mode, Mode::AwaitingApproval);
  const auto& plan = *sim.state().robot.active_plan;
  EXPECT_EQ(plan.status, PlanStatus::Proposed);
  ASSERT_FALSE(plan.steps.empty());
  for (std::size_t i = 1; i < plan.steps.size(); ++i) EXPECT_NE(plan.steps[i].side, plan.steps[i - 1].side);
  EXPECT_TRUE(oracle::plan_report(*sim.state().map, plan, plan.start, sim.world().constraints).empty());
  const auto proposed = std::find_if(r.events.begin(), r.events.end(),
                                     [](const Event& e) { return e.kind == EventKind::PlanProposed; });
  EXPECT_EQ(footstep::plan_from_json(proposed->payload.at("plan")), plan);
  EXPECT_EQ(proposed->payload.at("source"), "Minimap");
}

TEST(Walking, ApproveWrongIdLeavesStateUnchanged) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const auto before = sim.snapshot();
  const auto r = sim.apply(ApprovePlan{"plan-999"});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, RejectReason::UnknownPlan);
  ASSERT_EQ(r.events.size(), 1u);
  EXPECT_EQ(r.events[0].kind, EventKind::CommandRejected);
  EXPECT_EQ(r.events[0].payload.at("reason"), "UnknownPlan");
  EXPECT_EQ(sim.snapshot(), before);
}

TEST(Walking, ApproveOutsideAwaitingApproval) {
  Simulator sim(flat_world());
  EXPECT_EQ(sim.apply(ApprovePlan{"plan-1"}).reason, RejectReason::UnknownPlan);
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const std::string id = pending_id(sim);
  ASSERT_TRUE(sim.apply(ApprovePlan{id}).accepted);
  EXPECT_EQ(sim.apply(ApprovePlan{id}).reason, RejectReason::PlanLocked);
  EXPECT_EQ(sim.apply(SetNavGoal{1.0, 1.0, 0.0}).reason, RejectReason::WrongMode);
}

TEST(Walking, ExecutesPlanExactly) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.2, 0.3});
  const auto plan = *sim.state().robot.active_plan;
  const std::size_t n = plan.steps.size();
  const auto approve = sim.apply(ApprovePlan{plan.id});
  EXPECT_EQ(statuses(approve.events), (std::vector<std::string>{"Approved", "Executing"}));
  EXPECT_EQ(sim.state().robot.mode, Mode::Walking);

  const std::uint64_t per_step = sim.world().params.ticks_per_step();
  EXPECT_EQ(per_step, 60u);
  std::vector<Event> events;
  std::size_t last_index = 0;
  for (std::uint64_t t = 0; t < n * per_step; ++t) {
    EXPECT_EQ(sim.state().robot.mode, Mode::Walking) << t;
    EXPECT_EQ(sim.state().robot.active_plan->status, PlanStatus::Executing);
    auto ev = sim.tick();
    const auto snap = sim.snapshot();
    EXPECT_GE(snap.step_index, last_index);
    last_index = snap.step_index;
    events.insert(events.end(), ev.begin(), ev.end());
  }
  EXPECT_EQ(count_kind(events, EventKind::StepCompleted), n);
  EXPECT_EQ(count_kind(events, EventKind::StepStarted), n - 1);
  EXPECT_EQ(statuses(events), std::vector<std::string>{"Done"});
  const auto& r = sim.state().robot;
  EXPECT_EQ(r.mode, Mode::Idle);
  EXPECT_EQ(r.active_plan->status, PlanStatus::Done);
  EXPECT_EQ(r.stance, plan.stance_after(n));
  EXPECT_EQ(r.base.position.x(), r.stance.midpoint().x());
  EXPECT_EQ(r.base.position.y(), r.stance.midpoint().y());
  // Step completions land exactly on step boundaries.
  std::size_t k = 0;
  for (const auto& e : events) {
    if (e.kind != EventKind::StepCompleted) continue;
    EXPECT_EQ(e.tick, (k + 1) * per_step);
    EXPECT_EQ(e.payload.at("index").get<std::size_t>(), k);
    ++k;
  }
}

TEST(Walking, BaseInterpolatesBetweenStances) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{1.5, 1.0, 0.0});
  const auto plan = *sim.state().robot.active_plan;
  sim.apply(ApprovePlan{plan.id});
  run_ticks(sim, 30);
  const auto from = plan.stance_after(0), to = plan.stance_after(1);
  const Eigen::Vector2d mid = 0.5 * (from.midpoint() + to.midpoint());
  EXPECT_NEAR(sim.state().robot.base.position.x(), mid.x(), 1e-12);
  EXPECT_NEAR(sim.state().robot.base.position.y(), mid.y(), 1e-12);
  EXPECT_DOUBLE_EQ(sim.snapshot().step_progress, 0.5);
}

TEST(Walking, RejectPlanReturnsToIdle) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const std::string id = pending_id(sim);
  EXPECT_EQ(sim.apply(RejectPlan{"nope"}).reason, RejectReason::UnknownPlan);
  const auto r = sim.apply(RejectPlan{id});
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
  EXPECT_EQ(sim.state().robot.active_plan->status, PlanStatus::Rejected);
  EXPECT_EQ(sim.apply(ApprovePlan{id}).reason, RejectReason::PlanLocked);
}

TEST(Walking, NewGoalSupersedesPendingPlan) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const std::string first = pending_id(sim);
  const auto r = sim.apply(SetNavGoal{2.0, 0.8, 0.0});
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(statuses(r.events), std::vector<std::string>{"Rejected"});
  EXPECT_NE(pending_id(sim), first);
  EXPECT_EQ(sim.apply(ApprovePlan{first}).reason, RejectReason::UnknownPlan);
}

TEST(Walking, UnreachableGoalRejectedWithoutStateChange) {
  json doc = flat_world_doc(60, 40);
  // A wall of tables across the map.
  doc["objects"] = {{{"id", "wall"}, {"kind", "Table"}, {"position", {1.5, 1.0}}, {"size", {0.5, 2.0, 0.8}}}};
  Simulator sim(flat_world(doc));
  const auto before = sim.snapshot();
  const auto r = sim.apply(SetNavGoal{2.5, 1.0, 0.0});
  EXPECT_FALSE(r.accepted);
  EXPECT_EQ(r.reason, RejectReason::NoPath);
  EXPECT_EQ(sim.snapshot(), before);
}

TEST(Walking, EditOntoObstacleThenApproveRefused) {
  json doc = flat_world_doc();
  doc["objects"] = {{{"id", "rock"}, {"kind", "SmallObstacle"}, {"position", {2.5, 0.3}}, {"size", {0.2, 0.2, 0.05}}}};
  Simulator sim(flat_world(doc));
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const auto plan = *sim.state().robot.active_plan;
  ASSERT_GE(plan.steps.size(), 3u);
  const auto r = sim.apply(EditFootstep{plan.id, 1, {2.5, 0.3, 0.0}});
  ASSERT_TRUE(r.accepted);
  EXPECT_EQ(statuses(r.events), std::vector<std::string>{"Edited"});
  const auto& edited = *sim.state().robot.active_plan;
  EXPECT_FALSE(edited.steps[1].valid);
  EXPECT_EQ(footstep::plan_from_json(r.events.back().payload.at("plan")), edited);
  const auto a = sim.apply(ApprovePlan{plan.id});
  EXPECT_EQ(a.reason, RejectReason::PlanInvalid);
  EXPECT_EQ(sim.state().robot.mode, Mode::AwaitingApproval);
  EXPECT_EQ(sim.apply(EditFootstep{plan.id, 99, {0, 0, 0}}).reason, RejectReason::IndexOutOfRange);
  EXPECT_EQ(sim.apply(EditFootstep{"other", 0, {0, 0, 0}}).reason, RejectReason::UnknownPlan);
}

TEST(Walking, EditWhileExecutingIsLocked) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const std::string id = pending_id(sim);
  sim.apply(ApprovePlan{id});
  EXPECT_EQ(sim.apply(EditFootstep{id, 0, {0.7, 1.1, 0.0}}).reason, RejectReason::PlanLocked);
}

TEST(Walking, AbortMidStep) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  const auto plan = *sim.state().robot.active_plan;
  sim.apply(ApprovePlan{plan.id});
  run_ticks(sim, 90);  // one and a half steps
  const auto r = sim.apply(AbortWalk{});
  EXPECT_EQ(statuses(r.events), std::vector<std::string>{"Aborted"});
  const auto& robot = sim.state().robot;
  EXPECT_EQ(robot.mode, Mode::Idle);
  EXPECT_EQ(robot.stance, plan.stance_after(1));
  EXPECT_EQ(robot.base.position.x(), robot.stance.midpoint().x());
  EXPECT_TRUE(sim.apply(AbortWalk{}).accepted);  // no-op when standing
  EXPECT_TRUE(sim.apply(AbortWalk{}).events.empty());
}

// Joystick ---------------------------------------------------------------------

TEST(Joystick, HoldsWalkingWhileRefreshed) {
  Simulator sim(flat_world(flat_world_doc(120, 40)));
  ASSERT_TRUE(sim.apply(JoystickCommand{0.25, 0.0, 0.0}).accepted);
  EXPECT_EQ(sim.state().robot.mode, Mode::Walking);
  EXPECT_TRUE(sim.state().robot.joystick_walk);
  std::vector<Event> events;
  for (int t = 0; t < 400; ++t) {
    if (t % 5 == 0) sim.apply(JoystickCommand{0.25, 0.0, 0.0});
    auto ev = sim.tick();
    events.insert(events.end(), ev.begin(), ev.end());
  }
  EXPECT_EQ(sim.state().robot.mode, Mode::Walking);
  EXPECT_GE(count_kind(events, EventKind::StepCompleted), 6u);
  EXPECT_GT(sim.state().robot.stance.midpoint().x(), 1.0);
  // Synthesized steps obey the same feasibility rules as planned ones.
  const auto& plan = *sim.state().robot.active_plan;
  EXPECT_TRUE(oracle::plan_report(*sim.state().map, plan, plan.start, sim.world().constraints).empty());
}

TEST(Joystick, DeadmanHaltsStepping) {
  const double step = 1.2, deadman = 0.2;
  for (int refreshes : {1, 3, 17, 40}) {
    Simulator sim(flat_world(flat_world_doc(120, 40)));
    std::uint64_t last_refresh = 0;
    std::vector<Event> events;
    for (int t = 0; t < 600; ++t) {
      if (t < refreshes * 4 && t % 4 == 0) {
        ASSERT_TRUE(sim.apply(JoystickCommand{0.2, 0.0, 0.05}).accepted);
        last_refresh = sim.tick_count();
      }
      auto ev = sim.tick();
      events.insert(events.end(), ev.begin(), ev.end());
    }
    EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
    std::uint64_t last_start = 0;
    for (const auto& e : events)
      if (e.kind == EventKind::StepStarted) last_start = e.tick;
    EXPECT_LE(static_cast<double>(last_start - std::min(last_start, last_refresh)) * 0.02, deadman + step + 1e-9)
        << refreshes;
    EXPECT_EQ(statuses(events).back(), "Done");
  }
}

TEST(Joystick, ZeroCommandStopsAtStepEnd) {
  Simulator sim(flat_world());
  sim.apply(JoystickCommand{0.2, 0.0, 0.0});
  run_ticks(sim, 10);
  sim.apply(JoystickCommand{0.0, 0.0, 0.0});
  const auto events = run_ticks(sim, 60);
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
  EXPECT_EQ(count_kind(events, EventKind::StepCompleted), 1u);
  EXPECT_EQ(count_kind(events, EventKind::StepStarted), 0u);
}

TEST(Joystick, RejectedDuringPlannedWalk) {
  Simulator sim(flat_world());
  sim.apply(SetNavGoal{2.0, 1.0, 0.0});
  EXPECT_EQ(sim.apply(JoystickCommand{0.2, 0, 0}).reason, RejectReason::WrongMode);
  sim.apply(ApprovePlan{pending_id(sim)});
  EXPECT_EQ(sim.apply(JoystickCommand{0.2, 0, 0}).reason, RejectReason::WrongMode);
}

TEST(Joystick, TurnsAndSidesteps) {
  Simulator sim(flat_world(flat_world_doc(80, 80)));
  for (int t = 0; t < 300; ++t) {
    if (t % 5 == 0) sim.apply(JoystickCommand{0.0, 0.0, 0.25});
    sim.tick();
  }
  EXPECT_GT(sim.state().robot.stance.heading(), 0.5);
  Simulator side(flat_world(flat_world_doc(80, 80)));
  for (int t = 0; t < 300; ++t) {
    if (t % 5 == 0) side.apply(JoystickCommand{0.0, 0.15, 0.0});
    side.tick();
  }
  EXPECT_GT(side.state().robot.stance.midpoint().y(), 1.2);
}

TEST(Joystick, BlockedFirstStepRejected) {
  json doc = flat_world_doc();
  doc["start"] = {{"x", 1.5}, {"y", 1.0}, {"yaw", 0.0}};
  doc["objects"] = {{{"id", "wall"}, {"kind", "Table"}, {"position", {1.95, 1.0}}, {"size", {0.5, 2.0, 0.8}}}};
  Simulator sim(flat_world(doc));
  const auto r = sim.apply(JoystickCommand{0.3, 0.0, 0.0});
  EXPECT_EQ(r.reason, RejectReason::PlanInvalid);
  EXPECT_EQ(sim.state().robot.mode, Mode::Idle);
}

// Tasks 1 and 2 ------------------------------------------------------------------

TEST(Tasks, WalkToPoseCompletesOnArrival) {
  Simulator sim(tasks_world());
  const auto goal = *sim.world().tasks.walk_goal;
  ASSERT_TRUE(sim.apply(SetNavGoal{goal.x, goal.y, goal.yaw}).accepted);
  sim.apply(ApprovePlan{pending_id(sim)});
  const auto n = sim.state().robot.active_plan->steps.size();
  std::vector<Event> events;
  for (std::size_t t = 0; t < n * 60 + 1; ++t) {
    if (sim.state().robot.mode == Mode::Walking) {
      EXPECT_EQ(sim.state().task(Task::WalkToPose), TaskStatus::Incomplete);
    }
    auto ev = sim.tick();
    events.insert(events.end(), ev.begin(), ev.end());
  }
  EXPECT_EQ(sim.state().task(Task::WalkToPose), TaskStatus::Complete);
  EXPECT_EQ(sim.state().task(Task::AvoidObstacles), TaskStatus::Complete);
  const auto& b = sim.state().robot.base;
  EXPECT_LE(std::hypot(b.position.x() - goal.x, b.position.y() - goal.y), 0.15);
  EXPECT_EQ(count_kind(events, EventKind::TaskCompleted), 2u);
}

TEST(Tasks, SteppingOnProtectedCellViolatesPermanently) {
  json doc = flat_world_doc(100, 40);
  doc["tasks"] = {{"walk_goal", {{"x", 3.0}, {"y", 1.0}, {"yaw", 0.0}}}, {"protected_cells", json::array()}};
  // Mark a band across the straight path: protected but still steppable.
  for (int col = 30; col < 34; ++col)
    for (int row = 10; row < 30; ++row) doc["tasks"]["protected_cells"].push_back({col, row});
  const World w = flat_world(doc);
  Simulator sim(w);
  sim.apply(SetNavGoal{3.0, 1.0, 0.0});
  sim.apply(ApprovePlan{pending_id(sim)});
  std::vector<Event> events = run_ticks(sim, 60 * sim.state().robot.active_plan->steps.size() + 5);

  std::set<std::pair<int, int>> guarded;
  for (const auto& c : w.tasks.protected_cells) guarded.insert({c.col, c.row});
  bool touched = false;
  for (const auto& e : events) {
    if (e.kind != EventKind::StepCompleted) continue;
    for (const auto& cell : oracle::covered_cells(*w.initial.map, footstep::footstep_from_json(e.payload.at("step")),
                                                  w.constraints)) {
      touched = touched || guarded.count(cell);
    }
  }
  ASSERT_TRUE(touched);
  EXPECT_EQ(sim.state().task(Task::AvoidObstacles), TaskStatus::Violated);
  EXPECT_EQ(count_kind(events, EventKind::TaskViolated), 1u);
  // Walking to the goal does not clear the violation.
  EXPECT_EQ(sim.state().task(Task::WalkToPose), TaskStatus::Complete);
  run_ticks(sim, 100);
  EXPECT_EQ(sim.state().task(Task::AvoidObstacles), TaskStatus::Violated);
}

TEST(Tasks, PlannedWalkNeverTouchesBundledObstacles) {
  Simulator sim(tasks_world());
  const auto goal = *sim.world().tasks.walk_goal;
  sim.apply(SetNavGoal{goal.x, goal.y, goal.yaw});
  sim.apply(ApprovePlan{pending_id(sim)});
  const auto events = run_ticks(sim, 60 * sim.state().robot.active_plan->steps.size());
  std::set<std::pair<int, int>> guarded;
  for (const auto& c : sim.world().tasks.protected_cells) guarded.insert({c.col, c.row});
  for (const auto& e : events) {
    if (e.kind != EventKind::StepCompleted) continue;
    for (const auto& cell : oracle::covered_cells(*sim.state().map, footstep::footstep_from_json(e.payload.at("step")),
                                                  sim.world().constraints)) {
      EXPECT_FALSE(guarded.count(cell));
    }
  }
  EXPECT_NE(sim.state().task(Task::AvoidObstacles), TaskStatus::Violated);
}

}  // namespace
}  // namespace teleop::test
