#include "teleop/world/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "teleop/common/angles.hpp"
#include "teleop/footstep/planner.hpp"
#include "teleop/footstep/terrain.hpp"
#include "teleop/footstep/transition.hpp"
#include "teleop/kinematics/ik.hpp"
#include "teleop/world/world_file.hpp"

namespace teleop::world {

using nlohmann::json;
using footstep::FootstepPlan;
using footstep::PlanStatus;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double yaw_of(const Eigen::Quaterniond& q) {
  const Eigen::Vector3d f = q * Eigen::Vector3d::UnitX();
  return std::atan2(f.y(), f.x());
}

std::vector<std::string> chain_joint_names(const kinematics::RobotModel& m, std::string_view chain) {
  std::vector<std::string> out;
  for (std::size_t i : m.chain(chain).joints) out.push_back(m.joints()[i].name);
  return out;
}

}  // namespace

Simulator::Simulator(World world) : world_(std::move(world)), state_(world_.initial) {
  if (!world_.model || !state_.map) throw WorldError("simulator needs a robot model and a map");
  validate(world_.params);
}

void Simulator::emit(EventKind kind, json payload) {
  if (!sink_) throw std::logic_error("event emitted outside apply()/tick()");
  sink_->push_back(Event{state_.tick_count, event_seq_++, kind, std::move(payload)});
}

void Simulator::set_mode(Mode to) {
  Mode& m = state_.robot.mode;
  if (m == to) return;
  if (!can_transition(m, to)) {
    throw std::logic_error("undeclared mode transition " + std::string(to_string(m)) + " -> " +
                           std::string(to_string(to)));
  }
  emit(EventKind::ModeChanged, {{"from", to_string(m)}, {"to", to_string(to)}});
  m = to;
}

void Simulator::plan_status(PlanStatus to, json extra) {
  auto& plan = state_.robot.active_plan;
  plan = footstep::with_status(std::move(*plan), to);
  extra["id"] = plan->id;
  extra["kind"] = "footsteps";
  extra["status"] = footstep::to_string(to);
  emit(EventKind::PlanStatusChanged, std::move(extra));
}

std::string Simulator::next_id() { return "plan-" + std::to_string(state_.next_id++); }

Eigen::Isometry3d Simulator::pelvis() const {
  const auto& b = state_.robot.base;
  return b.to_isometry() * Eigen::Translation3d(0.0, 0.0, world_.model->base_height());
}

kinematics::Pose Simulator::palm(Side s) const {
  const auto local = kinematics::forward_kinematics(*world_.model, state_.robot.joints, arm_chain(s));
  return kinematics::Pose::from_isometry(pelvis() * local.to_isometry());
}

std::optional<kinematics::JointState> Simulator::solve_arm(Side s, const kinematics::Pose& target,
                                                           bool position_only) const {
  kinematics::IkParams p;
  p.movable = kinematics::ChainJoints::FreezeTorso;
  p.position_only = position_only;
  const auto local = kinematics::Pose::from_isometry(pelvis().inverse() * target.to_isometry());
  auto res = kinematics::solve_ik(*world_.model, arm_chain(s), local, state_.robot.setpoints, p);
  if (!res.ok()) return std::nullopt;
  kinematics::JointState out;
  for (const auto& name : kinematics::movable_joints(*world_.model, arm_chain(s), p.movable)) {
    out.set(name, res.solution.at(name));
  }
  return out;
}

double Simulator::clamp_joint(std::string_view name, double value) const {
  const auto& lim = world_.model->joint(name).limits;
  return std::clamp(value, lim.min, lim.max);
}

ApplyResult Simulator::apply(const Command& command) {
  ApplyResult result;
  const WorldState saved = state_;
  const std::uint64_t saved_seq = event_seq_;
  sink_ = &result.events;
  std::optional<Rejection> rej;
  try {
    rej = std::visit([this](const auto& c) { return handle(c); }, command);
  } catch (...) {
    sink_ = nullptr;
    state_ = saved;
    event_seq_ = saved_seq;
    throw;
  }
  if (rej) {
    state_ = saved;
    event_seq_ = saved_seq;
    result.events.clear();
    result.accepted = false;
    result.reason = rej->reason;
    result.message = rej->message;
    emit(EventKind::CommandRejected,
         {{"command", command_type(command)}, {"reason", to_string(rej->reason)}, {"message", rej->message}});
  }
  sink_ = nullptr;
  return result;
}

// --- commands ---------------------------------------------------------------

void Simulator::drop_pending() {
  auto& r = state_.robot;
  if (r.active_plan && footstep::is_editable(r.active_plan->status)) {
    plan_status(PlanStatus::Rejected, {{"reason", "superseded"}});
  }
  if (r.pending_posture) {
    emit(EventKind::PlanStatusChanged,
         {{"id", r.pending_posture->id}, {"kind", "posture"}, {"status", "Rejected"}, {"reason", "superseded"}});
    r.pending_posture.reset();
  }
}

std::optional<Simulator::Rejection> Simulator::handle(const SetNavGoal& c) {
  auto& r = state_.robot;
  if (r.mode != Mode::Idle && r.mode != Mode::AwaitingApproval && r.mode != Mode::Manipulating) {
    return Rejection{RejectReason::WrongMode, "cannot plan while " + std::string(to_string(r.mode))};
  }
  drop_pending();
  set_mode(Mode::Planning);
  FootstepPlan plan;
  try {
    footstep::PlannerParams pp;
    pp.node_budget = world_.params.planner_budget;
    plan = footstep::plan_footsteps(*state_.map, r.stance, {c.x, c.y, c.yaw}, world_.constraints, pp, next_id());
  } catch (const footstep::InvalidStart& e) {
    return Rejection{RejectReason::InvalidStart, e.what()};
  } catch (const footstep::NoPath& e) {
    return Rejection{RejectReason::NoPath, e.what()};
  }
  r.active_plan = plan;
  emit(EventKind::PlanProposed, {{"id", plan.id},
                                 {"kind", "footsteps"},
                                 {"source", c.source == GoalSource::Pointer ? "Pointer" : "Minimap"},
                                 {"plan", footstep::to_json(plan)}});
  set_mode(Mode::AwaitingApproval);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const JoystickCommand& c) {
  auto& r = state_.robot;
  if ((r.mode == Mode::Walking && !r.joystick_walk) || r.mode == Mode::Planning || r.mode == Mode::AwaitingApproval) {
    return Rejection{RejectReason::WrongMode, "joystick ignored while " + std::string(to_string(r.mode))};
  }
  r.joystick = {c.vx, c.vy, c.wz, state_.tick_count};
  if (r.mode == Mode::Walking || r.joystick.zero()) return std::nullopt;

  FootstepPlan plan;
  plan.id = next_id();
  plan.start = r.stance;
  plan.goal = {r.stance.midpoint().x(), r.stance.midpoint().y(), r.stance.heading()};
  r.active_plan = plan;
  auto first = joystick_step();
  if (!first) return Rejection{RejectReason::PlanInvalid, "no feasible step for the joystick setpoint"};
  emit(EventKind::PlanProposed,
       {{"id", plan.id}, {"kind", "footsteps"}, {"source", "Joystick"}, {"plan", footstep::to_json(plan)}});
  plan_status(PlanStatus::Approved);
  plan_status(PlanStatus::Executing);
  r.active_plan->steps.push_back(*first);
  r.joystick_walk = true;
  r.step_index = 0;
  set_mode(Mode::Walking);
  start_step();
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const EditFootstep& c) {
  auto& r = state_.robot;
  if (!r.active_plan || r.active_plan->id != c.plan_id) {
    return Rejection{RejectReason::UnknownPlan, "no plan '" + c.plan_id + "'"};
  }
  try {
    r.active_plan = footstep::edit_footstep(*state_.map, *r.active_plan, c.index, c.pose, world_.constraints);
  } catch (const footstep::PlanLocked& e) {
    return Rejection{RejectReason::PlanLocked, e.what()};
  } catch (const footstep::IndexOutOfRange& e) {
    return Rejection{RejectReason::IndexOutOfRange, e.what()};
  }
  emit(EventKind::PlanStatusChanged, {{"id", c.plan_id},
                                      {"kind", "footsteps"},
                                      {"status", "Edited"},
                                      {"index", c.index},
                                      {"plan", footstep::to_json(*r.active_plan)}});
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const ApprovePlan& c) {
  auto& r = state_.robot;
  if (r.pending_posture && r.pending_posture->id == c.plan_id) {
    for (const auto& [name, q] : r.pending_posture->joints.positions) r.setpoints.set(name, q);
    emit(EventKind::PlanStatusChanged, {{"id", c.plan_id}, {"kind", "posture"}, {"status", "Approved"}});
    r.pending_posture.reset();
    set_mode(Mode::Manipulating);
    return std::nullopt;
  }
  if (!r.active_plan || r.active_plan->id != c.plan_id) {
    return Rejection{RejectReason::UnknownPlan, "no pending plan '" + c.plan_id + "'"};
  }
  if (!footstep::is_editable(r.active_plan->status)) {
    return Rejection{RejectReason::PlanLocked,
                     "plan '" + c.plan_id + "' is " + std::string(footstep::to_string(r.active_plan->status))};
  }
  if (r.mode != Mode::AwaitingApproval) {
    return Rejection{RejectReason::WrongMode, "nothing awaits approval"};
  }
  try {
    r.active_plan = footstep::approve_plan(*state_.map, *r.active_plan, world_.constraints);
  } catch (const footstep::PlanInvalid& e) {
    return Rejection{RejectReason::PlanInvalid, e.what()};
  }
  emit(EventKind::PlanStatusChanged, {{"id", c.plan_id}, {"kind", "footsteps"}, {"status", "Approved"}});
  plan_status(PlanStatus::Executing);
  r.joystick_walk = false;
  r.step_index = 0;
  set_mode(Mode::Walking);
  if (r.active_plan->steps.empty()) {
    finish_walk(PlanStatus::Done, "complete");
  } else {
    start_step();
  }
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const RejectPlan& c) {
  auto& r = state_.robot;
  const bool posture = r.pending_posture && r.pending_posture->id == c.plan_id;
  const bool plan = r.active_plan && r.active_plan->id == c.plan_id;
  if (!posture && !plan) return Rejection{RejectReason::UnknownPlan, "no pending plan '" + c.plan_id + "'"};
  if (plan && !footstep::is_editable(r.active_plan->status)) {
    return Rejection{RejectReason::PlanLocked,
                     "plan '" + c.plan_id + "' is " + std::string(footstep::to_string(r.active_plan->status))};
  }
  if (r.mode != Mode::AwaitingApproval) return Rejection{RejectReason::WrongMode, "nothing awaits approval"};
  if (posture) {
    emit(EventKind::PlanStatusChanged, {{"id", c.plan_id}, {"kind", "posture"}, {"status", "Rejected"}});
    r.pending_posture.reset();
  } else {
    plan_status(PlanStatus::Rejected);
  }
  set_mode(Mode::Idle);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const ArmTarget& c) {
  auto& r = state_.robot;
  kinematics::Pose target;
  target.position = {c.position[0], c.position[1], c.position[2]};
  if (c.orientation) {
    const auto& q = *c.orientation;
    target.orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
  }
  if (c.mode == ArmMode::GrabMarker && r.mode != Mode::Idle && r.mode != Mode::Manipulating &&
      r.mode != Mode::AwaitingApproval) {
    return Rejection{RejectReason::WrongMode, "grab marker needs the robot standing"};
  }
  auto sol = solve_arm(c.side, target, !c.orientation.has_value());
  if (!sol) return Rejection{RejectReason::IkFailed, "no arm solution for the target"};

  if (c.mode == ArmMode::Mimic) {
    for (const auto& [name, q] : sol->positions) r.setpoints.set(name, q);
    r.arm_targets[arm_index(c.side)] = target;
    if (r.mode == Mode::Idle) set_mode(Mode::Manipulating);
    return std::nullopt;
  }
  drop_pending();
  r.pending_posture = PendingPosture{next_id(), c.side, *sol};
  r.arm_targets[arm_index(c.side)] = target;
  emit(EventKind::PlanProposed, {{"id", r.pending_posture->id},
                                 {"kind", "posture"},
                                 {"side", side_name(c.side)},
                                 {"joints", sol->positions}});
  set_mode(Mode::AwaitingApproval);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const JointSlider& c) {
  if (!world_.model->find_joint(c.joint)) return Rejection{RejectReason::UnknownJoint, "unknown joint '" + c.joint + "'"};
  state_.robot.setpoints.set(c.joint, clamp_joint(c.joint, c.position));
  if (state_.robot.mode == Mode::Idle) set_mode(Mode::Manipulating);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const JointNudge& c) {
  if (!world_.model->find_joint(c.joint)) return Rejection{RejectReason::UnknownJoint, "unknown joint '" + c.joint + "'"};
  auto& sp = state_.robot.setpoints;
  sp.set(c.joint, clamp_joint(c.joint, sp.at(c.joint) + c.delta));
  if (state_.robot.mode == Mode::Idle) set_mode(Mode::Manipulating);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const Fingers& c) {
  const auto names = chain_joint_names(*world_.model, finger_chain(c.side));
  for (std::size_t i = 0; i < names.size() && i < c.closure.size(); ++i) {
    state_.robot.setpoints.set(names[i], clamp_joint(names[i], c.closure[i]));
  }
  if (state_.robot.mode == Mode::Idle) set_mode(Mode::Manipulating);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const NeckTorso& c) {
  std::set<std::string, std::less<>> allowed;
  for (auto chain : {kinematics::kTorso, kinematics::kNeck}) {
    for (auto& n : chain_joint_names(*world_.model, chain)) allowed.insert(n);
  }
  for (const auto& [name, q] : c.positions) {
    if (!allowed.count(name)) return Rejection{RejectReason::UnknownJoint, "'" + name + "' is not a neck/torso joint"};
  }
  for (const auto& [name, q] : c.positions) state_.robot.setpoints.set(name, clamp_joint(name, q));
  if (state_.robot.mode == Mode::Idle) set_mode(Mode::Manipulating);
  return std::nullopt;
}

std::optional<Simulator::Rejection> Simulator::handle(const AbortWalk&) {
  if (state_.robot.mode == Mode::Walking) finish_walk(PlanStatus::Aborted, "operator");
  return std::nullopt;
}

// --- walking ----------------------------------------------------------------

void Simulator::start_step() {
  auto& r = state_.robot;
  r.step_tick = 0;
  r.step_progress = 0.0;
  emit(EventKind::StepStarted, {{"plan", r.active_plan->id},
                                {"index", r.step_index},
                                {"step", footstep::to_json(r.active_plan->steps[r.step_index])}});
}

void Simulator::finish_walk(PlanStatus status, std::string_view why) {
  auto& r = state_.robot;
  plan_status(status, {{"reason", why}});
  r.joystick_walk = false;
  r.step_tick = 0;
  r.step_progress = 0.0;
  set_mode(Mode::Idle);
  update_base();
}

std::optional<footstep::Footstep> Simulator::joystick_step() const {
  const auto& r = state_.robot;
  const auto& c = world_.constraints;
  const auto& js = r.joystick;
  const auto& steps = r.active_plan->steps;
  const Side swing = !steps.empty()                               ? footstep::opposite(steps.back().side)
                     : (js.vy > 0.0 || (js.vy == 0.0 && js.wz > 0.0)) ? Side::Left
                                                                       : Side::Right;
  const double t = world_.params.step_duration;
  const double sign = swing == Side::Left ? 1.0 : -1.0;
  const footstep::RelativeStep want{js.vx * t, c.nominal_separation + sign * js.vy * t, js.wz * t};

  const footstep::StepTemplate* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  const auto templates = footstep::default_templates(c);
  for (const auto& tp : templates) {
    const double d = std::pow(tp.forward - want.forward, 2) + std::pow(tp.lateral - want.lateral, 2) +
                     std::pow(0.5 * (tp.yaw - want.yaw), 2);
    if (d < best_d) {
      best_d = d;
      best = &tp;
    }
  }
  const footstep::Footstep& stance = r.stance.foot(footstep::opposite(swing));
  auto cand = footstep::place_relative(stance, {best->forward, best->lateral, best->yaw});
  cand.side = swing;
  cand = footstep::snap_or_flag(*state_.map, cand, c);
  for (auto v : footstep::validate_transition(stance, cand, c)) cand.violations.push_back(v);
  if (footstep::feet_overlap(stance, cand, c)) cand.violations.push_back(footstep::Violation::FeetOverlap);
  if (!cand.violations.empty()) return std::nullopt;
  cand.valid = true;
  return cand;
}

void Simulator::check_protected(const footstep::Footstep& step) {
  auto& status = state_.tasks[static_cast<std::size_t>(Task::AvoidObstacles)];
  if (status == TaskStatus::Violated || world_.tasks.protected_cells.empty()) return;
  const std::set<footstep::Cell> guarded(world_.tasks.protected_cells.begin(), world_.tasks.protected_cells.end());
  for (const auto& cell : footstep::footprint_cells(*state_.map, step, world_.constraints)) {
    if (guarded.count(cell)) {
      status = TaskStatus::Violated;
      emit(EventKind::TaskViolated, {{"task", to_string(Task::AvoidObstacles)},
                                     {"step", state_.robot.step_index},
                                     {"cell", {cell.col, cell.row}}});
      return;
    }
  }
}

void Simulator::advance_walk() {
  auto& r = state_.robot;
  const std::uint64_t total = world_.params.ticks_per_step();
  ++r.step_tick;
  r.step_progress = static_cast<double>(r.step_tick) / static_cast<double>(total);
  if (r.step_tick < total) {
    update_base();
    return;
  }
  const footstep::Footstep step = r.active_plan->steps[r.step_index];
  r.stance.foot(step.side) = step;
  emit(EventKind::StepCompleted,
       {{"plan", r.active_plan->id}, {"index", r.step_index}, {"step", footstep::to_json(step)}});
  check_protected(step);
  ++r.step_index;
  r.step_tick = 0;
  r.step_progress = 0.0;
  if (r.joystick_walk) {
    const double silent = static_cast<double>(state_.tick_count - r.joystick.refreshed_tick) * world_.params.dt;
    if (silent > world_.params.deadman + 1e-9) {
      finish_walk(PlanStatus::Done, "deadman");
    } else if (r.joystick.zero()) {
      finish_walk(PlanStatus::Done, "stopped");
    } else if (auto next = joystick_step()) {
      r.active_plan->steps.push_back(*next);
      start_step();
    } else {
      finish_walk(PlanStatus::Aborted, "blocked");
    }
  } else if (r.step_index < r.active_plan->steps.size()) {
    start_step();
  } else {
    finish_walk(PlanStatus::Done, "complete");
  }
  update_base();
}

void Simulator::update_base() {
  auto& r = state_.robot;
  const auto& from = r.stance;
  Eigen::Vector2d mid = from.midpoint();
  double yaw = from.heading();
  double z = from.elevation();
  if (r.mode == Mode::Walking && r.active_plan && r.step_index < r.active_plan->steps.size() && r.step_tick > 0) {
    footstep::StancePose to = from;
    const auto& step = r.active_plan->steps[r.step_index];
    to.foot(step.side) = step;
    const double a = r.step_progress;
    mid += a * (to.midpoint() - mid);
    yaw = normalize_angle(yaw + a * angle_diff(to.heading(), yaw));
    z += a * (to.elevation() - z);
  }
  r.base.position = {mid.x(), mid.y(), z};
  r.base.orientation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ());
}

// --- arms and objects -------------------------------------------------------

bool Simulator::move_joints() {
  auto& r = state_.robot;
  bool moved = false;
  for (const auto& [name, target] : r.setpoints.positions) {
    const double cur = r.joints.at(name);
    if (cur == target) continue;
    const double limit = world_.model->joint(name).max_velocity * world_.params.dt;
    const double diff = target - cur;
    r.joints.set(name, std::abs(diff) <= limit ? target : cur + std::copysign(limit, diff));
    moved = true;
  }
  return moved;
}

void Simulator::couple_valves() {
  auto& r = state_.robot;
  for (Side s : {Side::Left, Side::Right}) {
    auto& hold = r.holds[arm_index(s)];
    if (!hold) continue;
    WorldObject* o = state_.find_object(hold->object_id);
    if (!o || o->kind != ObjectKind::Valve) continue;
    const double roll = r.joints.at(world_.model->arm_joint_names(arm_chain(s))[6]);
    const double delta = roll - hold->wrist_roll;
    if (delta == 0.0) continue;
    hold->wrist_roll = roll;
    o->rotation += delta;
    o->angle = normalize_angle(o->angle + delta);
    emit(EventKind::ValveTurned,
         {{"object", o->id}, {"side", side_name(s)}, {"delta", delta}, {"angle", o->angle}, {"rotation", o->rotation}});
  }
}

void Simulator::carry_boxes() {
  auto& r = state_.robot;
  for (Side s : {Side::Left, Side::Right}) {
    const auto& hold = r.holds[arm_index(s)];
    if (!hold) continue;
    WorldObject* o = state_.find_object(hold->object_id);
    if (!o || o->kind != ObjectKind::GraspableBox) continue;
    o->pose = kinematics::Pose::from_isometry(palm(s).to_isometry() * hold->palm_to_object);
  }
}

void Simulator::settle(WorldObject& box) const {
  const double x = box.pose.position.x(), y = box.pose.position.y();
  double support = 0.0;
  if (auto cell = state_.map->cell_at({x, y})) support = state_.map->elevation(*cell);
  for (const auto& o : state_.objects) {
    if (o.kind == ObjectKind::Table && footprint_contains(o, x, y)) support = std::max(support, o.size.z());
  }
  box.pose.position.z() = support + 0.5 * box.size.z();
  box.pose.orientation = Eigen::AngleAxisd(yaw_of(box.pose.orientation), Eigen::Vector3d::UnitZ());
}

void Simulator::update_grasps() {
  auto& r = state_.robot;
  const auto& p = world_.params;
  for (Side s : {Side::Left, Side::Right}) {
    double closure = 0.0;
    const auto fingers = chain_joint_names(*world_.model, finger_chain(s));
    for (const auto& n : fingers) closure += r.joints.at(n);
    closure /= static_cast<double>(fingers.size());
    auto& hold = r.holds[arm_index(s)];

    if (!hold && closure >= p.grasp_close) {
      const kinematics::Pose hand = palm(s);
      WorldObject* pick = nullptr;
      double best = p.grasp_distance;
      for (auto& o : state_.objects) {
        if (o.grasped_by || (o.kind != ObjectKind::GraspableBox && o.kind != ObjectKind::Valve)) continue;
        const double d = (o.pose.position - hand.position).norm();
        if (d <= best) {
          best = d;
          pick = &o;
        }
      }
      if (!pick) continue;
      pick->grasped_by = s;
      hold = Hold{pick->id, hand.to_isometry().inverse() * pick->pose.to_isometry(),
                  r.joints.at(world_.model->arm_joint_names(arm_chain(s))[6])};
      emit(EventKind::GraspAttached, {{"side", side_name(s)}, {"object", pick->id}, {"distance", best}});
    } else if (hold && closure < p.grasp_release) {
      WorldObject* o = state_.find_object(hold->object_id);
      if (o) {
        o->grasped_by.reset();
        if (o->kind == ObjectKind::GraspableBox) settle(*o);
      }
      emit(EventKind::GraspReleased, {{"side", side_name(s)}, {"object", hold->object_id}});
      hold.reset();
    }
  }
}

void Simulator::update_tasks() {
  const auto& tp = world_.tasks;
  const auto& r = state_.robot;
  auto complete = [this](Task t) {
    auto& status = state_.tasks[static_cast<std::size_t>(t)];
    if (status != TaskStatus::Incomplete) return;
    status = TaskStatus::Complete;
    emit(EventKind::TaskCompleted, {{"task", to_string(t)}});
  };

  if (tp.walk_goal && r.mode != Mode::Walking) {
    const Eigen::Vector2d d = r.base.position.head<2>() - Eigen::Vector2d(tp.walk_goal->x, tp.walk_goal->y);
    if (d.norm() <= tp.position_tolerance &&
        std::abs(angle_diff(yaw_of(r.base.orientation), tp.walk_goal->yaw)) <= tp.yaw_tolerance) {
      complete(Task::WalkToPose);
    }
  }
  if (state_.task(Task::WalkToPose) == TaskStatus::Complete) complete(Task::AvoidObstacles);

  if (const WorldObject* box = state_.find_object(tp.box_id); box && box->grasped_by) {
    const WorldObject* table = state_.find_object(tp.table_id);
    const double top = table ? table->size.z() : 0.0;
    if (box->pose.position.z() - 0.5 * box->size.z() >= top + tp.lift_height) complete(Task::PickUpBox);
  }
  if (const WorldObject* valve = state_.find_object(tp.valve_id);
      valve && std::abs(valve->rotation) >= tp.valve_target) {
    complete(Task::TurnValve);
  }
}

std::vector<Event> Simulator::tick() {
  std::vector<Event> events;
  sink_ = &events;
  ++state_.tick_count;
  auto& r = state_.robot;

  bool moving = move_joints();
  if (r.mode == Mode::Walking) {
    advance_walk();
    moving = true;
  }
  couple_valves();
  carry_boxes();
  update_grasps();

  const auto& p = world_.params;
  state_.battery =
      std::max(0.0, state_.battery - (p.battery_idle_rate + (moving ? p.battery_motion_rate : 0.0)) * p.dt);
  if (!state_.battery_low_reported && state_.battery < p.battery_low) {
    state_.battery_low_reported = true;
    emit(EventKind::BatteryLow, {{"battery", state_.battery}});
  }

  const bool settled = r.joints == r.setpoints;
  if (r.mode == Mode::Idle && !settled) set_mode(Mode::Manipulating);
  if (r.mode == Mode::Manipulating && settled) set_mode(Mode::Idle);

  update_tasks();
  sink_ = nullptr;
  return events;
}

}  // namespace teleop::world
