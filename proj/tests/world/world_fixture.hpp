#pragma once

#include <algorithm>
#include <random>
#include <set>
#include <utility>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kinematics/model_fixture.hpp"
#include "test_data.hpp"
#include "teleop/world/simulator.hpp"
#include "teleop/world/world_file.hpp"

namespace teleop::test {

using namespace teleop::world;

inline std::string tasks_world_path() { return data_path("worlds/tasks.world.json"); }

inline const World& tasks_world() {
  static const World w = load_world_file(tasks_world_path());
  return w;
}

/// Flat world with an embedded model and no objects; start at (0.5, 1.0) facing +x.
inline nlohmann::json flat_world_doc(int width = 80, int height = 40) {
  return {{"format", "teleop-world/1"},
          {"name", "flat"},
          {"robot_model", default_model_document()},
          {"map", {{"resolution", 0.05}, {"width", width}, {"height", height}, {"fill", 0.0}}},
          {"start", {{"x", 0.5}, {"y", 1.0}, {"yaw", 0.0}}},
          {"objects", nlohmann::json::array()}};
}

inline World flat_world(nlohmann::json doc = flat_world_doc()) { return load_world(doc.dump()); }

inline std::vector<Event> run_ticks(Simulator& sim, std::size_t n) {
  std::vector<Event> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto ev = sim.tick();
    out.insert(out.end(), ev.begin(), ev.end());
  }
  return out;
}

inline std::size_t count_kind(const std::vector<Event>& events, EventKind k) {
  return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [k](const Event& e) { return e.kind == k; }));
}

inline std::string pending_id(const Simulator& sim) {
  const auto& r = sim.state().robot;
  if (r.pending_posture) return r.pending_posture->id;
  return r.active_plan ? r.active_plan->id : std::string();
}

/// Mode graph edges, written out independently of the library's table.
inline const std::set<std::pair<Mode, Mode>>& declared_mode_edges() {
  static const std::set<std::pair<Mode, Mode>> edges{
      {Mode::Idle, Mode::Planning},
      {Mode::Idle, Mode::Walking},
      {Mode::Idle, Mode::Manipulating},
      {Mode::Idle, Mode::AwaitingApproval},
      {Mode::Planning, Mode::AwaitingApproval},
      {Mode::Planning, Mode::Idle},
      {Mode::Planning, Mode::Manipulating},
      {Mode::AwaitingApproval, Mode::Walking},
      {Mode::AwaitingApproval, Mode::Manipulating},
      {Mode::AwaitingApproval, Mode::Idle},
      {Mode::AwaitingApproval, Mode::Planning},
      {Mode::Walking, Mode::Idle},
      {Mode::Manipulating, Mode::Idle},
      {Mode::Manipulating, Mode::Planning},
      {Mode::Manipulating, Mode::AwaitingApproval},
      {Mode::Manipulating, Mode::Walking},
  };
  return edges;
}

/// Plausible operator input near the robot: mostly valid, sometimes not.
inline Command operator_command(const Simulator& sim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto& r = sim.state().robot;
  const Eigen::Vector2d mid = r.stance.midpoint();
  const std::string pending = r.pending_posture ? r.pending_posture->id : r.active_plan ? r.active_plan->id : "plan-0";
  const std::vector<std::string> joints{"leftShoulderPitch", "rightElbowPitch", "leftWristRoll", "neckYaw",
                                        "torsoYaw",          "rightWristRoll",  "leftForearmYaw"};
  const Side side = rng() % 2 ? Side::Left : Side::Right;
  switch (rng() % 12) {
    case 0: return SetNavGoal{mid.x() + 1.2 * u(rng), mid.y() + 0.8 * u(rng), u(rng)};
    case 1:
    case 2: return ApprovePlan{rng() % 8 ? pending : "plan-x"};
    case 3: return RejectPlan{pending};
    case 4: return JoystickCommand{0.3 * u(rng), 0.15 * u(rng), 0.3 * u(rng)};
    case 5: return EditFootstep{pending, static_cast<std::size_t>(rng() % 4), {mid.x() + 0.4 * u(rng), mid.y() + 0.3 * u(rng), 0.3 * u(rng)}};
    case 6: {
      const Eigen::Vector3d p = r.base.position + Eigen::Vector3d(0.35 + 0.1 * u(rng), (side == Side::Left ? 0.25 : -0.25) + 0.1 * u(rng), 1.1 + 0.15 * u(rng));
      return ArmTarget{side, {p.x(), p.y(), p.z()}, std::nullopt, rng() % 3 ? ArmMode::Mimic : ArmMode::GrabMarker};
    }
    case 7: return JointSlider{joints[rng() % joints.size()], 2.0 * u(rng)};
    case 8: return JointNudge{joints[rng() % joints.size()], 0.5 * u(rng)};
    case 9: {
      const double c = 0.5 + 0.5 * u(rng);
      return Fingers{side, {c, c, c, c}};
    }
    case 10: return NeckTorso{{{"neckYaw", u(rng)}, {"torsoPitch", 0.2 * u(rng)}}};
    default: return AbortWalk{};
  }
}

/// Random well-formed command over the whole variant set.
inline Command random_command(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_int_distribution<int> pick(0, 10);
  auto side = [&] { return rng() % 2 ? Side::Left : Side::Right; };
  auto id = [&] { return "plan-" + std::to_string(rng() % 50); };
  switch (pick(rng)) {
    case 0: return SetNavGoal{u(rng), u(rng), u(rng), rng() % 2 ? GoalSource::Pointer : GoalSource::Minimap};
    case 1: return JoystickCommand{u(rng), u(rng), u(rng)};
    case 2: return EditFootstep{id(), static_cast<std::size_t>(rng() % 20), {u(rng), u(rng), u(rng)}};
    case 3: return ApprovePlan{id()};
    case 4: return RejectPlan{id()};
    case 5: {
      ArmTarget a{side(), {u(rng), u(rng), u(rng)}, std::nullopt, rng() % 2 ? ArmMode::Mimic : ArmMode::GrabMarker};
      if (rng() % 2) a.orientation = std::array<double, 4>{1.0, 0.0, 0.0, 0.0};
      return a;
    }
    case 6: return JointSlider{"j" + std::to_string(rng() % 9), u(rng)};
    case 7: return JointNudge{"leftWristRoll", u(rng)};
    case 8: return Fingers{side(), {u(rng), u(rng), u(rng), u(rng)}};
    case 9: return NeckTorso{{{"neckYaw", u(rng)}, {"torsoYaw", u(rng)}}};
    default: return AbortWalk{};
  }
}

}  // namespace teleop::test
