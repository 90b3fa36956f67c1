#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/world/types.hpp"

namespace teleop::world {

struct ObjectSnapshot {
  std::string id;
  ObjectKind kind = ObjectKind::SmallObstacle;
  std::array<double, 3> position{};
  std::array<double, 4> orientation{1, 0, 0, 0};  // w, x, y, z
  std::array<double, 3> size{};
  double angle = 0.0;
  double rotation = 0.0;
  double handle_radius = 0.0;
  std::optional<Side> grasped_by;
  friend bool operator==(const ObjectSnapshot&, const ObjectSnapshot&) = default;
};

/// Read-only view of the world for clients.
struct Telemetry {
  std::uint64_t tick = 0;
  double time = 0.0;
  Mode mode = Mode::Idle;
  std::array<double, 4> base{};  // x, y, z, yaw
  footstep::StancePose stance;
  std::map<std::string, double> joints;
  double battery = 100.0;
  std::optional<footstep::FootstepPlan> plan;
  std::size_t step_index = 0;
  double step_progress = 0.0;
  std::optional<PendingPosture> posture;
  std::map<std::string, TaskStatus> tasks;
  std::vector<ObjectSnapshot> objects;
  std::array<std::optional<std::string>, 2> holding;  // left, right

  friend bool operator==(const Telemetry&, const Telemetry&) = default;
};

Telemetry snapshot(const WorldState& state, double dt);

nlohmann::json to_json(const Telemetry& t);
Telemetry telemetry_from_json(const nlohmann::json& j);

}  // namespace teleop::world
