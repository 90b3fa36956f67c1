#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace teleop::world {

enum class EventKind {
  PlanProposed,
  PlanStatusChanged,
  StepStarted,
  StepCompleted,
  GraspAttached,
  GraspReleased,
  ValveTurned,
  TaskCompleted,
  TaskViolated,
  CommandRejected,
  BatteryLow,
  ModeChanged,
};

std::string_view to_string(EventKind k);
std::optional<EventKind> event_kind_from_string(std::string_view s);

enum class RejectReason {
  WrongMode,
  UnknownPlan,
  IkFailed,
  UnknownJoint,
  PlanInvalid,
  PlanLocked,
  IndexOutOfRange,
  NoPath,
  InvalidStart,
};

std::string_view to_string(RejectReason r);

struct Event {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;  // global emission order
  EventKind kind = EventKind::ModeChanged;
  nlohmann::json payload = nlohmann::json::object();

  friend bool operator==(const Event&, const Event&) = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

/// Compact, key-sorted single-line encoding; the unit of the determinism hash.
std::string canonical_line(const Event& e);

}  // namespace teleop::world
