#include "teleop/world/event.hpp"

#include <array>
#include <utility>

#include "teleop/common/json_fields.hpp"

namespace teleop::world {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 12> kKinds{{
    {EventKind::PlanProposed, "PlanProposed"},
    {EventKind::PlanStatusChanged, "PlanStatusChanged"},
    {EventKind::StepStarted, "StepStarted"},
    {EventKind::StepCompleted, "StepCompleted"},
    {EventKind::GraspAttached, "GraspAttached"},
    {EventKind::GraspReleased, "GraspReleased"},
    {EventKind::ValveTurned, "ValveTurned"},
    {EventKind::TaskCompleted, "TaskCompleted"},
    {EventKind::TaskViolated, "TaskViolated"},
    {EventKind::CommandRejected, "CommandRejected"},
    {EventKind::BatteryLow, "BatteryLow"},
    {EventKind::ModeChanged, "ModeChanged"},
}};

constexpr std::array<std::pair<RejectReason, std::string_view>, 9> kReasons{{
    {RejectReason::WrongMode, "WrongMode"},
    {RejectReason::UnknownPlan, "UnknownPlan"},
    {RejectReason::IkFailed, "IkFailed"},
    {RejectReason::UnknownJoint, "UnknownJoint"},
    {RejectReason::PlanInvalid, "PlanInvalid"},
    {RejectReason::PlanLocked, "PlanLocked"},
    {RejectReason::IndexOutOfRange, "IndexOutOfRange"},
    {RejectReason::NoPath, "NoPath"},
    {RejectReason::InvalidStart, "InvalidStart"},
}};

}  // namespace

std::string_view to_string(EventKind k) {
  for (const auto& [v, n] : kKinds)
    if (v == k) return n;
  return "?";
}

std::optional<EventKind> event_kind_from_string(std::string_view s) {
  for (const auto& [v, n] : kKinds)
    if (n == s) return v;
  return std::nullopt;
}

std::string_view to_string(RejectReason r) {
  for (const auto& [v, n] : kReasons)
    if (v == r) return n;
  return "?";
}

json to_json(const Event& e) {
  return json{{"tick", e.tick}, {"seq", e.seq}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

Event event_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("event: expected an object");
  Event e;
  const json& tick = jf::require(j, "tick", "event");
  const json& seq = jf::require(j, "seq", "event");
  if (!tick.is_number_unsigned() || !seq.is_number_unsigned()) {
    throw ParseError("event: tick and seq must be non-negative integers");
  }
  e.tick = tick.get<std::uint64_t>();
  e.seq = seq.get<std::uint64_t>();
  const auto kind = event_kind_from_string(jf::require_string(j, "kind", "event"));
  if (!kind) throw ParseError("event: unknown kind");
  e.kind = *kind;
  e.payload = j.contains("payload") ? j.at("payload") : json::object();
  return e;
}

std::string canonical_line(const Event& e) { return to_json(e).dump(); }

}  // namespace teleop::world
