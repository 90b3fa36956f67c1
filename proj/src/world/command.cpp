#include "teleop/world/command.hpp"

#include <cmath>

#include "teleop/common/json_fields.hpp"

namespace teleop::world {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view source_name(GoalSource s) { return s == GoalSource::Minimap ? "Minimap" : "Pointer"; }
std::string_view arm_mode_name(ArmMode m) { return m == ArmMode::GrabMarker ? "GrabMarker" : "Mimic"; }

Side require_side(const json& j, std::string_view where) {
  const auto s = side_from_name(jf::require_string(j, "side", where));
  if (!s) throw ParseError(std::string(where) + ": side must be 'left' or 'right'");
  return *s;
}

std::string require_nonempty(const json& j, std::string_view key, std::string_view where) {
  auto s = jf::require_string(j, key, where);
  if (s.empty()) throw ParseError(std::string(where) + ": '" + std::string(key) + "' must not be empty");
  return s;
}

}  // namespace

std::string_view command_type(const Command& c) {
  return std::visit(overloaded{
                        [](const SetNavGoal&) { return std::string_view("SetNavGoal"); },
                        [](const JoystickCommand&) { return std::string_view("Joystick"); },
                        [](const EditFootstep&) { return std::string_view("EditFootstep"); },
                        [](const ApprovePlan&) { return std::string_view("ApprovePlan"); },
                        [](const RejectPlan&) { return std::string_view("RejectPlan"); },
                        [](const ArmTarget&) { return std::string_view("ArmTarget"); },
                        [](const JointSlider&) { return std::string_view("JointSlider"); },
                        [](const JointNudge&) { return std::string_view("JointNudge"); },
                        [](const Fingers&) { return std::string_view("Fingers"); },
                        [](const NeckTorso&) { return std::string_view("NeckTorso"); },
                        [](const AbortWalk&) { return std::string_view("AbortWalk"); },
                    },
                    c);
}

json to_json(const Command& c) {
  json j = std::visit(
      overloaded{
          [](const SetNavGoal& g) {
            return json{{"x", g.x}, {"y", g.y}, {"yaw", g.yaw}, {"source", source_name(g.source)}};
          },
          [](const JoystickCommand& g) { return json{{"vx", g.vx}, {"vy", g.vy}, {"wz", g.wz}}; },
          [](const EditFootstep& e) {
            return json{{"plan_id", e.plan_id}, {"index", e.index}, {"pose", footstep::to_json(e.pose)}};
          },
          [](const ApprovePlan& a) { return json{{"plan_id", a.plan_id}}; },
          [](const RejectPlan& r) { return json{{"plan_id", r.plan_id}}; },
          [](const ArmTarget& a) {
            json out{{"side", side_name(a.side)}, {"position", a.position}, {"mode", arm_mode_name(a.mode)}};
            if (a.orientation) out["orientation"] = *a.orientation;
            return out;
          },
          [](const JointSlider& s) { return json{{"joint", s.joint}, {"position", s.position}}; },
          [](const JointNudge& s) { return json{{"joint", s.joint}, {"delta", s.delta}}; },
          [](const Fingers& f) { return json{{"side", side_name(f.side)}, {"closure", f.closure}}; },
          [](const NeckTorso& n) { return json{{"positions", n.positions}}; },
          [](const AbortWalk&) { return json::object(); },
      },
      c);
  j["type"] = command_type(c);
  return j;
}

Command command_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("command: expected an object");
  const std::string type = jf::require_string(j, "type", "command");
  const std::string where = "command " + type;
  if (type == "SetNavGoal") {
    SetNavGoal g{jf::require_number(j, "x", where), jf::require_number(j, "y", where),
                 jf::require_number(j, "yaw", where), GoalSource::Pointer};
    if (j.contains("source")) {
      const auto s = jf::require_string(j, "source", where);
      if (s == "Minimap") {
        g.source = GoalSource::Minimap;
      } else if (s != "Pointer") {
        throw ParseError(where + ": source must be Pointer or Minimap");
      }
    }
    return g;
  }
  if (type == "Joystick") {
    return JoystickCommand{jf::require_number(j, "vx", where), jf::number_or(j, "vy", 0.0, where),
                           jf::number_or(j, "wz", 0.0, where)};
  }
  if (type == "EditFootstep") {
    const int index = jf::require_int(j, "index", where);
    if (index < 0) throw ParseError(where + ": index must be >= 0");
    const json& pose = jf::require(j, "pose", where);
    return EditFootstep{require_nonempty(j, "plan_id", where), static_cast<std::size_t>(index),
                        {jf::require_number(pose, "x", where), jf::require_number(pose, "y", where),
                         jf::require_number(pose, "yaw", where)}};
  }
  if (type == "ApprovePlan") return ApprovePlan{require_nonempty(j, "plan_id", where)};
  if (type == "RejectPlan") return RejectPlan{require_nonempty(j, "plan_id", where)};
  if (type == "ArmTarget") {
    ArmTarget a;
    a.side = require_side(j, where);
    a.position = jf::require_array<3>(j, "position", where);
    if (j.contains("orientation") && !j.at("orientation").is_null()) {
      auto q = jf::require_array<4>(j, "orientation", where);
      const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
      if (!(n > 1e-9)) throw ParseError(where + ": orientation quaternion has zero norm");
      for (auto& v : q) v /= n;
      a.orientation = q;
    }
    const std::string mode = j.contains("mode") ? jf::require_string(j, "mode", where) : "Mimic";
    if (mode == "GrabMarker") {
      a.mode = ArmMode::GrabMarker;
    } else if (mode != "Mimic") {
      throw ParseError(where + ": mode must be Mimic or GrabMarker");
    }
    return a;
  }
  if (type == "JointSlider") return JointSlider{require_nonempty(j, "joint", where), jf::require_number(j, "position", where)};
  if (type == "JointNudge") return JointNudge{require_nonempty(j, "joint", where), jf::require_number(j, "delta", where)};
  if (type == "Fingers") return Fingers{require_side(j, where), jf::require_array<4>(j, "closure", where)};
  if (type == "NeckTorso") {
    const json& p = jf::require(j, "positions", where);
    if (!p.is_object() || p.empty()) throw ParseError(where + ": positions must be a non-empty object");
    NeckTorso n;
    for (const auto& [name, v] : p.items()) {
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        throw ParseError(where + ": position of '" + name + "' must be a finite number");
      }
      n.positions[name] = v.get<double>();
    }
    return n;
  }
  if (type == "AbortWalk") return AbortWalk{};
  throw ParseError("command: unknown type '" + type + "'");
}

}  // namespace teleop::world
