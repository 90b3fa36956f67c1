#include "teleop/world/telemetry.hpp"

#include <cmath>

#include "teleop/common/json_fields.hpp"

namespace teleop::world {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> read_optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_string()) throw ParseError("telemetry: expected a string or null");
  return j.get<std::string>();
}

json posture_json(const PendingPosture& p) {
  return json{{"id", p.id}, {"side", side_name(p.side)}, {"joints", p.joints.positions}};
}

PendingPosture posture_from_json(const json& j) {
  PendingPosture p;
  p.id = jf::require_string(j, "id", "posture");
  const auto side = side_from_name(jf::require_string(j, "side", "posture"));
  if (!side) throw ParseError("posture: bad side");
  p.side = *side;
  for (const auto& [k, v] : jf::require(j, "joints", "posture").items()) p.joints.set(k, v.get<double>());
  return p;
}

}  // namespace

Telemetry snapshot(const WorldState& s, double dt) {
  Telemetry t;
  t.tick = s.tick_count;
  t.time = static_cast<double>(s.tick_count) * dt;
  t.mode = s.robot.mode;
  const auto& b = s.robot.base;
  const Eigen::Vector3d fwd = b.orientation * Eigen::Vector3d::UnitX();
  t.base = {b.position.x(), b.position.y(), b.position.z(), std::atan2(fwd.y(), fwd.x())};
  t.stance = s.robot.stance;
  for (const auto& [k, v] : s.robot.joints.positions) t.joints[k] = v;
  t.battery = s.battery;
  t.plan = s.robot.active_plan;
  t.step_index = s.robot.step_index;
  t.step_progress = s.robot.step_progress;
  t.posture = s.robot.pending_posture;
  for (Task task : kTasks) t.tasks[std::string(to_string(task))] = s.task(task);
  for (const auto& o : s.objects) {
    ObjectSnapshot os;
    os.id = o.id;
    os.kind = o.kind;
    os.position = {o.pose.position.x(), o.pose.position.y(), o.pose.position.z()};
    const auto& q = o.pose.orientation;
    os.orientation = {q.w(), q.x(), q.y(), q.z()};
    os.size = {o.size.x(), o.size.y(), o.size.z()};
    os.angle = o.angle;
    os.rotation = o.rotation;
    os.handle_radius = o.handle_radius;
    os.grasped_by = o.grasped_by;
    t.objects.push_back(std::move(os));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    if (s.robot.holds[i]) t.holding[i] = s.robot.holds[i]->object_id;
  }
  return t;
}

json to_json(const Telemetry& t) {
  json objects = json::array();
  for (const auto& o : t.objects) {
    objects.push_back(json{{"id", o.id},
                           {"kind", to_string(o.kind)},
                           {"position", o.position},
                           {"orientation", o.orientation},
                           {"size", o.size},
                           {"angle", o.angle},
                           {"rotation", o.rotation},
                           {"handle_radius", o.handle_radius},
                           {"grasped_by", o.grasped_by ? json(side_name(*o.grasped_by)) : json(nullptr)}});
  }
  json tasks = json::object();
  for (const auto& [k, v] : t.tasks) tasks[k] = to_string(v);
  return json{{"tick", t.tick},
              {"time", t.time},
              {"mode", to_string(t.mode)},
              {"base", {{"x", t.base[0]}, {"y", t.base[1]}, {"z", t.base[2]}, {"yaw", t.base[3]}}},
              {"stance", footstep::to_json(t.stance)},
              {"joints", t.joints},
              {"battery", t.battery},
              {"plan", t.plan ? footstep::to_json(*t.plan) : json(nullptr)},
              {"step_index", t.step_index},
              {"step_progress", t.step_progress},
              {"posture", t.posture ? posture_json(*t.posture) : json(nullptr)},
              {"tasks", tasks},
              {"objects", objects},
              {"holding", {{"left", optional_string(t.holding[0])}, {"right", optional_string(t.holding[1])}}}};
}

Telemetry telemetry_from_json(const json& j) {
  const char* where = "telemetry";
  if (!j.is_object()) throw ParseError("telemetry: expected an object");
  Telemetry t;
  t.tick = jf::require(j, "tick", where).get<std::uint64_t>();
  t.time = jf::require_number(j, "time", where);
  const auto mode = mode_from_string(jf::require_string(j, "mode", where));
  if (!mode) throw ParseError("telemetry: unknown mode");
  t.mode = *mode;
  const json& base = jf::require(j, "base", where);
  t.base = {jf::require_number(base, "x", where), jf::require_number(base, "y", where),
            jf::require_number(base, "z", where), jf::require_number(base, "yaw", where)};
  t.stance = footstep::stance_from_json(jf::require(j, "stance", where));
  for (const auto& [k, v] : jf::require(j, "joints", where).items()) t.joints[k] = v.get<double>();
  t.battery = jf::require_number(j, "battery", where);
  if (const json& p = jf::require(j, "plan", where); !p.is_null()) t.plan = footstep::plan_from_json(p);
  t.step_index = jf::require(j, "step_index", where).get<std::size_t>();
  t.step_progress = jf::require_number(j, "step_progress", where);
  if (const json& p = jf::require(j, "posture", where); !p.is_null()) t.posture = posture_from_json(p);
  for (const auto& [k, v] : jf::require(j, "tasks", where).items()) {
    const auto st = task_status_from_string(v.get<std::string>());
    if (!st) throw ParseError("telemetry: unknown task status");
    t.tasks[k] = *st;
  }
  for (const auto& o : jf::require(j, "objects", where)) {
    ObjectSnapshot os;
    os.id = jf::require_string(o, "id", where);
    const auto kind = object_kind_from_string(jf::require_string(o, "kind", where));
    if (!kind) throw ParseError("telemetry: unknown object kind");
    os.kind = *kind;
    os.position = jf::require_array<3>(o, "position", where);
    os.orientation = jf::require_array<4>(o, "orientation", where);
    os.size = jf::require_array<3>(o, "size", where);
    os.angle = jf::require_number(o, "angle", where);
    os.rotation = jf::require_number(o, "rotation", where);
    os.handle_radius = jf::require_number(o, "handle_radius", where);
    if (const json& g = jf::require(o, "grasped_by", where); !g.is_null()) os.grasped_by = side_from_name(g.get<std::string>());
    t.objects.push_back(std::move(os));
  }
  const json& holding = jf::require(j, "holding", where);
  t.holding[0] = read_optional_string(jf::require(holding, "left", where));
  t.holding[1] = read_optional_string(jf::require(holding, "right", where));
  return t;
}

}  // namespace teleop::world
