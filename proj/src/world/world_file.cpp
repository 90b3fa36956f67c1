#include "teleop/world/world_file.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "teleop/common/angles.hpp"
#include "teleop/common/json_fields.hpp"
#include "teleop/footstep/planner.hpp"
#include "teleop/footstep/terrain.hpp"

namespace teleop::world {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

constexpr std::string_view kFormat = "teleop-world/1";

double yaw_of(const kinematics::Pose& p) {
  const Eigen::Vector3d f = p.orientation * Eigen::Vector3d::UnitX();
  return std::atan2(f.y(), f.x());
}

WorldObject parse_object(const json& j) {
  const std::string where = "world object";
  WorldObject o;
  o.id = jf::require_string(j, "id", where);
  if (o.id.empty()) throw ParseError("world object: empty id");
  const auto kind = object_kind_from_string(jf::require_string(j, "kind", where));
  if (!kind) throw ParseError("world object '" + o.id + "': unknown kind");
  o.kind = *kind;
  const json& pos = jf::require(j, "position", where);
  if (!pos.is_array() || (pos.size() != 2 && pos.size() != 3)) {
    throw ParseError("world object '" + o.id + "': position must be [x, y] or [x, y, z]");
  }
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (!pos[i].is_number()) throw ParseError("world object '" + o.id + "': position must be numeric");
    o.pose.position[static_cast<Eigen::Index>(i)] = pos[i].get<double>();
  }
  if ((o.kind == ObjectKind::GraspableBox || o.kind == ObjectKind::Valve) && pos.size() != 3) {
    throw ParseError("world object '" + o.id + "': boxes and valves need a 3-D position");
  }
  o.pose.orientation = Eigen::AngleAxisd(jf::number_or(j, "yaw", 0.0, where), Eigen::Vector3d::UnitZ());
  if (o.kind != ObjectKind::Valve) {
    const auto size = jf::require_array<3>(j, "size", where);
    o.size = {size[0], size[1], size[2]};
    if (!(o.size.minCoeff() > 0.0)) throw WorldError("world object '" + o.id + "': size must be positive");
  }
  if (o.kind == ObjectKind::Valve) {
    o.handle_radius = jf::number_or(j, "handle_radius", 0.15, where);
    o.angle = normalize_angle(jf::number_or(j, "angle", 0.0, where));
    if (!(o.handle_radius > 0.0)) throw WorldError("valve '" + o.id + "': handle_radius must be positive");
  }
  return o;
}

json object_json(const WorldObject& o) {
  json j{{"id", o.id},
         {"kind", to_string(o.kind)},
         {"position", {o.pose.position.x(), o.pose.position.y(), o.pose.position.z()}},
         {"yaw", yaw_of(o.pose)}};
  if (o.kind == ObjectKind::Valve) {
    j["handle_radius"] = o.handle_radius;
    j["angle"] = o.angle;
  } else {
    j["size"] = {o.size.x(), o.size.y(), o.size.z()};
  }
  return j;
}

std::string find_id(const std::vector<WorldObject>& objects, const json& tasks, std::string_view key, ObjectKind kind) {
  if (tasks.contains(key)) {
    const std::string id = jf::require_string(tasks, key, "world tasks");
    for (const auto& o : objects) {
      if (o.id == id) {
        if (o.kind != kind) throw WorldError("task object '" + id + "' has the wrong kind");
        return id;
      }
    }
    throw WorldError("task object '" + id + "' is not in the world");
  }
  for (const auto& o : objects)
    if (o.kind == kind) return o.id;
  return {};
}

}  // namespace

bool footprint_contains(const WorldObject& o, double x, double y) {
  const double yaw = yaw_of(o.pose);
  const double dx = x - o.pose.position.x(), dy = y - o.pose.position.y();
  const double u = std::cos(yaw) * dx + std::sin(yaw) * dy;
  const double v = -std::sin(yaw) * dx + std::cos(yaw) * dy;
  return std::abs(u) <= 0.5 * o.size.x() + 1e-9 && std::abs(v) <= 0.5 * o.size.y() + 1e-9;
}

std::vector<footstep::Cell> object_cells(const footstep::HeightMap& map, const WorldObject& o) {
  std::vector<footstep::Cell> cells;
  const double reach = 0.5 * o.size.head<2>().norm();
  const Eigen::Vector2d center = o.pose.position.head<2>();
  const Eigen::Vector2d span = Eigen::Vector2d::Constant(reach);
  const auto lo = map.cell_at(map.extent_min().cwiseMax(center - span));
  const auto hi = map.cell_at(map.extent_max().cwiseMin(center + span));
  if (lo && hi) {
    for (int row = lo->row; row <= hi->row; ++row) {
      for (int col = lo->col; col <= hi->col; ++col) {
        const Eigen::Vector2d c = map.cell_center({col, row});
        if (footprint_contains(o, c.x(), c.y())) cells.push_back({col, row});
      }
    }
  }
  if (cells.empty()) {
    if (auto c = map.cell_at(o.pose.position.head<2>())) cells.push_back(*c);
  }
  return cells;
}

World load_world(std::string_view document, const LoadOptions& options) {
  json doc = jf::parse_document(document, "world");
  const char* where = "world";
  if (!doc.is_object()) throw ParseError("world: expected an object");
  if (jf::require_string(doc, "format", where) != kFormat) {
    throw ParseError("world: unsupported format (expected " + std::string(kFormat) + ")");
  }
  World w;
  w.name = doc.contains("name") ? jf::require_string(doc, "name", where) : std::string("world");

  // Robot model: embedded object or a path relative to the world file.
  const json& model_ref = jf::require(doc, "robot_model", where);
  if (model_ref.is_string()) {
    std::filesystem::path p = model_ref.get<std::string>();
    if (p.is_relative() && !options.base_dir.empty()) p = std::filesystem::path(options.base_dir) / p;
    const std::string text = jf::read_file(p.string());
    w.model = std::make_shared<kinematics::RobotModel>(kinematics::load_robot_model(text));
    doc["robot_model"] = jf::parse_document(text, "robot model");
  } else {
    w.model = std::make_shared<kinematics::RobotModel>(kinematics::load_robot_model(model_ref.dump()));
  }

  auto map = footstep::height_map_from_json(jf::require(doc, "map", where));
  if (doc.contains("constraints")) w.constraints = footstep::constraints_from_json(doc.at("constraints"));
  footstep::validate(w.constraints);

  if (doc.contains("sim")) {
    const json& s = doc.at("sim");
    auto& p = w.params;
    p.dt = jf::number_or(s, "dt", p.dt, "world sim");
    p.step_duration = jf::number_or(s, "step_duration", p.step_duration, "world sim");
    p.deadman = jf::number_or(s, "deadman", p.deadman, "world sim");
    p.grasp_distance = jf::number_or(s, "grasp_distance", p.grasp_distance, "world sim");
    p.grasp_close = jf::number_or(s, "grasp_close", p.grasp_close, "world sim");
    p.grasp_release = jf::number_or(s, "grasp_release", p.grasp_release, "world sim");
    p.battery_idle_rate = jf::number_or(s, "battery_idle_rate", p.battery_idle_rate, "world sim");
    p.battery_motion_rate = jf::number_or(s, "battery_motion_rate", p.battery_motion_rate, "world sim");
    p.battery_low = jf::number_or(s, "battery_low", p.battery_low, "world sim");
    const double budget = jf::number_or(s, "planner_budget", static_cast<double>(p.planner_budget), "world sim");
    if (!(budget >= 1.0) || budget > 1e8) throw WorldError("planner_budget must be between 1 and 1e8");
    p.planner_budget = static_cast<std::size_t>(budget);
  }
  validate(w.params);

  const json& start_j = jf::require(doc, "start", where);
  const footstep::Goal2D start = footstep::goal_from_json(start_j);

  std::vector<WorldObject> objects;
  if (doc.contains("objects")) {
    const json& arr = doc.at("objects");
    if (!arr.is_array()) throw ParseError("world: 'objects' must be an array");
    for (const auto& o : arr) objects.push_back(parse_object(o));
  }

  const json tasks_j = doc.contains("tasks") ? doc.at("tasks") : json::object();

  // Seeded scatter of small obstacles, expanded into plain objects.
  if (doc.contains("random_obstacles")) {
    const json& r = doc.at("random_obstacles");
    const char* rw = "world random_obstacles";
    const int count = jf::require_int(r, "count", rw);
    const auto size = jf::require_array<3>(r, "size", rw);
    const auto region = jf::require_array<4>(r, "region", rw);
    const double clearance = jf::number_or(r, "clearance", 0.5, rw);
    std::uint64_t seed = options.seed.value_or(0);
    if (!options.seed && r.contains("seed")) seed = jf::require(r, "seed", rw).get<std::uint64_t>();
    std::vector<Eigen::Vector2d> keep{{start.x, start.y}};
    if (tasks_j.contains("walk_goal")) {
      const auto g = footstep::goal_from_json(tasks_j.at("walk_goal"));
      keep.emplace_back(g.x, g.y);
    }
    for (const auto& o : objects) keep.push_back(o.pose.position.head<2>());
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
      return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    int placed = 0;
    for (int attempt = 0; placed < count && attempt < 1000 * std::max(count, 1); ++attempt) {
      const Eigen::Vector2d p(uniform(region[0], region[2]), uniform(region[1], region[3]));
      bool clear = true;
      for (const auto& k : keep) clear = clear && (p - k).norm() >= clearance;
      if (!clear) continue;
      WorldObject o;
      o.id = "scatter-" + std::to_string(++placed);
      o.kind = ObjectKind::SmallObstacle;
      o.pose.position = {p.x(), p.y(), 0.0};
      o.size = {size[0], size[1], size[2]};
      objects.push_back(o);
      keep.push_back(p);
    }
    doc.erase("random_obstacles");
    json arr = json::array();
    for (const auto& o : objects) arr.push_back(object_json(o));
    doc["objects"] = std::move(arr);
    doc["seed"] = seed;
  }

  std::set<std::string> ids;
  for (const auto& o : objects) {
    if (!ids.insert(o.id).second) throw WorldError("duplicate object id '" + o.id + "'");
    if (!map.contains(o.pose.position.head<2>())) throw WorldError("object '" + o.id + "' lies outside the map");
  }

  std::set<footstep::Cell> obstacle_cells;
  for (const auto& o : objects) {
    if (o.kind != ObjectKind::SmallObstacle && o.kind != ObjectKind::Table) continue;
    for (const auto& c : object_cells(map, o)) {
      map.set_no_step(c, true);
      if (o.kind == ObjectKind::SmallObstacle) obstacle_cells.insert(c);
    }
  }

  auto& t = w.tasks;
  if (tasks_j.contains("walk_goal")) t.walk_goal = footstep::goal_from_json(tasks_j.at("walk_goal"));
  t.position_tolerance = jf::number_or(tasks_j, "position_tolerance", t.position_tolerance, "world tasks");
  t.yaw_tolerance = jf::number_or(tasks_j, "yaw_tolerance", t.yaw_tolerance, "world tasks");
  t.lift_height = jf::number_or(tasks_j, "lift_height", t.lift_height, "world tasks");
  t.valve_target = jf::number_or(tasks_j, "valve_target", t.valve_target, "world tasks");
  if (tasks_j.contains("protected_cells")) {
    for (const auto& c : tasks_j.at("protected_cells")) {
      if (!c.is_array() || c.size() != 2) throw ParseError("world tasks: protected_cells entries must be [col, row]");
      const footstep::Cell cell{c[0].get<int>(), c[1].get<int>()};
      if (!map.in_bounds(cell)) throw WorldError("protected cell outside the map");
      t.protected_cells.push_back(cell);
    }
  } else {
    t.protected_cells.assign(obstacle_cells.begin(), obstacle_cells.end());
  }
  t.box_id = find_id(objects, tasks_j, "box", ObjectKind::GraspableBox);
  t.table_id = find_id(objects, tasks_j, "table", ObjectKind::Table);
  t.valve_id = find_id(objects, tasks_j, "valve", ObjectKind::Valve);

  WorldState& s = w.initial;
  const auto shared_map = std::make_shared<const footstep::HeightMap>(std::move(map));
  s.map = shared_map;
  s.objects = std::move(objects);
  try {
    s.robot.stance = footstep::prepare_start(*shared_map, footstep::stance_at(start, w.constraints), w.constraints);
  } catch (const footstep::InvalidStart& e) {
    throw WorldError(std::string("start stance: ") + e.what());
  }
  s.robot.base.position = {s.robot.stance.midpoint().x(), s.robot.stance.midpoint().y(), s.robot.stance.elevation()};
  s.robot.base.orientation = Eigen::AngleAxisd(s.robot.stance.heading(), Eigen::Vector3d::UnitZ());
  s.robot.joints = w.model->neutral();
  s.robot.setpoints = s.robot.joints;
  w.document = std::move(doc);
  return w;
}

World load_world_file(const std::string& path, std::optional<std::uint64_t> seed) {
  LoadOptions opt;
  opt.seed = seed;
  opt.base_dir = std::filesystem::path(path).parent_path().string();
  return load_world(jf::read_file(path), opt);
}

}  // namespace teleop::world
