#include "teleop/footstep/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "teleop/common/angles.hpp"
#include "teleop/footstep/terrain.hpp"
#include "teleop/footstep/transition.hpp"

namespace teleop::footstep {

namespace {

constexpr double kFaceTravelDistance = 0.5;  // m

struct Node {
  Footstep prev;  // foot that swings next
  Footstep last;  // foot placed most recently (the stance foot)
  double g = 0.0;
  std::int64_t parent = -1;
};

struct Key {
  std::array<std::int64_t, 7> v{};
  friend bool operator==(const Key&, const Key&) = default;
};

struct KeyHash {
  std::size_t operator()(const Key& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto x : k.v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct OpenEntry {
  double f;
  double g;
  std::uint64_t seq;
  std::size_t node;
  // Lexicographic (f, g, insertion sequence), smallest first.
  friend bool operator>(const OpenEntry& a, const OpenEntry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    return a.seq > b.seq;
  }
};

Eigen::Vector2d midpoint(const Footstep& a, const Footstep& b) { return 0.5 * (a.position() + b.position()); }

}  // namespace

std::vector<StepTemplate> default_templates(const StepConstraints& c) {
  std::vector<StepTemplate> out;
  const double nominal = c.nominal_separation;
  for (double fraction : {0.0, 0.375, 0.75, 1.0}) {
    const double fwd = fraction * c.max_forward;
    out.push_back({fwd, nominal, 0.0});
    out.push_back({fwd, nominal, c.max_yaw_per_step});
    out.push_back({fwd, nominal, -c.max_yaw_per_step});
  }
  out.push_back({0.0, c.max_lateral, 0.0});
  out.push_back({0.0, std::max(c.min_lateral_separation, c.foot_width + 0.02), 0.0});
  out.push_back({-c.max_backward, nominal, 0.0});
  return out;
}

double step_cost(const Footstep& prev, const Footstep& last, const Footstep& next, double w) {
  return 1.0 + w * (midpoint(last, next) - midpoint(prev, last)).norm();
}

double plan_cost(const FootstepPlan& plan, double w) {
  double cost = 0.0;
  if (plan.steps.empty()) return cost;
  const Footstep& first = plan.steps.front();
  Footstep prev = plan.start.foot(first.side);
  Footstep last = plan.start.foot(opposite(first.side));
  for (const auto& s : plan.steps) {
    cost += step_cost(prev, last, s, w);
    prev = last;
    last = s;
  }
  return cost;
}

bool stance_reaches_goal(const StancePose& stance, const Goal2D& goal, const StepConstraints& c) {
  const double d = (stance.midpoint() - Eigen::Vector2d(goal.x, goal.y)).norm();
  return d <= c.goal_position_tolerance && std::abs(angle_diff(stance.heading(), goal.yaw)) <= c.goal_yaw_tolerance;
}

StancePose prepare_start(const HeightMap& map, const StancePose& start, const StepConstraints& c) {
  if (start.left.side != Side::Left || start.right.side != Side::Right) {
    throw InvalidStart("start stance must hold one left and one right foot");
  }
  StancePose s{snap_or_flag(map, start.left, c), snap_or_flag(map, start.right, c)};
  for (const Footstep* f : {&s.left, &s.right}) {
    if (!f->valid) {
      throw InvalidStart("start " + std::string(to_string(f->side)) + " foot is invalid: " +
                         std::string(to_string(f->violations.front())));
    }
  }
  if (!validate_transition(s.left, s.right, c).empty() || feet_overlap(s.left, s.right, c)) {
    throw InvalidStart("start stance feet are not a feasible stance");
  }
  return s;
}

FootstepPlan plan_footsteps(const HeightMap& map, const StancePose& start, const Goal2D& goal,
                            const StepConstraints& c, const PlannerParams& params, std::string id,
                            PlannerStats* stats, std::stop_token stop) {
  validate(c);
  const StancePose origin = prepare_start(map, start, c);
  const std::vector<StepTemplate> templates =
      params.templates.empty() ? default_templates(c) : params.templates;
  const double w = params.path_length_weight;
  const StancePose goal_stance = stance_at(goal, c);
  const Eigen::Vector2d goal_xy(goal.x, goal.y);

  // Admissible: per step the stance midpoint moves at most one reach (half
  // of two consecutive feasible placements) and the heading at most max_yaw.
  const double reach = std::hypot(std::max(c.max_forward, c.max_backward), c.max_lateral);
  auto heuristic = [&](const Footstep& a, const Footstep& b) {
    const Eigen::Vector2d to_goal = goal_xy - midpoint(a, b);
    const double d = std::max(0.0, to_goal.norm() - c.goal_position_tolerance);
    const double heading = mean_angle(a.yaw, b.yaw);
    const double turn = std::max(0.0, std::abs(angle_diff(heading, goal.yaw)) - c.goal_yaw_tolerance);
    if (params.heuristic == Heuristic::Admissible) return w * d + std::max(d / reach, turn / c.max_yaw_per_step);
    // Informed: far goals are approached walking forward, so charge turning
    // onto the bearing and then onto the goal yaw, plus full-stride steps.
    double total_turn = turn;
    if (to_goal.norm() > kFaceTravelDistance) {
      const double bearing = std::atan2(to_goal.y(), to_goal.x());
      total_turn = std::max(0.0, std::abs(angle_diff(bearing, heading)) + std::abs(angle_diff(goal.yaw, bearing)) -
                                     c.goal_yaw_tolerance);
    }
    return w * d + d / c.max_forward + total_turn / c.max_yaw_per_step;
  };
  auto key_of = [&](const Footstep& a, const Footstep& b) {
    auto q = [](double v, double r) { return static_cast<std::int64_t>(std::llround(v / r)); };
    const double kr = params.key_resolution, ky = params.key_yaw_resolution;
    return Key{{q(a.x, kr), q(a.y, kr), q(normalize_angle(a.yaw), ky), q(b.x, kr), q(b.y, kr),
                q(normalize_angle(b.yaw), ky), b.side == Side::Left ? 1 : 0}};
  };

  FootstepPlan plan;
  plan.id = std::move(id);
  plan.goal = goal;
  plan.start = origin;
  plan.status = PlanStatus::Proposed;

  std::vector<Node> nodes;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<>> open;
  std::unordered_set<Key, KeyHash> closed;
  std::unordered_map<Key, double, KeyHash> best_g;
  std::uint64_t seq = 0;
  PlannerStats local;

  auto push = [&](Node n) {
    const double f = n.g + heuristic(n.prev, n.last);
    nodes.push_back(std::move(n));
    open.push({f, nodes.back().g, seq++, nodes.size() - 1});
    ++local.generated;
  };
  push({origin.left, origin.right, 0.0, -1});
  push({origin.right, origin.left, 0.0, -1});

  std::vector<Footstep> candidates;
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const Node node = nodes[top.node];
    if (!closed.insert(key_of(node.prev, node.last)).second) continue;

    const StancePose stance = node.last.side == Side::Left ? StancePose{node.last, node.prev}
                                                           : StancePose{node.prev, node.last};
    if (stance_reaches_goal(stance, goal, c)) {
      std::vector<Footstep> steps;
      for (std::int64_t i = static_cast<std::int64_t>(top.node); nodes[static_cast<std::size_t>(i)].parent >= 0;
           i = nodes[static_cast<std::size_t>(i)].parent) {
        steps.push_back(nodes[static_cast<std::size_t>(i)].last);
      }
      std::reverse(steps.begin(), steps.end());
      plan.steps = std::move(steps);
      local.cost = node.g;
      if (stats) *stats = local;
      return plan;
    }

    if (++local.expanded > params.node_budget) {
      if (stats) *stats = local;
      throw NoPath("footstep search exhausted its budget of " + std::to_string(params.node_budget) + " nodes");
    }
    if ((local.expanded & 0xff) == 0 && stop.stop_requested()) {
      if (stats) *stats = local;
      throw PlanningCancelled("footstep search cancelled");
    }

    candidates.clear();
    for (const auto& t : templates) candidates.push_back(place_relative(node.last, {t.forward, t.lateral, t.yaw}));
    if (params.goal_snap) candidates.push_back(goal_stance.foot(opposite(node.last.side)));

    for (const Footstep& raw : candidates) {
      const Key key = key_of(node.last, raw);
      if (closed.contains(key)) continue;
      const double g = node.g + step_cost(node.prev, node.last, raw, w);
      auto seen = best_g.find(key);
      if (seen != best_g.end() && seen->second <= g) continue;
      if (!validate_transition(node.last, raw, c).empty() || feet_overlap(node.last, raw, c)) continue;
      Footstep next = snap_or_flag(map, raw, c);
      if (!next.valid) continue;
      best_g[key] = g;
      push({node.last, std::move(next), g, static_cast<std::int64_t>(top.node)});
    }
  }
  if (stats) *stats = local;
  throw NoPath("no footstep sequence reaches the goal");
}

}  // namespace teleop::footstep
