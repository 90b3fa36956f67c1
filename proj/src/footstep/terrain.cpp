#include "teleop/footstep/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace teleop::footstep {

namespace {

constexpr double kEdgeEps = 1e-9;

Eigen::Vector2d forward_axis(const Footstep& s) { return {std::cos(s.yaw), std::sin(s.yaw)}; }
Eigen::Vector2d left_axis(const Footstep& s) { return {-std::sin(s.yaw), std::cos(s.yaw)}; }

}  // namespace

std::array<Eigen::Vector2d, 4> footprint_corners(const Footstep& step, const StepConstraints& c) {
  const Eigen::Vector2d f = forward_axis(step) * (0.5 * c.foot_length);
  const Eigen::Vector2d l = left_axis(step) * (0.5 * c.foot_width);
  const Eigen::Vector2d p = step.position();
  return {p + f + l, p - f + l, p - f - l, p + f - l};
}

bool footprint_in_bounds(const HeightMap& map, const Footstep& step, const StepConstraints& c) {
  const Eigen::Vector2d lo = map.extent_min(), hi = map.extent_max();
  for (const auto& corner : footprint_corners(step, c)) {
    if (corner.x() < lo.x() - kEdgeEps || corner.y() < lo.y() - kEdgeEps || corner.x() > hi.x() + kEdgeEps ||
        corner.y() > hi.y() + kEdgeEps) {
      return false;
    }
  }
  return true;
}

std::vector<Cell> footprint_cells(const HeightMap& map, const Footstep& step, const StepConstraints& c) {
  const auto corners = footprint_corners(step, c);
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& p : corners) {
    min_x = std::min(min_x, p.x());
    max_x = std::max(max_x, p.x());
    min_y = std::min(min_y, p.y());
    max_y = std::max(max_y, p.y());
  }
  const double res = map.resolution();
  const Eigen::Vector2d o = map.origin();
  // Candidate columns/rows whose centers fall inside the bounding box.
  const int c0 = std::max(0, static_cast<int>(std::ceil((min_x - o.x()) / res - 0.5 - kEdgeEps)));
  const int c1 = std::min(map.width() - 1, static_cast<int>(std::floor((max_x - o.x()) / res - 0.5 + kEdgeEps)));
  const int r0 = std::max(0, static_cast<int>(std::ceil((min_y - o.y()) / res - 0.5 - kEdgeEps)));
  const int r1 = std::min(map.height() - 1, static_cast<int>(std::floor((max_y - o.y()) / res - 0.5 + kEdgeEps)));

  const Eigen::Vector2d f = forward_axis(step), l = left_axis(step), p = step.position();
  const double hl = 0.5 * c.foot_length + kEdgeEps, hw = 0.5 * c.foot_width + kEdgeEps;
  std::vector<Cell> cells;
  for (int row = r0; row <= r1; ++row) {
    for (int col = c0; col <= c1; ++col) {
      const Eigen::Vector2d d = map.cell_center({col, row}) - p;
      if (std::abs(d.dot(f)) <= hl && std::abs(d.dot(l)) <= hw) cells.push_back({col, row});
    }
  }
  return cells;
}

Footstep snap_or_flag(const HeightMap& map, const Footstep& step, const StepConstraints& c) {
  Footstep out = step;
  out.violations.clear();
  if (!footprint_in_bounds(map, step, c)) {
    out.violations.push_back(Violation::OutOfBounds);
    out.valid = false;
    return out;
  }
  std::vector<Cell> cells = footprint_cells(map, step, c);
  if (cells.empty()) {
    // Footprint smaller than a cell: use the cell under the foot center.
    if (auto cell = map.cell_at(step.position())) cells.push_back(*cell);
  }
  double sum = 0.0, lo = std::numeric_limits<double>::infinity(), hi = -lo;
  bool blocked = false;
  for (const auto& cell : cells) {
    const double z = map.elevation(cell);
    sum += z;
    lo = std::min(lo, z);
    hi = std::max(hi, z);
    blocked = blocked || map.no_step(cell);
  }
  out.z = cells.empty() ? 0.0 : sum / static_cast<double>(cells.size());
  if (blocked) out.violations.push_back(Violation::NoStepCell);
  if (!cells.empty() && hi - lo > c.max_height_delta) out.violations.push_back(Violation::HeightSpread);
  out.valid = out.violations.empty();
  return out;
}

Footstep snap_footstep(const HeightMap& map, const Footstep& step, const StepConstraints& c) {
  if (!footprint_in_bounds(map, step, c)) throw OutOfBounds("footprint leaves the height map");
  return snap_or_flag(map, step, c);
}

bool feet_overlap(const Footstep& a, const Footstep& b, const StepConstraints& c) {
  const auto ca = footprint_corners(a, c), cb = footprint_corners(b, c);
  const std::array<Eigen::Vector2d, 4> axes{forward_axis(a), left_axis(a), forward_axis(b), left_axis(b)};
  for (const auto& axis : axes) {
    double amin = std::numeric_limits<double>::infinity(), amax = -amin, bmin = amin, bmax = -amin;
    for (const auto& p : ca) {
      amin = std::min(amin, p.dot(axis));
      amax = std::max(amax, p.dot(axis));
    }
    for (const auto& p : cb) {
      bmin = std::min(bmin, p.dot(axis));
      bmax = std::max(bmax, p.dot(axis));
    }
    if (amax < bmin || bmax < amin) return false;
  }
  return true;
}

}  // namespace teleop::footstep
