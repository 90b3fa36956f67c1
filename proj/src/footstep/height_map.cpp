#include "teleop/footstep/height_map.hpp"

#include <cmath>

#include "teleop/common/json_fields.hpp"

namespace teleop::footstep {

namespace jf = teleop::json_fields;
using nlohmann::json;

HeightMap::HeightMap(double resolution, int width, int height, std::vector<double> heights,
                     std::vector<std::uint8_t> no_step, Eigen::Vector2d origin)
    : resolution_(resolution),
      width_(width),
      height_(height),
      origin_(origin),
      heights_(std::move(heights)),
      no_step_(std::move(no_step)) {
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) throw MapError("height map resolution must be positive");
  if (width_ <= 0 || height_ <= 0) throw MapError("height map dimensions must be positive");
  const auto cells = static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  if (heights_.size() != cells) {
    throw MapError("height map expects " + std::to_string(cells) + " heights, got " + std::to_string(heights_.size()));
  }
  if (no_step_.empty()) no_step_.assign(cells, 0);
  if (no_step_.size() != cells) throw MapError("height map no_step layer has the wrong size");
  for (double h : heights_) {
    if (!std::isfinite(h)) throw MapError("height map elevations must be finite");
  }
  if (!origin_.allFinite()) throw MapError("height map origin must be finite");
}

HeightMap HeightMap::flat(double resolution, int width, int height, double elevation, Eigen::Vector2d origin) {
  const auto cells = static_cast<std::size_t>(std::max(width, 0)) * static_cast<std::size_t>(std::max(height, 0));
  return HeightMap(resolution, width, height, std::vector<double>(cells, elevation), {}, origin);
}

bool HeightMap::contains(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d lo = extent_min(), hi = extent_max();
  return p.x() >= lo.x() && p.y() >= lo.y() && p.x() <= hi.x() && p.y() <= hi.y();
}

std::optional<Cell> HeightMap::cell_at(const Eigen::Vector2d& p) const {
  const Eigen::Vector2d rel = (p - origin_) / resolution_;
  Cell c{static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y()))};
  // Points on the far edge belong to the last cell.
  if (c.col == width_ && rel.x() == width_) c.col = width_ - 1;
  if (c.row == height_ && rel.y() == height_) c.row = height_ - 1;
  if (!in_bounds(c)) return std::nullopt;
  return c;
}

Eigen::Vector2d HeightMap::cell_center(const Cell& c) const {
  return origin_ + Eigen::Vector2d(c.col + 0.5, c.row + 0.5) * resolution_;
}

void HeightMap::set_elevation(const Cell& c, double z) {
  if (!std::isfinite(z)) throw MapError("height map elevations must be finite");
  heights_[index(c)] = z;
}

std::vector<Cell> HeightMap::no_step_cells() const {
  std::vector<Cell> out;
  for (int r = 0; r < height_; ++r)
    for (int c = 0; c < width_; ++c)
      if (no_step({c, r})) out.push_back({c, r});
  return out;
}

HeightMap height_map_from_json(const json& j) {
  const double res = jf::require_number(j, "resolution", "height map");
  const int w = jf::require_int(j, "width", "height map");
  const int h = jf::require_int(j, "height", "height map");
  if (w <= 0 || h <= 0) throw MapError("height map dimensions must be positive");
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  if (j.contains("origin")) {
    auto o = jf::require_array<2>(j, "origin", "height map");
    origin = {o[0], o[1]};
  }
  const auto cells = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  std::vector<double> heights;
  if (j.contains("heights")) {
    const json& arr = j.at("heights");
    if (!arr.is_array()) throw ParseError("height map: 'heights' must be an array");
    heights.reserve(arr.size());
    for (const auto& v : arr) {
      if (!v.is_number()) throw ParseError("height map: 'heights' entries must be numbers");
      heights.push_back(v.get<double>());
    }
  } else {
    heights.assign(cells, jf::number_or(j, "fill", 0.0, "height map"));
  }
  HeightMap map(res, w, h, std::move(heights), {}, origin);
  if (j.contains("no_step")) {
    const json& arr = j.at("no_step");
    if (!arr.is_array()) throw ParseError("height map: 'no_step' must be an array of [col, row]");
    for (const auto& v : arr) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        throw ParseError("height map: 'no_step' entries must be [col, row] integer pairs");
      }
      const Cell c{v[0].get<int>(), v[1].get<int>()};
      if (!map.in_bounds(c)) throw MapError("height map: no_step cell outside the grid");
      map.set_no_step(c, true);
    }
  }
  return map;
}

json to_json(const HeightMap& map) {
  json cells = json::array();
  for (const auto& c : map.no_step_cells()) cells.push_back({c.col, c.row});
  return json{{"resolution", map.resolution()},
              {"width", map.width()},
              {"height", map.height()},
              {"origin", {map.origin().x(), map.origin().y()}},
              {"heights", map.heights()},
              {"no_step", std::move(cells)}};
}

HeightMap load_height_map(std::string_view document) {
  return height_map_from_json(jf::parse_document(document, "height map"));
}

}  // namespace teleop::footstep
