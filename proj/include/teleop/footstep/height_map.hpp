#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "teleop/common/error.hpp"

namespace teleop::footstep {

class FootstepError : public Error {
 public:
  using Error::Error;
};

/// Height-map invariants violated (bad resolution, wrong array size, ...).
class MapError : public FootstepError {
 public:
  using FootstepError::FootstepError;
};

struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Regular grid of terrain elevations with a per-cell no-step flag. Cell
/// (col, row) covers [origin + col*res, origin + (col+1)*res) along x and the
/// same along y with `row`; storage is row-major.
class HeightMap {
 public:
  HeightMap() = default;
  HeightMap(double resolution, int width, int height, std::vector<double> heights,
            std::vector<std::uint8_t> no_step, Eigen::Vector2d origin = Eigen::Vector2d::Zero());

  static HeightMap flat(double resolution, int width, int height, double elevation = 0.0,
                        Eigen::Vector2d origin = Eigen::Vector2d::Zero());

  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  const Eigen::Vector2d& origin() const { return origin_; }
  Eigen::Vector2d extent_min() const { return origin_; }
  Eigen::Vector2d extent_max() const { return origin_ + Eigen::Vector2d(width_, height_) * resolution_; }

  bool in_bounds(const Cell& c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }
  bool contains(const Eigen::Vector2d& p) const;
  std::optional<Cell> cell_at(const Eigen::Vector2d& p) const;
  Eigen::Vector2d cell_center(const Cell& c) const;

  double elevation(const Cell& c) const { return heights_[index(c)]; }
  bool no_step(const Cell& c) const { return no_step_[index(c)] != 0; }
  void set_elevation(const Cell& c, double z);
  void set_no_step(const Cell& c, bool flag) { no_step_[index(c)] = flag ? 1 : 0; }

  const std::vector<double>& heights() const { return heights_; }
  std::vector<Cell> no_step_cells() const;

  friend bool operator==(const HeightMap&, const HeightMap&) = default;

 private:
  std::size_t index(const Cell& c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(c.col);
  }

  double resolution_ = 0.05;
  int width_ = 0;
  int height_ = 0;
  Eigen::Vector2d origin_ = Eigen::Vector2d::Zero();
  std::vector<double> heights_;
  std::vector<std::uint8_t> no_step_;
};

/// Height-map document: {resolution, width, height, origin?, heights | fill, no_step: [[col,row],...]}.
HeightMap height_map_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HeightMap& map);
HeightMap load_height_map(std::string_view document);

}  // namespace teleop::footstep
