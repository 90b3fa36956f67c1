#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "teleop/world/types.hpp"

namespace teleop::world {

struct LoadOptions {
  std::optional<std::uint64_t> seed;  // overrides random_obstacles.seed
  std::string base_dir;               // resolves a relative robot_model path
};

/// World/scenario document -> ready-to-run World. Throws ParseError, WorldError,
/// and the model/map loaders' errors.
World load_world(std::string_view document, const LoadOptions& options = {});
World load_world_file(const std::string& path, std::optional<std::uint64_t> seed = std::nullopt);

/// Map cells an object's footprint covers (cell centers inside its rectangle;
/// the cell under its center when it is smaller than a cell).
std::vector<footstep::Cell> object_cells(const footstep::HeightMap& map, const WorldObject& o);

/// Ground footprint test used for support and placement.
bool footprint_contains(const WorldObject& o, double x, double y);

}  // namespace teleop::world
