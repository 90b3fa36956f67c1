#pragma once

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "teleop/common/error.hpp"

namespace teleop::json_fields {

using nlohmann::json;

/// Returns j[key], throwing ParseError naming `where` when it is absent.
const json& require(const json& j, std::string_view key, std::string_view where);

double require_number(const json& j, std::string_view key, std::string_view where);
double number_or(const json& j, std::string_view key, double fallback, std::string_view where);
std::string require_string(const json& j, std::string_view key, std::string_view where);
int require_int(const json& j, std::string_view key, std::string_view where);
bool bool_or(const json& j, std::string_view key, bool fallback, std::string_view where);

/// Reads a fixed-size numeric array.
template <std::size_t N>
std::array<double, N> require_array(const json& j, std::string_view key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_array() || v.size() != N) {
    throw ParseError(std::string(where) + ": '" + std::string(key) + "' must be an array of " +
                     std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number() || !std::isfinite(v[i].get<double>())) {
      throw ParseError(std::string(where) + ": '" + std::string(key) + "' has a non-finite entry");
    }
    out[i] = v[i].get<double>();
  }
  return out;
}

/// Parses text as JSON, converting library exceptions to ParseError.
json parse_document(std::string_view text, std::string_view where);

/// Reads a whole file; throws ParseError if it cannot be opened.
std::string read_file(const std::string& path);

}  // namespace teleop::json_fields
