#include "teleop/common/json_fields.hpp"

#include <fstream>
#include <sstream>

namespace teleop::json_fields {

namespace {

std::string field(std::string_view where, std::string_view key) {
  return std::string(where) + ": '" + std::string(key) + "'";
}

}  // namespace

const json& require(const json& j, std::string_view key, std::string_view where) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(field(where, key) + " is required");
  return *it;
}

double require_number(const json& j, std::string_view key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_number()) throw ParseError(field(where, key) + " must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d)) throw ParseError(field(where, key) + " must be finite");
  return d;
}

double number_or(const json& j, std::string_view key, double fallback, std::string_view where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return require_number(j, key, where);
}

std::string require_string(const json& j, std::string_view key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_string()) throw ParseError(field(where, key) + " must be a string");
  return v.get<std::string>();
}

int require_int(const json& j, std::string_view key, std::string_view where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer()) throw ParseError(field(where, key) + " must be an integer");
  return v.get<int>();
}

bool bool_or(const json& j, std::string_view key, bool fallback, std::string_view where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const json& v = j.at(std::string(key));
  if (!v.is_boolean()) throw ParseError(field(where, key) + " must be a boolean");
  return v.get<bool>();
}

json parse_document(std::string_view text, std::string_view where) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(where) + ": " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace teleop::json_fields
