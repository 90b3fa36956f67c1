#include "teleop/server/protocol.hpp"

#include <array>
#include <cmath>

namespace teleop::server {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 11> kTypes{"hello", "welcome", "command", "ack",  "subscribe", "telemetry",
                                                  "event", "error",   "ping",    "pong", "bye"};

constexpr int kMaxDepth = 64;

/// Bracket nesting outside string literals; bounded so later recursive
/// walks (dump, compare) stay shallow.
bool too_deep(std::string_view bytes) {
  int depth = 0;
  bool in_string = false, escaped = false;
  for (char c : bytes) {
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
    } else if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      if (++depth > kMaxDepth) return true;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return false;
}

}  // namespace

bool is_registered(std::string_view type) {
  for (auto t : kTypes)
    if (t == type) return true;
  return false;
}

std::string encode_message(const Message& m) {
  if (!is_registered(m.type)) throw CodecError("unregistered message type '" + m.type + "'");
  if (!std::isfinite(m.timestamp)) throw CodecError("non-finite timestamp");
  return json{{"type", m.type}, {"seq", m.seq}, {"timestamp", m.timestamp}, {"payload", m.payload}}.dump(
      -1, ' ', false, json::error_handler_t::replace);
}

Message decode_message(std::string_view bytes) {
  if (too_deep(bytes)) throw CodecError("frame nests deeper than 64 levels");
  json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) throw CodecError("frame is not valid JSON");
  if (!j.is_object()) throw CodecError("frame must be a JSON object");
  Message m;
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw CodecError("missing 'type'");
  m.type = type->get<std::string>();
  if (!is_registered(m.type)) throw CodecError("unregistered message type '" + m.type + "'");
  const auto seq = j.find("seq");
  if (seq == j.end() || !seq->is_number_unsigned()) throw CodecError("'seq' must be a non-negative integer");
  m.seq = seq->get<std::uint64_t>();
  const auto ts = j.find("timestamp");
  if (ts != j.end()) {
    if (!ts->is_number() || !std::isfinite(ts->get<double>()) || ts->get<double>() < 0.0) {
      throw CodecError("'timestamp' must be a non-negative number");
    }
    m.timestamp = ts->get<double>();
  }
  const auto payload = j.find("payload");
  if (payload != j.end()) {
    if (!payload->is_object()) throw CodecError("'payload' must be an object");
    m.payload = *payload;
  }
  return m;
}

std::string_view to_string(Role r) { return r == Role::Operator ? "Operator" : "Observer"; }

std::optional<Role> role_from_string(std::string_view s) {
  if (s == "Operator") return Role::Operator;
  if (s == "Observer") return Role::Observer;
  return std::nullopt;
}

std::string_view to_string(LinkLevel l) {
  switch (l) {
    case LinkLevel::Ok: return "Ok";
    case LinkLevel::Degraded: return "Degraded";
    case LinkLevel::Lost: return "Lost";
  }
  return "?";
}

LinkLevel link_level(double rtt_ms, double staleness_ms) {
  if (staleness_ms > 2000.0) return LinkLevel::Lost;
  if (rtt_ms < 150.0 && staleness_ms < 500.0) return LinkLevel::Ok;
  return LinkLevel::Degraded;
}

json to_json(const NetworkStatus& s) {
  return json{{"rtt", s.rtt}, {"staleness", s.staleness}, {"level", to_string(s.level)}};
}

}  // namespace teleop::server
