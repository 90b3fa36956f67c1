#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "teleop/common/error.hpp"

namespace teleop::server {

inline constexpr std::string_view kProtocolVersion = "teleop-proto/1";
inline constexpr int kDefaultPort = 7460;

class CodecError : public Error {
 public:
  using Error::Error;
};

/// Well-formed message that breaks the session rules.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

/// One frame: a JSON object on one line (TCP) or one text frame (WebSocket).
struct Message {
  std::string type;
  std::uint64_t seq = 0;
  double timestamp = 0.0;  // ms since session start
  nlohmann::json payload = nlohmann::json::object();
  friend bool operator==(const Message&, const Message&) = default;
};

/// Client -> server: hello, command, subscribe, ping, pong, bye.
/// Server -> client: welcome, ack, telemetry, event, error, ping, pong.
bool is_registered(std::string_view type);

std::string encode_message(const Message& m);
/// Never throws anything but CodecError, whatever the input.
Message decode_message(std::string_view bytes);

enum class Role { Operator, Observer };
std::string_view to_string(Role r);
std::optional<Role> role_from_string(std::string_view s);

enum class LinkLevel { Ok, Degraded, Lost };
std::string_view to_string(LinkLevel l);

struct NetworkStatus {
  double rtt = 0.0;        // ms, last ping echo delay
  double staleness = 0.0;  // ms, age of the oldest unanswered ping
  LinkLevel level = LinkLevel::Ok;
};

/// Ok iff rtt < 150 and staleness < 500; Lost iff staleness > 2000.
LinkLevel link_level(double rtt_ms, double staleness_ms);
nlohmann::json to_json(const NetworkStatus& s);

/// Error codes carried by "error" messages.
inline constexpr std::string_view kCodecError = "CodecError";
inline constexpr std::string_view kProtocolError = "ProtocolError";
inline constexpr std::string_view kAuthorityDenied = "AuthorityDenied";
inline constexpr std::string_view kNotOperator = "NotOperator";

}  // namespace teleop::server
