#pragma once

#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/server/core.hpp"
#include "world/world_fixture.hpp"

namespace teleop::test {

using teleop::server::Message;
using teleop::server::ServerCore;
using teleop::server::SessionId;

inline std::string frame(std::string type, std::uint64_t seq, nlohmann::json payload = nlohmann::json::object()) {
  return server::encode_message({std::move(type), seq, 0.0, std::move(payload)});
}

inline std::string hello(std::uint64_t seq, std::string role, nlohmann::json extra = nlohmann::json::object()) {
  extra["version"] = server::kProtocolVersion;
  extra["role"] = role;
  return frame("hello", seq, extra);
}

inline std::string command(std::uint64_t seq, const Command& c) { return frame("command", seq, to_json(c)); }

/// A session driven directly against the core.
struct Peer {
  ServerCore& core;
  SessionId id;
  std::uint64_t seq = 0;
  std::vector<Message> inbox;

  Peer(ServerCore& c, double now, const std::string& role, nlohmann::json extra = nlohmann::json::object())
      : core(c), id(c.connect(now)) {
    core.receive(id, hello(++seq, role, extra), now);
    collect();
  }
  void send(const std::string& type, nlohmann::json payload, double now) {
    core.receive(id, frame(type, ++seq, std::move(payload)), now);
  }
  void send(const Command& c, double now) { core.receive(id, command(++seq, c), now); }
  std::vector<Message>& collect() {
    for (auto& m : core.outbox(id)->drain()) inbox.push_back(std::move(m));
    return inbox;
  }
  std::vector<Message> of_type(const std::string& type) {
    collect();
    std::vector<Message> out;
    for (const auto& m : inbox)
      if (m.type == type) out.push_back(m);
    return out;
  }
};

}  // namespace teleop::test
