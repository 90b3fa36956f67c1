#include <gtest/gtest.h>

#include <random>

#include "server/server_fixture.hpp"
#include "teleop/server/protocol.hpp"
#include "teleop/world/telemetry.hpp"

namespace teleop::test {
namespace {

using server::CodecError;
using server::decode_message;
using server::encode_message;
using nlohmann::json;

/// Snapshots from a short scripted run, so telemetry payloads carry a plan, a walk and moved joints.
const std::vector<Telemetry>& sample_snapshots() {
  static const std::vector<Telemetry> out = [] {
    Simulator sim(flat_world());
    std::vector<Telemetry> snaps;
    sim.apply(SetNavGoal{1.5, 1.2, 0.3, GoalSource::Pointer});
    sim.apply(ApprovePlan{pending_id(sim)});
    sim.apply(JointSlider{"leftElbowPitch", -0.7});
    for (int i = 0; i < 60; ++i) {
      sim.tick();
      snaps.push_back(sim.snapshot());
    }
    return snaps;
  }();
  return out;
}

Message random_message(std::mt19937_64& rng) {
  static const std::vector<std::string> types = {"hello", "welcome", "command", "ack",   "subscribe", "telemetry",
                                                 "event", "error",   "ping",    "pong", "bye"};
  std::uniform_real_distribution<double> u(0.0, 1e6);
  const std::string type = types[rng() % types.size()];
  Message m{type, rng() % 1000000, std::floor(u(rng) * 1000) / 1000, json::object()};
  auto roles = [&] { return rng() % 2 ? "Operator" : "Observer"; };
  if (type == "hello") {
    m.payload = {{"version", server::kProtocolVersion}, {"role", roles()}, {"telemetry_rate", 1 + rng() % 60}};
    if (rng() % 2) m.payload["subscriptions"] = {"telemetry"};
  } else if (type == "welcome") {
    m.payload = {{"version", server::kProtocolVersion}, {"session", rng() % 100}, {"role", roles()},
                 {"telemetry_rate", 20.0}, {"subscriptions", {"events", "telemetry"}}, {"dt", 0.02},
                 {"tick", rng() % 5000}, {"world", flat_world_doc(8, 6)}};
  } else if (type == "command") {
    m.payload = to_json(random_command(rng));
  } else if (type == "ack") {
    m.payload = {{"ref_seq", rng() % 1000}, {"accepted", rng() % 2 == 0}, {"tick", rng() % 1000}};
    if (!m.payload["accepted"].get<bool>()) m.payload["reason"] = "WrongMode", m.payload["message"] = "busy";
  } else if (type == "subscribe") {
    m.payload = {{"streams", rng() % 2 ? json{"events"} : json{"events", "telemetry"}}, {"telemetry_rate", 5}};
  } else if (type == "telemetry") {
    const auto& snaps = sample_snapshots();
    m.payload = to_json(snaps[rng() % snaps.size()]);
    m.payload["network"] = to_json(server::NetworkStatus{u(rng) / 1000, u(rng) / 100, server::LinkLevel::Degraded});
  } else if (type == "event") {
    Event e{rng() % 1000, rng() % 1000, static_cast<EventKind>(rng() % 12), {{"value", u(rng)}}};
    m.payload = to_json(e);
  } else if (type == "error") {
    m.payload = {{"code", server::kProtocolError}, {"message", "seq \"7\" \\ é"}, {"ref_seq", rng() % 9}};
  } else if (type == "ping" || type == "pong") {
    if (rng() % 2) m.payload = {{"ref_seq", rng() % 1000}};
  } else {
    m.payload = {{"reason", "shutdown"}};
  }
  return m;
}

TEST(Protocol, RandomMessagesRoundTrip) {
  std::mt19937_64 rng(404);
  for (int i = 0; i < 1000; ++i) {
    const Message m = random_message(rng);
    const std::string bytes = encode_message(m);
    EXPECT_EQ(bytes.find('\n'), std::string::npos);  // one line per frame
    const Message back = decode_message(bytes);
    ASSERT_EQ(back, m) << bytes;
  }
}

TEST(Protocol, CommandPayloadsDecodeToTheSameCommand) {
  std::mt19937_64 rng(405);
  for (int i = 0; i < 500; ++i) {
    const Command c = random_command(rng);
    const Message back = decode_message(command(7, c));
    EXPECT_EQ(command_from_json(back.payload), c);
  }
  const Command approve = ApprovePlan{"plan-3"};
  EXPECT_EQ(command_from_json(decode_message(command(1, approve)).payload), approve);
}

TEST(Protocol, TelemetryPayloadsDecodeToTheSameSnapshot) {
  for (const auto& t : sample_snapshots()) {
    json p = to_json(t);
    p["network"] = {{"rtt", 1.0}, {"staleness", 0.0}, {"level", "Ok"}};
    const Message back = decode_message(frame("telemetry", 1, p));
    EXPECT_EQ(telemetry_from_json(back.payload), t);
  }
}

TEST(Protocol, MalformedFramesRaiseCodecError) {
  const std::string good = command(3, ApprovePlan{"plan-1"});
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    EXPECT_THROW(decode_message(good.substr(0, cut)), CodecError) << cut;
  }
  EXPECT_THROW(decode_message("[1,2]"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"teleport","seq":1})"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"ping","seq":-1})"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"ping","seq":1.5})"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"ping"})"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"ping","seq":1,"payload":[]})"), CodecError);
  EXPECT_THROW(decode_message(R"({"type":"ping","seq":1,"timestamp":"now"})"), CodecError);
  EXPECT_THROW(decode_message(std::string(100, '[') + std::string(100, ']')), CodecError);
  EXPECT_THROW(decode_message("{\"type\":\"ping\",\"seq\":1,\"payload\":{\"s\":\"\xff\"}}"), CodecError);
}

TEST(Protocol, UnknownFieldsAreIgnored) {
  const Message m = decode_message(R"({"type":"ping","seq":4,"timestamp":2.5,"trace":"abc","payload":{}})");
  EXPECT_EQ(m, (Message{"ping", 4, 2.5, json::object()}));
  // Brackets inside strings do not count toward nesting.
  EXPECT_NO_THROW(decode_message(R"({"type":"error","seq":1,"payload":{"message":")" + std::string(500, '[') +
                                 R"("}})"));
}

TEST(Protocol, EncodeRefusesUnregisteredTypes) {
  EXPECT_THROW(encode_message({"teleport", 1, 0.0, json::object()}), CodecError);
  EXPECT_FALSE(server::is_registered("Hello"));
  EXPECT_TRUE(server::is_registered("hello"));
}

TEST(Protocol, LinkLevelThresholds) {
  using server::LinkLevel;
  using server::link_level;
  // Brute-force the definition over a grid that straddles every threshold.
  for (double rtt : {0.0, 149.9, 150.0, 151.0, 300.0, 5000.0}) {
    for (double st : {0.0, 499.9, 500.0, 1000.0, 2000.0, 2000.1, 3000.0}) {
      const LinkLevel want = st > 2000 ? LinkLevel::Lost : (rtt < 150 && st < 500) ? LinkLevel::Ok : LinkLevel::Degraded;
      EXPECT_EQ(link_level(rtt, st), want) << rtt << " " << st;
    }
  }
}

}  // namespace
}  // namespace teleop::test
