#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "teleop/record/log.hpp"
#include "teleop/server/protocol.hpp"
#include "teleop/world/simulator.hpp"

namespace teleop::server {

using SessionId = std::uint64_t;

/// Outgoing messages of one session. Reliable messages queue in order;
/// telemetry keeps only the newest unsent snapshot. Safe to use from the
/// tick thread and the session's writer thread at once.
class Outbox {
 public:
  void push(Message m);
  void offer_telemetry(Message m);
  /// Waits up to `wait` for something to send. Reliable messages go first.
  std::optional<Message> pop(std::chrono::milliseconds wait);
  std::vector<Message> drain();
  void close();
  bool closed() const;
  std::size_t pending() const;
  std::uint64_t coalesced() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Message> reliable_;
  std::optional<Message> telemetry_;
  std::uint64_t coalesced_ = 0;
  bool closed_ = false;
};

inline constexpr std::string_view kTelemetryStream = "telemetry";
inline constexpr std::string_view kEventStream = "events";
inline constexpr double kMaxTelemetryRate = 60.0;

struct CoreOptions {
  double default_telemetry_rate = 20.0;
  double heartbeat_period_ms = 500.0;
  bool read_only = false;  // replays: every session is an Observer
  std::string scenario = "serve";
};

struct SessionInfo {
  SessionId id = 0;
  bool joined = false;
  Role role = Role::Observer;
  double telemetry_rate = 20.0;
  std::set<std::string> subscriptions;
  NetworkStatus network;
};

/// Transport-independent server state: sessions, authority, the serialized
/// command queue in front of the simulator, telemetry pacing and heartbeats.
/// Time is passed in explicitly (ms on any monotonic clock). Not thread-safe;
/// the transport serializes calls.
class ServerCore {
 public:
  ServerCore(world::World world, CoreOptions options = {}, record::Writer* log = nullptr);

  SessionId connect(double now_ms);
  /// One decoded-or-not frame from the client.
  void receive(SessionId id, std::string_view frame, double now_ms);
  /// Connection gone. If it held authority the robot is made safe.
  void disconnect(SessionId id);

  /// Applies queued commands in arrival order, then advances one tick.
  std::vector<world::Event> step(double now_ms);
  /// Applies queued commands without advancing time.
  std::vector<world::Event> flush(double now_ms) { return drain_queue(now_ms); }
  void publish(double now_ms);
  void heartbeat(double now_ms);

  /// Queues a command from the server itself (fail-safe, replays).
  void inject(const world::Command& c, std::string source);
  /// Final fail-safe and end record; further steps are not expected.
  void shutdown();

  std::shared_ptr<Outbox> outbox(SessionId id) const;
  std::optional<SessionInfo> session(SessionId id) const;
  std::optional<SessionId> operator_session() const { return operator_; }
  const world::Simulator& sim() const { return sim_; }
  std::size_t session_count() const { return sessions_.size(); }
  const std::string& hash() { return hash_hex_ = hash_.hex(); }

 private:
  struct Session {
    SessionInfo info;
    double opened_ms = 0;
    std::uint64_t out_seq = 0;
    std::optional<std::uint64_t> last_in_seq;
    double next_telemetry_ms = 0;
    double next_ping_ms = 0;
    std::map<std::uint64_t, double> pings;  // seq -> sent time, unanswered
    std::shared_ptr<Outbox> outbox = std::make_shared<Outbox>();
  };
  struct Queued {
    world::Command command;
    std::string source;
    std::optional<SessionId> session;
    std::optional<std::uint64_t> client_seq;
  };

  void send(Session& s, std::string type, nlohmann::json payload, double now_ms, bool telemetry = false);
  void send_error(Session& s, std::string_view code, const std::string& what, std::optional<std::uint64_t> ref,
                  double now_ms);
  void on_hello(Session& s, const Message& m, double now_ms);
  void on_subscribe(Session& s, const nlohmann::json& p);
  void on_command(Session& s, const Message& m, double now_ms);
  void on_pong(Session& s, const Message& m, double now_ms);
  std::vector<world::Event> drain_queue(double now_ms);
  void fan_out(const std::vector<world::Event>& events, double now_ms);
  NetworkStatus network(const Session& s, double now_ms) const;

  world::Simulator sim_;
  CoreOptions options_;
  record::Writer* log_;
  record::EventHash hash_;
  std::string hash_hex_;
  std::map<SessionId, Session> sessions_;
  SessionId next_id_ = 1;
  std::optional<SessionId> operator_;
  std::deque<Queued> queue_;
  std::uint64_t record_seq_ = 0;
  double last_now_ = 0;
  bool shut_ = false;
};

}  // namespace teleop::server
