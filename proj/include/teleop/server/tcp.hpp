#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "teleop/server/core.hpp"
#include "teleop/server/websocket.hpp"

namespace teleop::server {

class BindError : public Error {
 public:
  using Error::Error;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = kDefaultPort;  // 0 picks a free port
  double tick_hz = 50.0;
  std::size_t max_line = 1 << 20;
};

/// Accepts newline-delimited JSON over TCP, or WebSocket text frames when the
/// connection opens with an HTTP upgrade. One reader and one writer thread per
/// connection; a separate loop ticks the core at tick_hz.
class TcpServer {
 public:
  enum class HookResult { Step, Skip, Stop };
  /// Called under the core lock before every step. Skip idles this period
  /// (no tick, but telemetry and heartbeats still run); Stop ends the loop.
  using TickHook = std::function<HookResult(ServerCore&)>;

  TcpServer(ServerCore& core, ServerOptions options);  // binds; throws BindError
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  int port() const { return port_; }
  void start(TickHook hook = {});
  /// Blocks until the tick loop ends on its own (hook returned false).
  void wait();
  /// Shuts the core down (fail-safe, end record), says bye and joins all threads.
  void stop();

  /// Runs `f` with the core locked.
  template <class F>
  auto with_core(F&& f) {
    std::lock_guard lock(core_mu_);
    return f(core_);
  }
  double now_ms() const;

 private:
  struct Connection;
  void accept_loop();
  void tick_loop(TickHook hook);
  void serve(std::shared_ptr<Connection> c);
  void write_loop(std::shared_ptr<Connection> c, std::shared_ptr<Outbox> box);
  void reap();

  ServerCore& core_;
  ServerOptions options_;
  std::mutex core_mu_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::chrono::steady_clock::time_point epoch_;
  std::atomic<bool> running_{false};
  std::atomic<bool> loop_done_{false};
  std::thread acceptor_, ticker_;
  std::mutex conn_mu_;
  std::list<std::shared_ptr<Connection>> connections_;
  bool stopped_ = false;
};

/// Blocking test and tooling client. Speaks the line transport, or WebSocket
/// when `websocket` is set. Answers server pings itself unless told not to.
class Client {
 public:
  Client(const std::string& host, int port, bool websocket = false);
  ~Client();
  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  /// Assigns the next seq when `m.seq` is 0.
  void send(Message m);
  void send_raw(std::string_view bytes);
  std::optional<Message> receive(std::chrono::milliseconds timeout);
  /// Receives until a message of `type` arrives (others are kept in order).
  std::optional<Message> wait_for(std::string_view type, std::chrono::milliseconds timeout);
  std::deque<Message>& backlog() { return backlog_; }
  void close();
  bool closed() const { return fd_ < 0 || eof_; }

  bool auto_pong = true;
  /// Extra delay before answering pings.
  std::chrono::milliseconds pong_delay{0};

 private:
  std::optional<std::string> next_frame(std::chrono::milliseconds timeout);

  int fd_ = -1;
  bool websocket_;
  bool eof_ = false;
  std::string buffer_;
  std::optional<ws::FrameParser> parser_;
  std::deque<std::string> frames_;
  std::deque<Message> backlog_;
  std::uint64_t seq_ = 0;
  std::chrono::steady_clock::time_point epoch_ = std::chrono::steady_clock::now();
};

}  // namespace teleop::server
