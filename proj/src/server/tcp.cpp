#include "teleop/server/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace teleop::server {

namespace {

using Clock = std::chrono::steady_clock;

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

/// Reads what is available, waiting up to `timeout`. Empty optional on EOF/error.
std::optional<std::string> read_some(int fd, int timeout_ms) {
  pollfd p{fd, POLLIN, 0};
  const int r = ::poll(&p, 1, timeout_ms);
  if (r == 0) return std::string{};
  if (r < 0) return errno == EINTR ? std::optional<std::string>(std::string{}) : std::nullopt;
  char buf[16384];
  const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
  if (n <= 0) return std::nullopt;
  return std::string(buf, static_cast<std::size_t>(n));
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

struct TcpServer::Connection {
  int fd = -1;
  bool websocket = false;
  std::mutex write_mu;
  std::thread reader, writer;
  std::atomic<bool> finished{false};

  bool write(std::string_view bytes) {
    std::lock_guard lock(write_mu);
    return write_all(fd, bytes);
  }
};

TcpServer::TcpServer(ServerCore& core, ServerOptions options)
    : core_(core), options_(std::move(options)), epoch_(Clock::now()) {
  if (options_.port < 0 || options_.port > 65535) throw BindError("port out of range: " + std::to_string(options_.port));
  if (!(options_.tick_hz > 0)) throw BindError("tick rate must be positive");
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw BindError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(options_.port));
  if (::inet_pton(AF_INET, options_.host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw BindError("not an IPv4 address: " + options_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 16) < 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw BindError("cannot listen on " + options_.host + ":" + std::to_string(options_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpServer::~TcpServer() {
  stop();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

double TcpServer::now_ms() const {
  return std::chrono::duration<double, std::milli>(Clock::now() - epoch_).count();
}

void TcpServer::start(TickHook hook) {
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  ticker_ = std::thread([this, hook = std::move(hook)] { tick_loop(hook); });
}

void TcpServer::wait() {
  while (running_ && !loop_done_) std::this_thread::sleep_for(std::chrono::milliseconds(5));
}

void TcpServer::tick_loop(TickHook hook) {
  const auto period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / options_.tick_hz));
  auto next = Clock::now();
  while (running_) {
    {
      std::lock_guard lock(core_mu_);
      const auto what = hook ? hook(core_) : HookResult::Step;
      if (what == HookResult::Stop) break;
      const double now = now_ms();
      if (what == HookResult::Step) core_.step(now);
      core_.publish(now);
      core_.heartbeat(now);
    }
    next += period;
    const auto t = Clock::now();
    if (t - next > 10 * period) next = t;  // fell far behind; do not sprint
    std::this_thread::sleep_until(next);
  }
  loop_done_ = true;
}

void TcpServer::accept_loop() {
  while (running_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) {
      reap();
      continue;
    }
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    set_nodelay(fd);
    auto c = std::make_shared<Connection>();
    c->fd = fd;
    std::lock_guard lock(conn_mu_);
    connections_.push_back(c);
    c->reader = std::thread([this, c] { serve(c); });
  }
}

void TcpServer::reap() {
  std::lock_guard lock(conn_mu_);
  for (auto it = connections_.begin(); it != connections_.end();) {
    if ((*it)->finished) {
      if ((*it)->reader.joinable()) (*it)->reader.join();
      if ((*it)->writer.joinable()) (*it)->writer.join();
      ::close((*it)->fd);
      it = connections_.erase(it);
    } else {
      ++it;
    }
  }
}

void TcpServer::write_loop(std::shared_ptr<Connection> c, std::shared_ptr<Outbox> box) {
  for (;;) {
    auto m = box->pop(std::chrono::milliseconds(100));
    if (!m) {
      if (box->closed()) break;
      continue;
    }
    const std::string text = encode_message(*m);
    const bool ok = c->websocket ? c->write(ws::encode_frame(ws::Opcode::Text, text)) : c->write(text + "\n");
    if (!ok) break;
  }
  // Wake the reader if the server ended the session.
  ::shutdown(c->fd, SHUT_RDWR);
}

void TcpServer::serve(std::shared_ptr<Connection> c) {
  std::string pending;
  // Sniff the transport: WebSocket clients open with an HTTP GET.
  auto may_be_http = [&] { return std::string_view("GET ").substr(0, pending.size()) == pending.substr(0, 4); };
  while (running_ && pending.size() < 4 && may_be_http()) {
    auto chunk = read_some(c->fd, 100);
    if (!chunk) {
      c->finished = true;
      return;
    }
    pending += *chunk;
  }
  if (pending.rfind("GET ", 0) == 0) {
    while (running_ && pending.find("\r\n\r\n") == std::string::npos && pending.size() < 16384) {
      auto chunk = read_some(c->fd, 100);
      if (!chunk) {
        c->finished = true;
        return;
      }
      pending += *chunk;
    }
    const auto end = pending.find("\r\n\r\n");
    const auto hs = end == std::string::npos ? std::nullopt : ws::parse_handshake(pending.substr(0, end + 4));
    if (!hs) {
      c->write(ws::handshake_rejection());
      ::shutdown(c->fd, SHUT_RDWR);
      c->finished = true;
      return;
    }
    c->write(ws::handshake_response(*hs));
    c->websocket = true;
    pending.erase(0, end + 4);
  }
  if (!running_) {
    c->finished = true;
    return;
  }

  SessionId id;
  std::shared_ptr<Outbox> box;
  {
    std::lock_guard lock(core_mu_);
    id = core_.connect(now_ms());
    box = core_.outbox(id);
  }
  c->writer = std::thread([this, c, box] { write_loop(c, box); });

  auto deliver = [&](std::string_view frame) {
    std::lock_guard lock(core_mu_);
    core_.receive(id, frame, now_ms());
  };

  ws::FrameParser parser(options_.max_line);
  bool skipping = false;  // discarding the rest of an oversized line
  bool open = true;
  while (open && running_ && !box->closed()) {
    if (c->websocket) {
      for (auto& f : parser.feed(pending)) {
        if (f.opcode == ws::Opcode::Text || f.opcode == ws::Opcode::Binary) {
          deliver(f.payload);
        } else if (f.opcode == ws::Opcode::Ping) {
          c->write(ws::encode_frame(ws::Opcode::Pong, f.payload));
        } else if (f.opcode == ws::Opcode::Close) {
          c->write(ws::encode_frame(ws::Opcode::Close, f.payload.substr(0, 2)));
          open = false;
        }
      }
      if (parser.failed()) {
        c->write(ws::encode_frame(ws::Opcode::Close, std::string("\x03\xea", 2) + parser.error()));
        open = false;
      }
    } else {
      std::size_t start = 0;
      for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
        std::string_view line(pending.data() + start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!skipping && !line.empty()) deliver(line);
        skipping = false;
        start = nl + 1;
      }
      pending.erase(0, start);
      if (pending.size() > options_.max_line) {
        if (!skipping) deliver("");  // reported as a codec error; the line itself is dropped
        skipping = true;
        pending.clear();
      }
    }
    if (c->websocket) pending.clear();
    if (!open) break;
    auto chunk = read_some(c->fd, 100);
    if (!chunk) break;
    pending += *chunk;
  }
  {
    std::lock_guard lock(core_mu_);
    core_.disconnect(id);
  }
  if (c->writer.joinable()) c->writer.join();
  ::shutdown(c->fd, SHUT_RDWR);
  c->finished = true;
}

void TcpServer::stop() {
  if (stopped_) return;
  stopped_ = true;
  const bool was_running = running_.exchange(false);
  if (ticker_.joinable()) ticker_.join();
  {
    std::lock_guard lock(core_mu_);
    core_.shutdown();
  }
  if (acceptor_.joinable()) acceptor_.join();
  if (!was_running) return;
  std::lock_guard lock(conn_mu_);
  for (auto& c : connections_) {
    if (c->reader.joinable()) c->reader.join();
    if (c->writer.joinable()) c->writer.join();
    ::close(c->fd);
  }
  connections_.clear();
}

Client::Client(const std::string& host, int port, bool websocket) : websocket_(websocket) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0 || !res) {
    throw Error("cannot resolve " + host);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  const bool ok = fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) == 0;
  ::freeaddrinfo(res);
  if (!ok) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw Error("cannot connect to " + host + ":" + std::to_string(port));
  }
  set_nodelay(fd_);
  if (!websocket_) return;

  const std::string key = "dGVsZW9wLWNsaWVudC0xMg==";
  write_all(fd_, "GET /teleop HTTP/1.1\r\nHost: " + host + "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                 "Sec-WebSocket-Key: " + key + "\r\nSec-WebSocket-Version: 13\r\n\r\n");
  const auto deadline = Clock::now() + std::chrono::seconds(5);
  while (buffer_.find("\r\n\r\n") == std::string::npos) {
    if (Clock::now() > deadline) throw Error("websocket handshake timed out");
    auto chunk = read_some(fd_, 100);
    if (!chunk) throw Error("connection closed during websocket handshake");
    buffer_ += *chunk;
  }
  const auto end = buffer_.find("\r\n\r\n");
  const std::string head = buffer_.substr(0, end);
  if (head.rfind("HTTP/1.1 101", 0) != 0 || head.find(ws::accept_key(key)) == std::string::npos) {
    throw Error("websocket upgrade refused");
  }
  buffer_.erase(0, end + 4);
  parser_.emplace(std::size_t{1} << 24, false);
}

Client::~Client() { close(); }

void Client::close() {
  if (fd_ >= 0) {
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
  }
  fd_ = -1;
}

void Client::send_raw(std::string_view bytes) {
  if (fd_ >= 0) write_all(fd_, bytes);
}

void Client::send(Message m) {
  if (m.seq == 0) m.seq = ++seq_;
  seq_ = std::max(seq_, m.seq);
  m.timestamp = std::chrono::duration<double, std::milli>(Clock::now() - epoch_).count();
  const std::string text = encode_message(m);
  if (websocket_) {
    send_raw(ws::encode_frame(ws::Opcode::Text, text, 0x5a17c0deu ^ static_cast<std::uint32_t>(m.seq)));
  } else {
    send_raw(text + "\n");
  }
}

std::optional<std::string> Client::next_frame(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    if (websocket_) {
      for (auto& f : parser_->feed(buffer_)) {
        if (f.opcode == ws::Opcode::Text) frames_.push_back(std::move(f.payload));
        if (f.opcode == ws::Opcode::Close) eof_ = true;
      }
      buffer_.clear();
    } else {
      for (auto nl = buffer_.find('\n'); nl != std::string::npos; nl = buffer_.find('\n')) {
        frames_.push_back(buffer_.substr(0, nl));
        buffer_.erase(0, nl + 1);
      }
    }
    if (!frames_.empty()) {
      std::string f = std::move(frames_.front());
      frames_.pop_front();
      return f;
    }
    if (fd_ < 0 || eof_) return std::nullopt;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (left <= 0) return std::nullopt;
    auto chunk = read_some(fd_, static_cast<int>(left));
    if (!chunk) {
      eof_ = true;
      continue;
    }
    buffer_ += *chunk;
  }
}

std::optional<Message> Client::receive(std::chrono::milliseconds timeout) {
  if (!backlog_.empty()) {
    Message m = std::move(backlog_.front());
    backlog_.pop_front();
    return m;
  }
  const auto deadline = Clock::now() + timeout;
  for (;;) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    auto f = next_frame(std::max(left, std::chrono::milliseconds(0)));
    if (!f) return std::nullopt;
    Message m = decode_message(*f);
    if (auto_pong && m.type == "ping") {
      if (pong_delay.count() > 0) std::this_thread::sleep_for(pong_delay);
      send({"pong", 0, 0, {{"ref_seq", m.seq}}});
      continue;
    }
    return m;
  }
}

std::optional<Message> Client::wait_for(std::string_view type, std::chrono::milliseconds timeout) {
  for (auto it = backlog_.begin(); it != backlog_.end(); ++it) {
    if (it->type == type) {
      Message m = std::move(*it);
      backlog_.erase(it);
      return m;
    }
  }
  const auto deadline = Clock::now() + timeout;
  std::deque<Message> stash;
  std::optional<Message> found;
  while (!found) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) break;
    auto saved = std::move(backlog_);
    backlog_.clear();
    auto m = receive(left);
    backlog_ = std::move(saved);
    if (!m) break;
    if (m->type == type) {
      found = std::move(m);
    } else {
      backlog_.push_back(std::move(*m));
    }
  }
  return found;
}

}  // namespace teleop::server
