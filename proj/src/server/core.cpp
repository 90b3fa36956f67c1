#include "teleop/server/core.hpp"

#include <algorithm>

#include "teleop/world/command.hpp"
#include "teleop/world/telemetry.hpp"

namespace teleop::server {

using nlohmann::json;

void Outbox::push(Message m) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    reliable_.push_back(std::move(m));
  }
  cv_.notify_one();
}

void Outbox::offer_telemetry(Message m) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (telemetry_) ++coalesced_;
    telemetry_ = std::move(m);
  }
  cv_.notify_one();
}

std::optional<Message> Outbox::pop(std::chrono::milliseconds wait) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, wait, [&] { return closed_ || !reliable_.empty() || telemetry_; });
  if (!reliable_.empty()) {
    Message m = std::move(reliable_.front());
    reliable_.pop_front();
    return m;
  }
  if (telemetry_) {
    Message m = std::move(*telemetry_);
    telemetry_.reset();
    return m;
  }
  return std::nullopt;
}

std::vector<Message> Outbox::drain() {
  std::lock_guard lock(mu_);
  std::vector<Message> out(std::make_move_iterator(reliable_.begin()), std::make_move_iterator(reliable_.end()));
  reliable_.clear();
  if (telemetry_) out.push_back(std::move(*telemetry_));
  telemetry_.reset();
  return out;
}

void Outbox::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Outbox::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::size_t Outbox::pending() const {
  std::lock_guard lock(mu_);
  return reliable_.size() + (telemetry_ ? 1 : 0);
}

std::uint64_t Outbox::coalesced() const {
  std::lock_guard lock(mu_);
  return coalesced_;
}

ServerCore::ServerCore(world::World world, CoreOptions options, record::Writer* log)
    : sim_(std::move(world)), options_(std::move(options)), log_(log) {
  if (log_) log_->header({options_.scenario, sim_.world().document});
}

SessionId ServerCore::connect(double now_ms) {
  const SessionId id = next_id_++;
  Session& s = sessions_[id];
  s.info.id = id;
  s.opened_ms = now_ms;
  s.next_ping_ms = now_ms + options_.heartbeat_period_ms;
  return id;
}

void ServerCore::send(Session& s, std::string type, json payload, double now_ms, bool telemetry) {
  Message m{std::move(type), ++s.out_seq, std::max(0.0, now_ms - s.opened_ms), std::move(payload)};
  if (telemetry) {
    s.outbox->offer_telemetry(std::move(m));
  } else {
    s.outbox->push(std::move(m));
  }
}

void ServerCore::send_error(Session& s, std::string_view code, const std::string& what,
                            std::optional<std::uint64_t> ref, double now_ms) {
  json p = {{"code", code}, {"message", what}};
  if (ref) p["ref_seq"] = *ref;
  send(s, "error", std::move(p), now_ms);
}

void ServerCore::receive(SessionId id, std::string_view frame, double now_ms) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return;
  Session& s = it->second;
  last_now_ = std::max(last_now_, now_ms);

  Message m;
  try {
    m = decode_message(frame);
  } catch (const CodecError& e) {
    send_error(s, kCodecError, e.what(), std::nullopt, now_ms);
    return;
  }
  if (s.last_in_seq && m.seq <= *s.last_in_seq) {
    send_error(s, kProtocolError,
               "seq " + std::to_string(m.seq) + " does not follow " + std::to_string(*s.last_in_seq), m.seq, now_ms);
    return;
  }
  s.last_in_seq = m.seq;

  if (m.type == "ping") {
    send(s, "pong", {{"ref_seq", m.seq}}, now_ms);
  } else if (m.type == "pong") {
    on_pong(s, m, now_ms);
  } else if (m.type == "hello") {
    on_hello(s, m, now_ms);
  } else if (m.type == "bye") {
    disconnect(id);
  } else if (!s.info.joined) {
    send_error(s, kProtocolError, "hello required before " + m.type, m.seq, now_ms);
  } else if (m.type == "command") {
    on_command(s, m, now_ms);
  } else if (m.type == "subscribe") {
    try {
      on_subscribe(s, m.payload);
    } catch (const std::exception& e) {
      send_error(s, kProtocolError, e.what(), m.seq, now_ms);
    }
  } else {
    send_error(s, kProtocolError, m.type + " is not a client message", m.seq, now_ms);
  }
}

void ServerCore::on_subscribe(Session& s, const json& p) {
  if (!p.is_object()) throw ProtocolViolation("subscribe payload must be an object");
  if (p.contains("streams")) {
    std::set<std::string> streams;
    for (const auto& name : p.at("streams")) {
      const std::string n = name.get<std::string>();
      if (n != kTelemetryStream && n != kEventStream) throw ProtocolViolation("unknown stream " + n);
      streams.insert(n);
    }
    s.info.subscriptions = std::move(streams);
  }
  if (p.contains("telemetry_rate")) {
    const double rate = p.at("telemetry_rate").get<double>();
    if (!(rate > 0)) throw ProtocolViolation("telemetry_rate must be positive");
    s.info.telemetry_rate = std::min(rate, kMaxTelemetryRate);
  }
}

void ServerCore::on_hello(Session& s, const Message& m, double now_ms) {
  if (s.info.joined) {
    send_error(s, kProtocolError, "hello already received", m.seq, now_ms);
    return;
  }
  std::optional<Role> requested;
  try {
    const json& p = m.payload;
    if (p.value("version", std::string{}) != kProtocolVersion) {
      throw ProtocolViolation("unsupported version; expected " + std::string(kProtocolVersion));
    }
    requested = role_from_string(p.value("role", std::string{"Observer"}));
    if (!requested) throw ProtocolViolation("unknown role");
    s.info.telemetry_rate = options_.default_telemetry_rate;
    s.info.subscriptions = {std::string(kTelemetryStream), std::string(kEventStream)};
    json sub = json::object();
    if (p.contains("subscriptions")) sub["streams"] = p["subscriptions"];
    if (p.contains("telemetry_rate")) sub["telemetry_rate"] = p["telemetry_rate"];
    on_subscribe(s, sub);
  } catch (const std::exception& e) {
    send_error(s, kProtocolError, e.what(), m.seq, now_ms);
    return;
  }

  s.info.joined = true;
  s.info.role = Role::Observer;
  if (*requested == Role::Operator) {
    if (options_.read_only) {
      send_error(s, kAuthorityDenied, "read-only session; joined as observer", m.seq, now_ms);
    } else if (operator_) {
      send_error(s, kAuthorityDenied, "session " + std::to_string(*operator_) + " holds command authority", m.seq,
                 now_ms);
    } else {
      s.info.role = Role::Operator;
      operator_ = s.info.id;
    }
  }
  s.next_telemetry_ms = now_ms;
  json streams = json::array();
  for (const auto& n : s.info.subscriptions) streams.push_back(n);
  send(s, "welcome",
       {{"version", kProtocolVersion},
        {"session", s.info.id},
        {"role", to_string(s.info.role)},
        {"telemetry_rate", s.info.telemetry_rate},
        {"subscriptions", streams},
        {"dt", sim_.world().params.dt},
        {"tick", sim_.tick_count()},
        {"world", sim_.world().document}},
       now_ms);
}

void ServerCore::on_command(Session& s, const Message& m, double now_ms) {
  if (s.info.role != Role::Operator) {
    send_error(s, kNotOperator, "observers cannot send commands", m.seq, now_ms);
    return;
  }
  try {
    queue_.push_back({world::command_from_json(m.payload), "session-" + std::to_string(s.info.id), s.info.id, m.seq});
  } catch (const std::exception& e) {
    send_error(s, kCodecError, e.what(), m.seq, now_ms);
  }
}

void ServerCore::on_pong(Session& s, const Message& m, double now_ms) {
  if (!m.payload.is_object() || !m.payload.contains("ref_seq") || !m.payload["ref_seq"].is_number_unsigned()) return;
  const auto ref = m.payload["ref_seq"].get<std::uint64_t>();
  auto it = s.pings.find(ref);
  if (it == s.pings.end()) return;
  s.info.network.rtt = now_ms - it->second;
  // An echo also vouches for every earlier ping.
  s.pings.erase(s.pings.begin(), std::next(it));
}

void ServerCore::disconnect(SessionId id) {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return;
  it->second.outbox->close();
  sessions_.erase(it);
  // Commands already queued by this session still run, in order.
  if (operator_ == id) {
    operator_.reset();
    inject(world::AbortWalk{}, "server");
    inject(world::JoystickCommand{}, "server");
  }
}

void ServerCore::inject(const world::Command& c, std::string source) {
  queue_.push_back({c, std::move(source), std::nullopt, std::nullopt});
}

void ServerCore::fan_out(const std::vector<world::Event>& events, double now_ms) {
  for (const auto& e : events) {
    hash_.add(e);
    if (log_) log_->event(e);
  }
  for (auto& [id, s] : sessions_) {
    if (!s.info.joined || !s.info.subscriptions.count(std::string(kEventStream))) continue;
    for (const auto& e : events) send(s, "event", to_json(e), now_ms);
  }
}

std::vector<world::Event> ServerCore::drain_queue(double now_ms) {
  std::vector<world::Event> all;
  while (!queue_.empty()) {
    Queued q = std::move(queue_.front());
    queue_.pop_front();
    const auto tick = sim_.tick_count();
    const auto r = sim_.apply(q.command);
    if (log_) log_->command({tick, ++record_seq_, q.source, q.client_seq, to_json(q.command), r.accepted});
    if (q.session) {
      auto it = sessions_.find(*q.session);
      if (it != sessions_.end()) {
        json ack = {{"ref_seq", *q.client_seq}, {"accepted", r.accepted}, {"tick", tick}};
        if (r.reason) ack["reason"] = to_string(*r.reason);
        if (!r.accepted) ack["message"] = r.message;
        send(it->second, "ack", std::move(ack), now_ms);
      }
    }
    fan_out(r.events, now_ms);
    all.insert(all.end(), r.events.begin(), r.events.end());
  }
  return all;
}

std::vector<world::Event> ServerCore::step(double now_ms) {
  last_now_ = std::max(last_now_, now_ms);
  auto all = drain_queue(now_ms);
  const auto events = sim_.tick();
  fan_out(events, now_ms);
  all.insert(all.end(), events.begin(), events.end());
  return all;
}

NetworkStatus ServerCore::network(const Session& s, double now_ms) const {
  NetworkStatus n = s.info.network;
  n.staleness = s.pings.empty() ? 0.0 : std::max(0.0, now_ms - s.pings.begin()->second);
  n.level = link_level(n.rtt, n.staleness);
  return n;
}

void ServerCore::publish(double now_ms) {
  std::optional<json> body;
  for (auto& [id, s] : sessions_) {
    if (!s.info.joined || !s.info.subscriptions.count(std::string(kTelemetryStream))) continue;
    if (now_ms < s.next_telemetry_ms) continue;
    const double period = 1000.0 / s.info.telemetry_rate;
    s.next_telemetry_ms += period;
    // After a long gap, restart the cadence rather than bursting to catch up.
    if (s.next_telemetry_ms <= now_ms) s.next_telemetry_ms = now_ms + period;
    if (!body) body = to_json(sim_.snapshot());
    json payload = *body;
    payload["network"] = to_json(network(s, now_ms));
    send(s, "telemetry", std::move(payload), now_ms, true);
  }
}

void ServerCore::heartbeat(double now_ms) {
  last_now_ = std::max(last_now_, now_ms);
  for (auto& [id, s] : sessions_) {
    s.info.network = network(s, now_ms);
    if (now_ms < s.next_ping_ms) continue;
    s.next_ping_ms = now_ms + options_.heartbeat_period_ms;
    send(s, "ping", json::object(), now_ms);
    s.pings.emplace(s.out_seq, now_ms);
  }
}

std::shared_ptr<Outbox> ServerCore::outbox(SessionId id) const {
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second.outbox;
}

std::optional<SessionInfo> ServerCore::session(SessionId id) const {
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  SessionInfo info = it->second.info;
  info.network = network(it->second, last_now_);
  return info;
}

void ServerCore::shutdown() {
  if (shut_) return;
  shut_ = true;
  inject(world::AbortWalk{}, "server");
  inject(world::JoystickCommand{}, "server");
  drain_queue(last_now_);
  if (log_) log_->end({sim_.tick_count(), hash_.hex()});
  for (auto& [id, s] : sessions_) {
    send(s, "bye", {{"reason", "shutdown"}}, last_now_);
    s.outbox->close();
  }
}

}  // namespace teleop::server
