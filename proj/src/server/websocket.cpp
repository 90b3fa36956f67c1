#include "teleop/server/websocket.hpp"

#include <algorithm>
#include <cctype>

#include <openssl/evp.h>
#include <openssl/sha.h>

namespace teleop::server::ws {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_control(Opcode op) { return static_cast<std::uint8_t>(op) >= 0x8; }

bool known(std::uint8_t op) { return op <= 0x2 || (op >= 0x8 && op <= 0xA); }

}  // namespace

std::string accept_key(std::string_view client_key) {
  const std::string input = std::string(client_key) + std::string(kGuid);
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
  unsigned char encoded[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
  const int n = EVP_EncodeBlock(encoded, digest, SHA_DIGEST_LENGTH);
  return std::string(reinterpret_cast<char*>(encoded), static_cast<std::size_t>(n));
}

std::optional<Handshake> parse_handshake(std::string_view request) {
  const auto eol = request.find("\r\n");
  if (eol == std::string_view::npos) return std::nullopt;
  const std::string_view start = request.substr(0, eol);
  if (start.substr(0, 4) != "GET ") return std::nullopt;
  const auto sp = start.find(' ', 4);
  if (sp == std::string_view::npos) return std::nullopt;
  Handshake h;
  h.path = std::string(start.substr(4, sp - 4));

  bool upgrade = false, connection = false;
  std::string_view rest = request.substr(eol + 2);
  while (!rest.empty()) {
    const auto e = rest.find("\r\n");
    const std::string_view line = rest.substr(0, e);
    rest = e == std::string_view::npos ? std::string_view{} : rest.substr(e + 2);
    if (line.empty()) break;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    const std::string name = lower(trim(line.substr(0, colon)));
    const std::string_view value = trim(line.substr(colon + 1));
    if (name == "upgrade") upgrade = lower(value) == "websocket";
    if (name == "connection") connection = lower(value).find("upgrade") != std::string::npos;
    if (name == "sec-websocket-key") h.key = std::string(value);
  }
  if (!upgrade || !connection || h.key.empty()) return std::nullopt;
  return h;
}

std::string handshake_response(const Handshake& h) {
  return "HTTP/1.1 101 Switching Protocols\r\n"
         "Upgrade: websocket\r\n"
         "Connection: Upgrade\r\n"
         "Sec-WebSocket-Accept: " +
         accept_key(h.key) + "\r\n\r\n";
}

std::string handshake_rejection() {
  return "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n";
}

std::vector<Frame> FrameParser::feed(std::string_view bytes) {
  std::vector<Frame> out;
  if (failed()) return out;
  buffer_.append(bytes);
  while (auto f = next()) out.push_back(std::move(*f));
  if (pos_ > 0) {
    buffer_.erase(0, pos_);
    pos_ = 0;
  }
  return out;
}

std::optional<Frame> FrameParser::next() {
  while (!failed()) {
    const std::size_t avail = buffer_.size() - pos_;
    if (avail < 2) return std::nullopt;
    const auto* p = reinterpret_cast<const unsigned char*>(buffer_.data() + pos_);
    const bool fin = p[0] & 0x80;
    const std::uint8_t op = p[0] & 0x0F;
    const bool masked = p[1] & 0x80;
    std::uint64_t len = p[1] & 0x7F;
    std::size_t header = 2;

    if (p[0] & 0x70) {
      error_ = "reserved bits set";
      return std::nullopt;
    }
    if (!known(op)) {
      error_ = "unknown opcode";
      return std::nullopt;
    }
    if (require_mask_ && !masked) {
      error_ = "client frame not masked";
      return std::nullopt;
    }
    if (len == 126) {
      if (avail < 4) return std::nullopt;
      len = (std::uint64_t{p[2]} << 8) | p[3];
      header = 4;
    } else if (len == 127) {
      if (avail < 10) return std::nullopt;
      len = 0;
      for (int i = 0; i < 8; ++i) len = (len << 8) | p[2 + i];
      header = 10;
    }
    const auto opcode = static_cast<Opcode>(op);
    if (is_control(opcode) && (!fin || len > 125)) {
      error_ = "bad control frame";
      return std::nullopt;
    }
    if (len > max_message_ || fragment_.size() + len > max_message_) {
      error_ = "message too large";
      return std::nullopt;
    }
    const std::size_t mask_len = masked ? 4 : 0;
    if (avail < header + mask_len + len) return std::nullopt;

    std::string payload(buffer_.data() + pos_ + header + mask_len, static_cast<std::size_t>(len));
    if (masked) {
      const unsigned char* key = p + header;
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ key[i % 4]);
    }
    pos_ += header + mask_len + static_cast<std::size_t>(len);

    if (is_control(opcode)) return Frame{opcode, std::move(payload)};
    if (opcode == Opcode::Continuation) {
      if (!fragment_op_) {
        error_ = "continuation without a start frame";
        return std::nullopt;
      }
      fragment_ += payload;
      if (!fin) continue;
      Frame f{*fragment_op_, std::move(fragment_)};
      fragment_.clear();
      fragment_op_.reset();
      return f;
    }
    if (fragment_op_) {
      error_ = "new message inside a fragmented one";
      return std::nullopt;
    }
    if (fin) return Frame{opcode, std::move(payload)};
    fragment_op_ = opcode;
    fragment_ = std::move(payload);
  }
  return std::nullopt;
}

std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | static_cast<std::uint8_t>(op)));
  const unsigned char mbit = mask ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mbit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mbit | 126));
    out.push_back(static_cast<char>((n >> 8) & 0xFF));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mbit | 127));
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<char>((n >> (8 * i)) & 0xFF));
  }
  if (!mask) return out + std::string(payload);
  unsigned char key[4] = {static_cast<unsigned char>(*mask >> 24), static_cast<unsigned char>(*mask >> 16),
                          static_cast<unsigned char>(*mask >> 8), static_cast<unsigned char>(*mask)};
  out.append(reinterpret_cast<char*>(key), 4);
  for (std::size_t i = 0; i < payload.size(); ++i) out.push_back(static_cast<char>(payload[i] ^ key[i % 4]));
  return out;
}

}  // namespace teleop::server::ws
