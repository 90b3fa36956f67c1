#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teleop::server::ws {

/// Sec-WebSocket-Accept value for a client key.
std::string accept_key(std::string_view client_key);

struct Handshake {
  std::string path;
  std::string key;
};

/// Parses a complete HTTP upgrade request (through the blank line).
/// nullopt if it is not a valid WebSocket upgrade.
std::optional<Handshake> parse_handshake(std::string_view request);
std::string handshake_response(const Handshake& h);
std::string handshake_rejection();

enum class Opcode : std::uint8_t { Continuation = 0x0, Text = 0x1, Binary = 0x2, Close = 0x8, Ping = 0x9, Pong = 0xA };

struct Frame {
  Opcode opcode = Opcode::Text;
  std::string payload;  // reassembled for fragmented messages
};

/// Incremental decoder for the client-to-server direction. Once it reports an
/// error it stays failed; the caller should close the connection.
class FrameParser {
 public:
  explicit FrameParser(std::size_t max_message = 1 << 20, bool require_mask = true)
      : max_message_(max_message), require_mask_(require_mask) {}

  /// Appends bytes and returns every frame completed by them.
  std::vector<Frame> feed(std::string_view bytes);
  bool failed() const { return !error_.empty(); }
  const std::string& error() const { return error_; }

 private:
  std::optional<Frame> next();

  std::string buffer_;
  std::size_t pos_ = 0;
  std::optional<Opcode> fragment_op_;
  std::string fragment_;
  std::size_t max_message_;
  bool require_mask_;
  std::string error_;
};

/// Encodes one unfragmented frame. Clients must mask; servers must not.
std::string encode_frame(Opcode op, std::string_view payload, std::optional<std::uint32_t> mask = std::nullopt);

}  // namespace teleop::server::ws
