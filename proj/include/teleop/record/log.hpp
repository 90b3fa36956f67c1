#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/common/error.hpp"
#include "teleop/world/event.hpp"

namespace teleop::record {

inline constexpr std::string_view kLogFormat = "teleop-log/1";

/// Malformed or inconsistent log; `line` is 1-based (0 when not tied to a line).
class CorruptLog : public Error {
 public:
  CorruptLog(std::size_t line, const std::string& what)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Header {
  std::string scenario;
  nlohmann::json world;  // self-contained world document
};

struct CommandRecord {
  std::uint64_t tick = 0;
  std::uint64_t seq = 0;  // order of application across all sources
  std::string source;     // "script", "session-3", "server"
  std::optional<std::uint64_t> client_seq;
  nlohmann::json command;
  bool accepted = true;
  friend bool operator==(const CommandRecord&, const CommandRecord&) = default;
};

struct EndRecord {
  std::uint64_t ticks = 0;
  std::string hash;
};

/// SHA-256 over the canonical event lines, each terminated by '\n'.
class EventHash {
 public:
  EventHash();
  ~EventHash();
  EventHash(const EventHash&) = delete;
  EventHash& operator=(const EventHash&) = delete;

  void add(const world::Event& e);
  void add_line(std::string_view canonical);
  /// Hex digest of everything added so far (the running state is kept).
  std::string hex() const;

 private:
  void* ctx_;
};

std::string sha256_hex(std::string_view data);

/// NDJSON writer; one record per line, flushed per record.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void header(const Header& h);
  void command(const CommandRecord& c);
  void event(const world::Event& e);
  void end(const EndRecord& e);

 private:
  void line(const nlohmann::json& j);
  std::ostream& out_;
};

struct Log {
  Header header;
  std::vector<CommandRecord> commands;
  std::vector<std::size_t> command_lines;
  std::vector<world::Event> events;
  std::vector<std::size_t> event_lines;  // source line of each event
  std::optional<EndRecord> end;
  std::size_t end_line = 0;
};

/// Throws CorruptLog naming the first bad line.
Log read_log(std::istream& in);
Log read_log_file(const std::string& path);

}  // namespace teleop::record
