#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace teleop::cli {

/// Environment variables override flags that were not given on the command
/// line: TELEOP_WORLD, TELEOP_PORT, TELEOP_TICK_HZ, TELEOP_TELEMETRY_HZ,
/// TELEOP_SCRIPT, TELEOP_LOG, TELEOP_SPEED, TELEOP_SEED.
inline constexpr const char* kEnvPrefix = "TELEOP_";

/// serve writes its event log here unless --log says otherwise.
inline constexpr const char* kDefaultServeLog = "teleop-serve.ndjson";

struct RunArgs {
  std::string script;
  std::string world;  // empty: the script's own world
  std::string log;
  std::optional<std::uint64_t> seed;
};

struct ReplayArgs {
  std::string log;
  double speed = 0.0;
  std::string snapshots;  // NDJSON telemetry output, optional
  std::optional<int> port;  // serve the replay to observers
};

struct ValidateArgs {
  std::string world;
  std::string script;
  std::string plan;
  std::string log;
  std::optional<std::uint64_t> seed;
};

struct ServeArgs {
  std::string world;
  int port = 7460;
  double tick_hz = 50.0;
  double telemetry_hz = 20.0;
  std::string log;
  std::optional<std::uint64_t> seed;
  double duration = 0.0;  // seconds; 0 runs until interrupted
};

int run_command(const RunArgs& a, std::ostream& out, std::ostream& err);
int replay_command(const ReplayArgs& a, std::ostream& out, std::ostream& err);
int validate_command(const ValidateArgs& a, std::ostream& out, std::ostream& err);
int serve_command(const ServeArgs& a, std::ostream& out, std::ostream& err);

/// Full command line (args[0] is the program name).
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace teleop::cli
