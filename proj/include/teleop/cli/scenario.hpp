#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "teleop/record/log.hpp"
#include "teleop/world/simulator.hpp"

namespace teleop::cli {

inline constexpr std::string_view kScriptFormat = "teleop-script/1";

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kBadConfig = 2,
  kBindFailure = 3,
  kAssertionFailed = 4,
  kCorruptLog = 5,
};

/// Inline check evaluated at its tick, before that tick's step.
struct Expectation {
  std::optional<std::pair<world::Task, world::TaskStatus>> task;
  std::optional<world::Mode> mode;
  std::optional<std::pair<world::Side, std::optional<std::string>>> holding;
  std::optional<footstep::PlanStatus> plan_status;
  nlohmann::json source;  // as written, for messages
};

struct ScriptEntry {
  std::uint64_t tick = 0;
  std::optional<nlohmann::json> command;  // may hold "@pending" placeholders
  std::optional<bool> expect_accepted;
  std::optional<Expectation> expect;
  std::size_t index = 0;  // position in the file
};

struct Script {
  std::string name;
  std::optional<std::string> world;  // path relative to the script file
  std::uint64_t ticks = 0;           // run length
  std::vector<ScriptEntry> entries;  // stably sorted by tick
};

/// Times ("t", seconds) convert to ticks with `dt`. Throws ParseError.
Script parse_script(std::string_view text, double dt);
/// World path a script names, resolved against its own directory.
std::optional<std::string> script_world_path(const std::string& script_path);

struct RunReport {
  std::string scenario;
  std::uint64_t ticks = 0;
  std::map<std::string, world::TaskStatus> tasks;
  std::map<std::string, std::uint64_t> events;  // counts by kind
  std::uint64_t commands_accepted = 0;
  std::uint64_t commands_rejected = 0;
  std::string hash;
  friend bool operator==(const RunReport&, const RunReport&) = default;
};

nlohmann::json to_json(const RunReport& r);

struct ScriptResult {
  RunReport report;
  std::size_t checks = 0;
  std::vector<std::string> failures;
};

/// Headless, single-threaded run. Writes a complete log when `log` is given.
ScriptResult run_script(const world::World& world, const Script& script, record::Writer* log = nullptr);

struct ReplayOptions {
  double speed = 0.0;  // x real time; 0 runs flat out
  std::function<void(const world::Telemetry&)> on_snapshot;
};

/// Re-simulates a log from its embedded world and checks every recorded event
/// and the final hash. Throws record::CorruptLog naming the offending line.
RunReport replay(const record::Log& log, const ReplayOptions& options = {});

/// Replaces "@pending" string values with the id awaiting approval.
nlohmann::json resolve_placeholders(nlohmann::json command, const world::Simulator& sim);

}  // namespace teleop::cli
