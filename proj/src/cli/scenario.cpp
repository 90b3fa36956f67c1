#include "teleop/cli/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <thread>

#include "teleop/common/json_fields.hpp"
#include "teleop/world/world_file.hpp"

namespace teleop::cli {

namespace jf = teleop::json_fields;
using nlohmann::json;
using world::Event;

namespace {

std::uint64_t to_tick(const json& entry, double dt, std::string_view where) {
  if (entry.contains("tick")) {
    const json& t = entry.at("tick");
    if (!t.is_number_unsigned()) throw ParseError(std::string(where) + ": 'tick' must be a non-negative integer");
    return t.get<std::uint64_t>();
  }
  const double t = jf::require_number(entry, "t", where);
  if (t < 0.0) throw ParseError(std::string(where) + ": 't' must be non-negative");
  return static_cast<std::uint64_t>(std::llround(t / dt));
}

Expectation parse_expectation(const json& j, std::string_view where) {
  if (!j.is_object()) throw ParseError(std::string(where) + ": 'expect' must be an object");
  Expectation e;
  e.source = j;
  if (j.contains("task")) {
    const auto task = world::task_from_string(jf::require_string(j, "task", where));
    const auto status = world::task_status_from_string(jf::require_string(j, "status", where));
    if (!task || !status) throw ParseError(std::string(where) + ": unknown task or status");
    e.task = {{*task, *status}};
  }
  if (j.contains("mode")) {
    const auto mode = world::mode_from_string(jf::require_string(j, "mode", where));
    if (!mode) throw ParseError(std::string(where) + ": unknown mode");
    e.mode = *mode;
  }
  if (j.contains("holding")) {
    const json& h = j.at("holding");
    const auto side = world::side_from_name(jf::require_string(h, "side", where));
    if (!side) throw ParseError(std::string(where) + ": bad holding side");
    std::optional<std::string> object;
    if (h.contains("object") && !h.at("object").is_null()) object = jf::require_string(h, "object", where);
    e.holding = {{*side, object}};
  }
  if (j.contains("plan_status")) {
    const auto s = footstep::plan_status_from_string(jf::require_string(j, "plan_status", where));
    if (!s) throw ParseError(std::string(where) + ": unknown plan status");
    e.plan_status = *s;
  }
  if (!e.task && !e.mode && !e.holding && !e.plan_status) {
    throw ParseError(std::string(where) + ": 'expect' checks nothing");
  }
  return e;
}

/// Empty when the expectation holds, else a description of the mismatch.
std::optional<std::string> check(const Expectation& e, const world::Simulator& sim) {
  const auto& s = sim.state();
  if (e.task && s.task(e.task->first) != e.task->second) {
    return std::string(world::to_string(e.task->first)) + " is " + std::string(world::to_string(s.task(e.task->first)));
  }
  if (e.mode && s.robot.mode != *e.mode) return "mode is " + std::string(world::to_string(s.robot.mode));
  if (e.holding) {
    const auto& hold = s.robot.holds[world::arm_index(e.holding->first)];
    const std::optional<std::string> held = hold ? std::optional(hold->object_id) : std::nullopt;
    if (held != e.holding->second) return "holding " + held.value_or("nothing");
  }
  if (e.plan_status) {
    if (!s.robot.active_plan) return std::string("no plan");
    if (s.robot.active_plan->status != *e.plan_status) {
      return "plan is " + std::string(footstep::to_string(s.robot.active_plan->status));
    }
  }
  return std::nullopt;
}

/// Shared bookkeeping for runs and replays.
struct Tally {
  RunReport report;
  record::EventHash hash;

  void add(const Event& e) {
    ++report.events[std::string(world::to_string(e.kind))];
    hash.add(e);
  }
  void finish(const world::Simulator& sim) {
    report.ticks = sim.tick_count();
    for (world::Task t : world::kTasks) report.tasks[std::string(world::to_string(t))] = sim.state().task(t);
    report.hash = hash.hex();
  }
};

}  // namespace

Script parse_script(std::string_view text, double dt) {
  const json doc = jf::parse_document(text, "script");
  const char* where = "script";
  if (!doc.is_object()) throw ParseError("script: expected an object");
  if (jf::require_string(doc, "format", where) != kScriptFormat) {
    throw ParseError("script: unsupported format (expected " + std::string(kScriptFormat) + ")");
  }
  Script s;
  s.name = doc.contains("name") ? jf::require_string(doc, "name", where) : std::string("script");
  if (doc.contains("world")) s.world = jf::require_string(doc, "world", where);
  const json& steps = jf::require(doc, "steps", where);
  if (!steps.is_array()) throw ParseError("script: 'steps' must be an array");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string at = "script step " + std::to_string(i);
    const json& st = steps[i];
    if (!st.is_object()) throw ParseError(at + ": expected an object");
    ScriptEntry e;
    e.index = i;
    e.tick = to_tick(st, dt, at);
    if (st.contains("command")) {
      const json& c = st.at("command");
      // Decode once now to catch mistakes early; placeholders are fine as ids.
      world::command_from_json(c);
      e.command = c;
      if (st.contains("accepted")) e.expect_accepted = jf::bool_or(st, "accepted", true, at);
    }
    if (st.contains("expect")) e.expect = parse_expectation(st.at("expect"), at);
    if (!e.command && !e.expect) throw ParseError(at + ": needs a 'command' or an 'expect'");
    s.entries.push_back(std::move(e));
  }
  std::stable_sort(s.entries.begin(), s.entries.end(),
                   [](const ScriptEntry& a, const ScriptEntry& b) { return a.tick < b.tick; });
  const double duration = jf::number_or(doc, "duration", 0.0, where);
  if (duration < 0.0) throw ParseError("script: 'duration' must be non-negative");
  s.ticks = static_cast<std::uint64_t>(std::llround(duration / dt));
  if (!s.entries.empty()) s.ticks = std::max(s.ticks, s.entries.back().tick);
  return s;
}

std::optional<std::string> script_world_path(const std::string& script_path) {
  const json doc = jf::parse_document(jf::read_file(script_path), "script");
  if (!doc.is_object() || !doc.contains("world")) return std::nullopt;
  std::filesystem::path p = jf::require_string(doc, "world", "script");
  if (p.is_relative()) p = std::filesystem::path(script_path).parent_path() / p;
  return p.lexically_normal().string();
}

json resolve_placeholders(json command, const world::Simulator& sim) {
  const auto& r = sim.state().robot;
  const std::string pending = r.pending_posture ? r.pending_posture->id : r.active_plan ? r.active_plan->id : "";
  for (auto& [key, value] : command.items()) {
    if (value.is_string() && value.get<std::string>() == "@pending") value = pending;
  }
  return command;
}

json to_json(const RunReport& r) {
  json tasks = json::object();
  for (const auto& [k, v] : r.tasks) tasks[k] = world::to_string(v);
  return json{{"scenario", r.scenario},
              {"ticks", r.ticks},
              {"tasks", tasks},
              {"events", r.events},
              {"commands", {{"accepted", r.commands_accepted}, {"rejected", r.commands_rejected}}},
              {"hash", r.hash}};
}

ScriptResult run_script(const world::World& w, const Script& script, record::Writer* log) {
  world::Simulator sim(w);
  Tally tally;
  ScriptResult result;
  tally.report.scenario = script.name;
  if (log) log->header({script.name, w.document});
  std::uint64_t seq = 0;

  auto emit = [&](const std::vector<Event>& events) {
    for (const auto& e : events) {
      tally.add(e);
      if (log) log->event(e);
    }
  };

  auto next = script.entries.begin();
  for (std::uint64_t tick = 0;; ++tick) {
    for (; next != script.entries.end() && next->tick == tick; ++next) {
      const std::string where = "step " + std::to_string(next->index) + " (tick " + std::to_string(tick) + ")";
      if (next->command) {
        const json resolved = resolve_placeholders(*next->command, sim);
        const auto r = sim.apply(world::command_from_json(resolved));
        (r.accepted ? tally.report.commands_accepted : tally.report.commands_rejected) += 1;
        if (log) log->command({tick, ++seq, "script", std::nullopt, resolved, r.accepted});
        emit(r.events);
        if (next->expect_accepted) {
          ++result.checks;
          if (*next->expect_accepted != r.accepted) {
            result.failures.push_back(where + ": command " + resolved.at("type").get<std::string>() +
                                      (r.accepted ? " was accepted" : " was rejected: " + r.message));
          }
        }
      }
      if (next->expect) {
        ++result.checks;
        if (auto why = check(*next->expect, sim)) {
          result.failures.push_back(where + ": expected " + next->expect->source.dump() + " but " + *why);
        }
      }
    }
    if (tick >= script.ticks) break;
    emit(sim.tick());
  }
  tally.finish(sim);
  if (log) log->end({tally.report.ticks, tally.report.hash});
  result.report = std::move(tally.report);
  return result;
}

RunReport replay(const record::Log& log, const ReplayOptions& options) {
  using record::CorruptLog;
  if (!log.end) throw CorruptLog(0, "log has no end record");
  world::World w;
  try {
    w = world::load_world(log.header.world.dump());
  } catch (const std::exception& e) {
    throw CorruptLog(1, std::string("embedded world: ") + e.what());
  }
  world::Simulator sim(w);
  Tally tally;
  tally.report.scenario = log.header.scenario;
  std::size_t ev = 0;

  auto verify = [&](const std::vector<Event>& events) {
    for (const auto& e : events) {
      if (ev >= log.events.size()) throw CorruptLog(log.end_line, "log is missing events the run produces");
      if (!(log.events[ev] == e)) {
        throw CorruptLog(log.event_lines[ev], "event does not match the re-simulation (expected " +
                                                  world::canonical_line(e) + ")");
      }
      ++ev;
      tally.add(e);
    }
  };

  const auto period = std::chrono::duration<double>(w.params.dt / (options.speed > 0.0 ? options.speed : 1.0));
  auto deadline = std::chrono::steady_clock::now();
  std::size_t ci = 0;
  for (std::uint64_t tick = 0;; ++tick) {
    for (; ci < log.commands.size() && log.commands[ci].tick == tick; ++ci) {
      const auto& rec = log.commands[ci];
      world::Command cmd;
      try {
        cmd = world::command_from_json(rec.command);
      } catch (const std::exception& e) {
        throw CorruptLog(log.command_lines[ci], e.what());
      }
      const auto r = sim.apply(cmd);
      if (r.accepted != rec.accepted) throw CorruptLog(log.command_lines[ci], "command outcome differs on replay");
      (r.accepted ? tally.report.commands_accepted : tally.report.commands_rejected) += 1;
      verify(r.events);
    }
    if (ci < log.commands.size() && log.commands[ci].tick < tick) {
      throw CorruptLog(log.command_lines[ci], "command tick out of order");
    }
    if (options.on_snapshot) options.on_snapshot(sim.snapshot());
    if (tick >= log.end->ticks) break;
    verify(sim.tick());
    if (options.speed > 0.0) {
      deadline += std::chrono::duration_cast<std::chrono::steady_clock::duration>(period);
      std::this_thread::sleep_until(deadline);
    }
  }
  if (ci != log.commands.size()) throw CorruptLog(log.command_lines[ci], "command recorded after the end tick");
  if (ev != log.events.size()) throw CorruptLog(log.event_lines[ev], "event the re-simulation never produces");
  tally.finish(sim);
  if (tally.report.hash != log.end->hash) throw CorruptLog(log.end_line, "determinism hash mismatch");
  return tally.report;
}

}  // namespace teleop::cli
