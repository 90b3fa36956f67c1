#include "teleop/cli/app.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "teleop/cli/scenario.hpp"
#include "teleop/common/json_fields.hpp"
#include "teleop/footstep/plan.hpp"
#include "teleop/server/tcp.hpp"
#include "teleop/world/world_file.hpp"

namespace teleop::cli {

namespace jf = teleop::json_fields;
using nlohmann::json;

namespace {

std::string env(const char* name) { return std::string(kEnvPrefix) + name; }

world::World load_or_throw(const std::string& path, std::optional<std::uint64_t> seed) {
  if (path.empty()) throw ParseError("no world file given (--world or " + env("WORLD") + ")");
  return world::load_world_file(path, seed);
}

volatile std::sig_atomic_t g_interrupted = 0;

extern "C" void on_signal(int) { g_interrupted = 1; }

/// Installs SIGINT/SIGTERM handlers for the lifetime of the object.
class InterruptGuard {
 public:
  InterruptGuard() {
    g_interrupted = 0;
    struct sigaction sa {};
    sa.sa_handler = on_signal;
    sigemptyset(&sa.sa_mask);
    sigaction(SIGINT, &sa, &old_int_);
    sigaction(SIGTERM, &sa, &old_term_);
  }
  ~InterruptGuard() {
    sigaction(SIGINT, &old_int_, nullptr);
    sigaction(SIGTERM, &old_term_, nullptr);
  }

 private:
  struct sigaction old_int_ {}, old_term_ {};
};

int serve_replay(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<record::Log> log;
  std::optional<world::World> w;
  try {
    log = record::read_log_file(a.log);
  } catch (const record::CorruptLog& e) {
    err << "corrupt log " << a.log << ": " << e.what() << "\n";
    return kCorruptLog;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadConfig;
  }
  try {
    w = world::load_world(log->header.world.dump());
  } catch (const Error& e) {
    err << "corrupt log " << a.log << ": line 1: embedded world: " << e.what() << "\n";
    return kCorruptLog;
  }
  const std::uint64_t last_tick = log->end ? log->end->ticks
                                  : log->events.empty() ? 0
                                                        : log->events.back().tick;
  const double speed = a.speed > 0 ? a.speed : 1.0;

  server::CoreOptions opt;
  opt.read_only = true;
  opt.scenario = log->header.scenario;
  server::ServerCore core(*w, opt);
  std::optional<server::TcpServer> srv;
  try {
    srv.emplace(core, server::ServerOptions{"127.0.0.1", *a.port, speed / w->params.dt});
  } catch (const server::BindError& e) {
    err << "error: " << e.what() << "\n";
    return kBindFailure;
  }
  out << "replaying " << a.log << " on port " << srv->port() << " (waiting for a session)" << std::endl;

  InterruptGuard guard;
  std::size_t next = 0;
  using Hook = server::TcpServer::HookResult;
  srv->start([&](server::ServerCore& c) {
    if (g_interrupted) return Hook::Stop;
    if (c.sim().tick_count() == 0 && next == 0 && c.session_count() == 0) return Hook::Skip;
    if (c.sim().tick_count() >= last_tick && next == log->commands.size()) return Hook::Stop;
    for (; next < log->commands.size() && log->commands[next].tick == c.sim().tick_count(); ++next) {
      c.inject(world::command_from_json(log->commands[next].command), log->commands[next].source);
    }
    if (c.sim().tick_count() < last_tick) return Hook::Step;
    c.flush(srv->now_ms());  // commands recorded after the final tick
    return Hook::Skip;
  });
  srv->wait();
  // Let observers collect the tail of the stream.
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  const auto [ticks, hash] = srv->with_core([](server::ServerCore& c) {
    return std::pair{c.sim().tick_count(), c.hash()};
  });
  srv->stop();
  json report = {{"scenario", log->header.scenario}, {"ticks", ticks}, {"hash", hash}};
  if (log->end) report["matches_log"] = hash == log->end->hash;
  out << report.dump(2) << "\n";
  return kOk;
}

}  // namespace

int run_command(const RunArgs& a, std::ostream& out, std::ostream& err) {
  std::optional<ScriptResult> result;
  try {
    if (a.script.empty()) throw ParseError("no script given (--script or " + env("SCRIPT") + ")");
    std::string world_path = a.world;
    if (world_path.empty()) world_path = script_world_path(a.script).value_or("");
    const world::World w = load_or_throw(world_path, a.seed);
    const Script script = parse_script(jf::read_file(a.script), w.params.dt);
    std::ofstream log_file;
    std::optional<record::Writer> log;
    if (!a.log.empty()) {
      log_file.open(a.log);
      if (!log_file) throw ParseError("cannot write log " + a.log);
      log.emplace(log_file);
    }
    result = run_script(w, script, log ? &*log : nullptr);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadConfig;
  }
  json report = to_json(result->report);
  report["checks"] = result->checks;
  report["failures"] = result->failures;
  out << report.dump(2) << "\n";
  for (const auto& f : result->failures) err << "assertion failed: " << f << "\n";
  return result->failures.empty() ? kOk : kAssertionFailed;
}

int replay_command(const ReplayArgs& a, std::ostream& out, std::ostream& err) {
  // Environment values bypass the flag validators, so check again here.
  if (!(a.speed >= 0.0) || !std::isfinite(a.speed)) {
    err << "error: speed must be a non-negative number\n";
    return kBadConfig;
  }
  if (a.port && (*a.port < 0 || *a.port > 65535)) {
    err << "error: port out of range\n";
    return kBadConfig;
  }
  if (a.port) return serve_replay(a, out, err);
  try {
    const record::Log log = record::read_log_file(a.log);
    std::ofstream snaps;
    ReplayOptions opt;
    opt.speed = a.speed;
    if (!a.snapshots.empty()) {
      snaps.open(a.snapshots);
      if (!snaps) {
        err << "error: cannot write " << a.snapshots << "\n";
        return kBadConfig;
      }
      opt.on_snapshot = [&snaps](const world::Telemetry& t) { snaps << world::to_json(t).dump() << "\n"; };
    }
    const RunReport report = replay(log, opt);
    out << to_json(report).dump(2) << "\n";
    return kOk;
  } catch (const record::CorruptLog& e) {
    err << "corrupt log " << a.log << ": " << e.what() << "\n";
    return kCorruptLog;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadConfig;
  }
}

int validate_command(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  if (a.world.empty() && a.script.empty() && a.plan.empty() && a.log.empty()) {
    err << "error: nothing to validate (give --world, --script, --plan or --log)\n";
    return kBadConfig;
  }
  json report = json::object();
  try {
    std::optional<world::World> w;
    if (!a.world.empty()) {
      w = world::load_world_file(a.world, a.seed);
      std::size_t no_step = w->initial.map->no_step_cells().size();
      report["world"] = {{"name", w->name},
                         {"objects", w->initial.objects.size()},
                         {"no_step_cells", no_step},
                         {"protected_cells", w->tasks.protected_cells.size()}};
    }
    if (!a.script.empty()) {
      const double dt = w ? w->params.dt : world::SimParams{}.dt;
      const Script s = parse_script(jf::read_file(a.script), dt);
      report["script"] = {{"name", s.name}, {"entries", s.entries.size()}, {"ticks", s.ticks}};
    }
    if (!a.log.empty()) {
      const record::Log log = record::read_log_file(a.log);
      report["log"] = {{"scenario", log.header.scenario},
                       {"commands", log.commands.size()},
                       {"events", log.events.size()},
                       {"complete", log.end.has_value()}};
    }
    if (!a.plan.empty()) {
      if (!w) throw ParseError("--plan needs --world for the map and step constraints");
      const auto plan = footstep::plan_from_json(jf::parse_document(jf::read_file(a.plan), "plan"));
      const auto violations = footstep::validate_plan(*w->initial.map, plan, plan.start, w->constraints);
      json v = json::array();
      for (const auto& pv : violations) v.push_back({{"index", pv.index}, {"code", footstep::to_string(pv.code)}});
      report["plan"] = {{"id", plan.id}, {"steps", plan.steps.size()}, {"violations", v}};
      out << report.dump(2) << "\n";
      return violations.empty() ? kOk : kAssertionFailed;
    }
  } catch (const record::CorruptLog& e) {
    err << "corrupt log " << a.log << ": " << e.what() << "\n";
    return kCorruptLog;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadConfig;
  }
  out << report.dump(2) << "\n";
  return kOk;
}

int serve_command(const ServeArgs& a, std::ostream& out, std::ostream& err) {
  if (!(a.tick_hz > 0.0) || !std::isfinite(a.tick_hz) || !(a.telemetry_hz > 0.0) ||
      a.telemetry_hz > server::kMaxTelemetryRate || a.port < 0 || a.port > 65535 || !(a.duration >= 0.0)) {
    err << "error: tick rate must be positive, telemetry rate in (0, 60], port in [0, 65535]\n";
    return kBadConfig;
  }
  std::optional<world::World> w;
  try {
    w = load_or_throw(a.world, a.seed);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kBadConfig;
  }
  const std::string log_path = a.log.empty() ? std::string(kDefaultServeLog) : a.log;
  std::ofstream log_file(log_path);
  if (!log_file) {
    err << "error: cannot write log " << log_path << "\n";
    return kBadConfig;
  }
  record::Writer writer(log_file);
  server::CoreOptions opt;
  opt.default_telemetry_rate = a.telemetry_hz;
  server::ServerCore core(*w, opt, &writer);
  std::optional<server::TcpServer> srv;
  try {
    srv.emplace(core, server::ServerOptions{"127.0.0.1", a.port, a.tick_hz});
  } catch (const server::BindError& e) {
    err << "error: " << e.what() << "\n";
    return kBindFailure;
  }
  out << "listening on 127.0.0.1:" << srv->port() << " world " << w->name << " log " << log_path << std::endl;

  InterruptGuard guard;
  srv->start();
  const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(a.duration);
  while (!g_interrupted && (a.duration <= 0 || std::chrono::steady_clock::now() < until)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  srv->stop();
  out << json{{"ticks", core.sim().tick_count()}, {"hash", core.hash()}, {"log", log_path}}.dump(2) << "\n";
  return kOk;
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Desk-scale humanoid teleoperation simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run a scripted scenario headless and print its report");
  run_cmd->add_option("--script", run.script, "script file")->envname(env("SCRIPT"));
  run_cmd->add_option("--world", run.world, "world file (default: the script's world)")->envname(env("WORLD"));
  run_cmd->add_option("--log", run.log, "write the event log here")->envname(env("LOG"));
  run_cmd->add_option("--seed", run.seed, "seed for random obstacles")->envname(env("SEED"));

  ReplayArgs rep;
  auto* rep_cmd = app.add_subcommand("replay", "re-simulate a log and check it");
  rep_cmd->add_option("--log", rep.log, "event log")->envname(env("LOG"))->required();
  rep_cmd->add_option("--speed", rep.speed, "x real time; 0 = as fast as possible")
      ->envname(env("SPEED"))
      ->check(CLI::NonNegativeNumber);
  rep_cmd->add_option("--snapshots", rep.snapshots, "write per-tick telemetry (NDJSON)");
  rep_cmd->add_option("--port", rep.port, "serve the replay to observer sessions")->envname(env("PORT"));

  ValidateArgs val;
  auto* val_cmd = app.add_subcommand("validate", "check world, script, plan or log files");
  val_cmd->add_option("--world", val.world, "world file")->envname(env("WORLD"));
  val_cmd->add_option("--script", val.script, "script file")->envname(env("SCRIPT"));
  val_cmd->add_option("--plan", val.plan, "footstep plan file (needs --world)");
  val_cmd->add_option("--log", val.log, "event log")->envname(env("LOG"));
  val_cmd->add_option("--seed", val.seed, "seed for random obstacles")->envname(env("SEED"));

  ServeArgs srv;
  auto* srv_cmd = app.add_subcommand("serve", "run the simulator behind the teleop server");
  srv_cmd->add_option("--world", srv.world, "world file")->envname(env("WORLD"));
  srv_cmd->add_option("--port", srv.port, "TCP port (0 picks a free one)")->envname(env("PORT"));
  srv_cmd->add_option("--tick-hz", srv.tick_hz, "simulation rate")->envname(env("TICK_HZ"))->check(CLI::PositiveNumber);
  srv_cmd->add_option("--telemetry-hz", srv.telemetry_hz, "default telemetry rate")
      ->envname(env("TELEMETRY_HZ"))
      ->check(CLI::Range(0.1, 60.0));
  srv_cmd->add_option("--log", srv.log, "event log file")->envname(env("LOG"));
  srv_cmd->add_option("--seed", srv.seed, "seed for random obstacles")->envname(env("SEED"));
  srv_cmd->add_option("--duration", srv.duration, "stop after this many seconds")->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadConfig;
  }
  // CLI11 silently drops environment values that fail validation; refuse them instead.
  for (const CLI::App* sub : app.get_subcommands()) {
    for (const CLI::Option* opt : sub->get_options()) {
      const std::string name = opt->get_envname();
      const char* value = name.empty() ? nullptr : std::getenv(name.c_str());
      if (value && *value && opt->count() == 0) {
        err << "error: invalid value '" << value << "' in " << name << " for " << opt->get_name() << "\n";
        return kBadConfig;
      }
    }
  }
  try {
    if (*run_cmd) return run_command(run, out, err);
    if (*rep_cmd) return replay_command(rep, out, err);
    if (*val_cmd) return validate_command(val, out, err);
    return serve_command(srv, out, err);
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace teleop::cli
