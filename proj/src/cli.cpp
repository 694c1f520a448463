// Copyright 2026 The trilat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "trilat/cli.hpp"

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "trilat/artifacts.hpp"
#include "trilat/error.hpp"

namespace trilat {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

json manifest_for(const RunConfig& cfg, const CliOptions& opts, std::string_view mode) {
  return {
      {"mode", mode},
      {"seed", cfg.noise.seed},
      {"config_path", opts.config ? json(opts.config->string()) : json(nullptr)},
      {"output_dir", opts.out.string()},
      {"config_hash", config_hash(cfg)},
      {"iterations", cfg.session.iterations()},
      {"config", to_json(cfg)},
  };
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + file.string());
  out << j.dump(2) << '\n';
}

void print_error(std::ostream& err, std::string_view kind, std::string_view message) {
  err << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

Sensor sensor_for(int id) {
  if (id < 1 || id > 3) throw Error(Errc::Config, "client id must be 1, 2 or 3");
  return kSensors[static_cast<std::size_t>(id - 1)];
}

}  // namespace

RunConfig resolve_config(const CliOptions& opts) {
  RunConfig cfg = opts.config ? load_config(*opts.config) : RunConfig{};
  if (opts.seed) cfg.noise.seed = *opts.seed;
  if (opts.duration_s) cfg.session.duration_s = *opts.duration_s;
  if (opts.nominal_interframe_ms) {
    const int ms = *opts.nominal_interframe_ms;
    if (ms != 45 && ms != 60) throw Error(Errc::Config, "--nominal-interframe must be 45 or 60");
    cfg.session.schedule.nominal_interframe_us = Micros{ms} * 1000;
  }
  if (opts.no_sync) cfg.session.sync.enabled = false;
  if (opts.virtual_time) cfg.session.virtual_time = *opts.virtual_time;
  if (opts.host) cfg.network.host = *opts.host;
  if (opts.port) cfg.network.port = *opts.port;
  cfg.validate();
  return cfg;
}

int cmd_simulate(const CliOptions& opts, std::ostream& out) {
  const RunConfig cfg = resolve_config(opts);
  const SessionArtifacts a = run_session(cfg.scene(), cfg.noise, cfg.session);
  write_session(opts.out, a);
  json manifest = manifest_for(cfg, opts, "simulate");
  manifest["virtual_time"] = cfg.session.virtual_time;
  manifest["summary"] = to_json(a.summary);
  write_json(opts.out / kManifestFile, manifest);
  const json report = analyze_dir(opts.out);
  out << json{{"positions", report.at("positions")},
              {"iterations_trilaterated", report.at("iterations_trilaterated")},
              {"fraction_within_1ms", report.at("timing").at("fraction_within_1ms")},
              {"output_dir", opts.out.string()}}
             .dump()
      << std::endl;
  return kExitOk;
}

int cmd_analyze(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(Errc::MissingArtifact, "no artifact directory " + dir.string());
  const json report = analyze_dir(dir);
  out << json{{"positions", report.at("positions")},
              {"fraction_within_1ms", report.at("timing").at("fraction_within_1ms")},
              {"ordering_ok", report.at("timing").at("ordering_ok")}}
             .dump()
      << std::endl;
  return kExitOk;
}

int cmd_serve(const CliOptions& opts, std::ostream& out) {
  const RunConfig cfg = resolve_config(opts);
  const Scene scene = cfg.scene();
  const std::int64_t iterations = cfg.session.iterations();

  ServerOptions options;
  options.on_listening = [&out](std::uint16_t port) { out << "listening " << port << std::endl; };
  MemorySink sink;
  const SessionSummary summary =
      run_server(ServerConfig{cfg.session.schedule, iterations, scene.side}, scene.rig, sink,
                 cfg.network, options);

  fs::create_directories(opts.out);
  write_ground_truth(opts.out / kGroundTruthFile,
                     ground_truth_for(scene, cfg.session.schedule.iteration_us(), iterations));
  write_trilaterated(opts.out / kTrilateratedFile, sink.positions);
  write_events(opts.out / kEventsFile, sink.arrivals);
  json manifest = manifest_for(cfg, opts, "serve");
  manifest["virtual_time"] = false;
  manifest["summary"] = to_json(summary);
  write_json(opts.out / kManifestFile, manifest);
  const json report = analyze_dir(opts.out);
  out << json{{"positions", report.at("positions")},
              {"iterations_completed", summary.iterations_completed},
              {"iterations_skipped", summary.iterations_skipped}}
             .dump()
      << std::endl;
  return kExitOk;
}

int cmd_client(const CliOptions& opts, std::ostream& out) {
  if (!opts.client_id) throw Error(Errc::Config, "client needs --id");
  const RunConfig cfg = resolve_config(opts);
  const Sensor sensor = sensor_for(*opts.client_id);
  const auto idx = static_cast<std::size_t>(index_of(sensor));
  const std::int64_t iterations = cfg.session.iterations();

  SimulatedSensorSource source(cfg.scene(), sensor, cfg.noise, cfg.session.schedule.iteration_us(),
                               iterations);
  const ClientSummary summary =
      run_client(client_config(cfg.session, static_cast<ClientId>(*opts.client_id)), source,
                 LocalClock{cfg.noise.clock_offset_us[idx], cfg.noise.clock_drift_ppm[idx]},
                 cfg.network);

  fs::create_directories(opts.out);
  write_raw(opts.out / raw_sensor_file(sensor), source.records());
  out << json{{"client", *opts.client_id},
              {"frames_sent", summary.frames_sent},
              {"sync_bursts", summary.sync_bursts},
              {"offset_us", summary.model.offset},
              {"error_bound_us", summary.model.error_bound}}
             .dump()
      << std::endl;
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Three-sensor trilateration rig: simulate, serve, client, analyze"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string config_path;
  std::string out_dir = "out";
  std::string analyze_dir_arg;
  bool real_time = false;
  bool virtual_time = false;

  auto add_run_flags = [&](CLI::App* cmd, bool with_network) {
    cmd->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", opts.seed, "RNG seed");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--duration-s", opts.duration_s, "session length in seconds");
    cmd->add_option("--nominal-interframe", opts.nominal_interframe_ms,
                    "nominal inter-frame interval in ms (45 or 60)");
    cmd->add_flag("--no-sync", opts.no_sync, "disable clock synchronisation");
    if (with_network) {
      cmd->add_option("--host", opts.host, "server host");
      cmd->add_option("--port", opts.port, "server port");
    }
  };

  CLI::App* simulate = app.add_subcommand("simulate", "run an in-process session and analyse it");
  add_run_flags(simulate, false);
  auto* vt = simulate->add_flag("--virtual-time", virtual_time, "discrete-event virtual time");
  simulate->add_flag("--real-time", real_time, "TCP on loopback in real time")->excludes(vt);

  CLI::App* serve = app.add_subcommand("serve", "run the trilateration server over TCP");
  add_run_flags(serve, true);

  CLI::App* client = app.add_subcommand("client", "run one sensor client over TCP");
  add_run_flags(client, true);
  client->add_option("--id", opts.client_id, "client id (1, 2 or 3)")->required();

  CLI::App* analyze = app.add_subcommand("analyze", "regenerate report.json from artifacts");
  analyze->add_option("dir", analyze_dir_arg, "artifact directory")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "ConfigError", e.what());
    return kExitConfig;
  }

  if (!config_path.empty()) opts.config = config_path;
  opts.out = out_dir;
  if (virtual_time) opts.virtual_time = true;
  if (real_time) opts.virtual_time = false;

  try {
    if (simulate->parsed()) return cmd_simulate(opts, out);
    if (serve->parsed()) return cmd_serve(opts, out);
    if (client->parsed()) return cmd_client(opts, out);
    return cmd_analyze(analyze_dir_arg, out);
  } catch (const Error& e) {
    print_error(err, to_string(e.code()), e.what());
    return e.code() == Errc::Config ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    print_error(err, "RuntimeError", e.what());
    return kExitRuntime;
  }
}

}  // namespace trilat
