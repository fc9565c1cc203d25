// gmp3 command line: run, compare, serve, spawn-drone.
#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gmp3/gmp3.h"

namespace {

namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int report(gmp3_status s, const char* context) {
  std::fprintf(stderr, "error: %s: %s\n", context, gmp3_last_error());
  return s == GMP3_ERR_NUMERIC ? 2 : 1;
}

bool parse_vec3(const std::string& text, double out[3]) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) return false;
  try {
    for (int i = 0; i < 3; ++i) out[i] = std::stod(parts[i]);
  } catch (const std::exception&) {
    return false;
  }
  return true;
}

struct ConfigFlags {
  std::string profile = "default";
  std::string config_path;
  std::string optimizer;
  std::map<std::string, std::string> values;  // config key -> text

  void attach(CLI::App* app) {
    app->add_option("--profile", profile, "parameter profile (" + std::string(gmp3_profile_names()) + ")");
    app->add_option("--config", config_path, "JSON config applied on top of the profile");
    app->add_option("--optimizer", optimizer, "alias of --optimizer.kind (" + std::string(gmp3_optimizer_kinds()) + ")");
    for (const auto& key : split(gmp3_config_keys(), ',')) {
      app->add_option_function<std::string>(
          "--" + key, [this, key](const std::string& v) { values[key] = v; }, "config key " + key);
    }
  }

  /// Profile, then config file, then --optimizer, then individual keys in table order.
  gmp3_status build(gmp3_config** out) const {
    gmp3_config* cfg = nullptr;
    gmp3_status s = gmp3_config_from_profile(profile.c_str(), &cfg);
    if (s != GMP3_OK) return s;
    if (!config_path.empty() && (s = gmp3_config_load(cfg, config_path.c_str())) != GMP3_OK) {
      gmp3_config_free(cfg);
      return s;
    }
    if (!optimizer.empty() && (s = gmp3_config_set(cfg, "optimizer.kind", optimizer.c_str())) != GMP3_OK) {
      gmp3_config_free(cfg);
      return s;
    }
    for (const auto& key : split(gmp3_config_keys(), ',')) {
      auto it = values.find(key);
      if (it == values.end()) continue;
      if ((s = gmp3_config_set(cfg, key.c_str(), it->second.c_str())) != GMP3_OK) {
        gmp3_config_free(cfg);
        return s;
      }
    }
    *out = cfg;
    return GMP3_OK;
  }
};

bool check_file(const std::string& path, const char* what) {
  if (fs::is_regular_file(path)) return true;
  std::fprintf(stderr, "error: %s '%s' does not exist\n", what, path.c_str());
  return false;
}

int cmd_run(const std::string& scenario_path, const ConfigFlags& flags, const std::string& out_dir,
            std::string trajectory_path, std::string metrics_path) {
  if (!check_file(scenario_path, "scenario file")) return 1;
  if (!flags.config_path.empty() && !check_file(flags.config_path, "config file")) return 1;

  gmp3_scenario* raw_scenario = nullptr;
  if (auto s = gmp3_scenario_load(scenario_path.c_str(), &raw_scenario); s != GMP3_OK) return report(s, "scenario");
  std::unique_ptr<gmp3_scenario, void (*)(gmp3_scenario*)> scenario(raw_scenario, gmp3_scenario_free);
  gmp3_config* raw_cfg = nullptr;
  if (auto s = flags.build(&raw_cfg); s != GMP3_OK) return report(s, "config");
  std::unique_ptr<gmp3_config, void (*)(gmp3_config*)> cfg(raw_cfg, gmp3_config_free);

  gmp3_result* raw_result = nullptr;
  const gmp3_status ps = gmp3_plan(scenario.get(), cfg.get(), &raw_result);
  if (!raw_result) return report(ps, "plan");
  std::unique_ptr<gmp3_result, void (*)(gmp3_result*)> result(raw_result, gmp3_result_free);

  if (trajectory_path.empty()) trajectory_path = (fs::path(out_dir) / "trajectory.csv").string();
  if (metrics_path.empty()) metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  std::error_code ec;
  fs::create_directories(fs::path(trajectory_path).parent_path().empty() ? fs::path(".") : fs::path(trajectory_path).parent_path(), ec);
  fs::create_directories(fs::path(metrics_path).parent_path().empty() ? fs::path(".") : fs::path(metrics_path).parent_path(), ec);
  if (auto s = gmp3_result_export(result.get(), trajectory_path.c_str(), metrics_path.c_str()); s != GMP3_OK) {
    return report(s, "export");
  }

  gmp3_summary sum{};
  gmp3_result_summary(result.get(), &sum);
  std::printf("initial loss     %.9g\n", sum.initial_loss);
  std::printf("best loss        %.9g\n", sum.best_loss);
  std::printf("initial nu       %.9g\n", sum.initial_violation);
  std::printf("final nu         %.9g\n", sum.final_violation);
  std::printf("iterations       %zu\n", sum.iterations);
  std::printf("samples          %zu (dt %.9g)\n", sum.samples, sum.dt);
  std::printf("max speed        %.9g m/s\n", sum.max_linear_speed);
  std::printf("trajectory       %s\n", trajectory_path.c_str());
  std::printf("metrics          %s\n", metrics_path.c_str());
  if (ps == GMP3_ERR_NUMERIC) {
    std::fprintf(stderr, "error: numeric failure: %s\n", gmp3_result_failure(result.get()));
    return 2;
  }
  return 0;
}

struct CompareRow {
  std::string optimizer;
  bool influence = false;
  gmp3_summary summary{};
  std::string curve;
  bool failed = false;
};

int cmd_compare(const std::string& scenario_path, const ConfigFlags& flags, const std::string& optimizers_text,
                const std::string& influence_mode, const std::string& out_dir) {
  if (!check_file(scenario_path, "scenario file")) return 1;
  if (!flags.config_path.empty() && !check_file(flags.config_path, "config file")) return 1;
  auto optimizers = split(optimizers_text, ',');
  if (optimizers.empty()) {
    std::fprintf(stderr, "error: empty optimizer list (valid: %s)\n", gmp3_optimizer_kinds());
    return 1;
  }
  const auto valid = split(gmp3_optimizer_kinds(), ',');
  for (const auto& o : optimizers) {
    if (std::find(valid.begin(), valid.end(), o) == valid.end()) {
      std::fprintf(stderr, "error: unknown optimizer '%s' (valid: %s)\n", o.c_str(), gmp3_optimizer_kinds());
      return 1;
    }
  }
  std::sort(optimizers.begin(), optimizers.end());
  optimizers.erase(std::unique(optimizers.begin(), optimizers.end()), optimizers.end());
  std::vector<bool> influences;
  if (influence_mode == "both") influences = {false, true};
  else if (influence_mode == "on") influences = {true};
  else if (influence_mode == "off") influences = {false};
  else {
    std::fprintf(stderr, "error: --influence must be both, on or off\n");
    return 1;
  }

  gmp3_scenario* raw_scenario = nullptr;
  if (auto s = gmp3_scenario_load(scenario_path.c_str(), &raw_scenario); s != GMP3_OK) return report(s, "scenario");
  std::unique_ptr<gmp3_scenario, void (*)(gmp3_scenario*)> scenario(raw_scenario, gmp3_scenario_free);
  gmp3_config* raw_base = nullptr;
  if (auto s = flags.build(&raw_base); s != GMP3_OK) return report(s, "config");
  std::unique_ptr<gmp3_config, void (*)(gmp3_config*)> base(raw_base, gmp3_config_free);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::vector<CompareRow> rows;
  for (const auto& opt : optimizers) {
    for (bool inf : influences) {
      std::unique_ptr<gmp3_config, void (*)(gmp3_config*)> cfg(gmp3_config_clone(base.get()), gmp3_config_free);
      if (auto s = gmp3_config_set(cfg.get(), "optimizer.kind", opt.c_str()); s != GMP3_OK) return report(s, "config");
      if (auto s = gmp3_config_set(cfg.get(), "influence_aware", inf ? "true" : "false"); s != GMP3_OK) {
        return report(s, "config");
      }
      gmp3_result* raw = nullptr;
      const gmp3_status ps = gmp3_plan(scenario.get(), cfg.get(), &raw);
      if (!raw) return report(ps, "plan");
      std::unique_ptr<gmp3_result, void (*)(gmp3_result*)> result(raw, gmp3_result_free);
      CompareRow row;
      row.optimizer = opt;
      row.influence = inf;
      row.failed = ps == GMP3_ERR_NUMERIC;
      gmp3_result_summary(result.get(), &row.summary);
      row.curve = (fs::path(out_dir) / ("curve_" + opt + (inf ? "_influence" : "_plain") + ".csv")).string();
      const double* curve = nullptr;
      std::size_t n = 0;
      gmp3_result_history(result.get(), GMP3_HISTORY_NORMALIZED_LOSS, &curve, &n);
      if (FILE* f = std::fopen(row.curve.c_str(), "wb")) {
        std::fprintf(f, "iteration,normalized_loss\n");
        for (std::size_t i = 0; i < n; ++i) std::fprintf(f, "%zu,%.9g\n", i + 1, curve[i]);
        std::fclose(f);
      } else {
        std::fprintf(stderr, "error: cannot write %s\n", row.curve.c_str());
        return 1;
      }
      rows.push_back(row);
    }
  }

  const std::string table_path = (fs::path(out_dir) / "compare.csv").string();
  FILE* table = std::fopen(table_path.c_str(), "wb");
  if (!table) {
    std::fprintf(stderr, "error: cannot write %s\n", table_path.c_str());
    return 1;
  }
  std::fprintf(table, "optimizer,influence,best_loss,final_violation,iterations,curve\n");
  std::printf("%-10s %-9s %-14s %-14s %-10s %s\n", "optimizer", "influence", "best_loss", "final_nu", "iterations",
              "curve");
  for (const auto& r : rows) {
    std::fprintf(table, "%s,%d,%.9g,%.9g,%zu,%s\n", r.optimizer.c_str(), r.influence ? 1 : 0, r.summary.best_loss,
                 r.summary.final_violation, r.summary.iterations, r.curve.c_str());
    std::printf("%-10s %-9s %-14.9g %-14.9g %-10zu %s%s\n", r.optimizer.c_str(), r.influence ? "on" : "off",
                r.summary.best_loss, r.summary.final_violation, r.summary.iterations, r.curve.c_str(),
                r.failed ? "  (numeric failure)" : "");
  }
  std::fclose(table);

  for (bool inf : influences) {
    std::vector<const CompareRow*> ranked;
    for (const auto& r : rows) {
      if (r.influence == inf && !r.failed) ranked.push_back(&r);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const CompareRow* a, const CompareRow* b) { return a->summary.best_loss < b->summary.best_loss; });
    std::printf("ranking (influence %s):", inf ? "on" : "off");
    for (const auto* r : ranked) std::printf(" %s", r->optimizer.c_str());
    std::printf("\n");
  }
  for (const auto& r : rows) {
    if (r.failed) return 2;
  }
  return 0;
}

/// Blocks SIGINT/SIGTERM in every thread started after this call.
sigset_t block_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

/// Waits for a signal or until done() holds; true when a signal arrived.
template <class Done>
bool wait_signal(const sigset_t& set, Done done) {
  const timespec tick{0, 100'000'000};
  while (!done()) {
    if (sigtimedwait(&set, nullptr, &tick) > 0) return true;
  }
  return false;
}

struct ServeFlags {
  std::string host = "127.0.0.1";
  int drone_port = 47800;
  int http_port = 8080;
  double rate = 5.0;
  double speed_cap = 0.25;
  std::string fence_min = "-5,-5,0";
  std::string fence_max = "5,5,5";
  std::string generator = "passthrough";
  std::string environment;
  std::vector<std::string> load;
};

int cmd_serve(const ServeFlags& sf, const ConfigFlags& flags) {
  gmp3_station_options o;
  gmp3_station_options_default(&o);
  o.host = sf.host.c_str();
  o.drone_port = sf.drone_port;
  o.http_port = sf.http_port;
  o.telemetry_rate = sf.rate;
  o.speed_cap = sf.speed_cap;
  o.generator = sf.generator.c_str();
  if (!parse_vec3(sf.fence_min, o.fence_min) || !parse_vec3(sf.fence_max, o.fence_max)) {
    std::fprintf(stderr, "error: fence corners must be x,y,z\n");
    return 1;
  }
  if (!sf.environment.empty()) {
    if (!check_file(sf.environment, "environment file")) return 1;
    o.environment_path = sf.environment.c_str();
  }
  gmp3_config* raw_cfg = nullptr;
  if (auto s = flags.build(&raw_cfg); s != GMP3_OK) return report(s, "config");
  std::unique_ptr<gmp3_config, void (*)(gmp3_config*)> cfg(raw_cfg, gmp3_config_free);

  const sigset_t signals = block_signals();
  gmp3_station* raw = nullptr;
  if (auto s = gmp3_station_create(&o, cfg.get(), &raw); s != GMP3_OK) return report(s, "station");
  std::unique_ptr<gmp3_station, void (*)(gmp3_station*)> station(raw, gmp3_station_free);
  if (auto s = gmp3_station_start(station.get()); s != GMP3_OK) return report(s, "serve");
  for (const auto& line : sf.load) {
    char* out = nullptr;
    if (auto s = gmp3_station_console(station.get(), line.c_str(), &out); s != GMP3_OK) {
      gmp3_station_stop(station.get());
      return report(s, "console");
    }
    std::printf("%s", out);
    gmp3_string_free(out);
  }
  std::printf("drones on %s:%d, http on %s:%d\n", sf.host.c_str(), gmp3_station_drone_port(station.get()),
              sf.host.c_str(), gmp3_station_http_port(station.get()));
  std::fflush(stdout);
  wait_signal(signals, [] { return false; });
  std::printf("shutting down\n");
  gmp3_station_stop(station.get());
  return 0;
}

struct DroneFlags {
  std::string id = "d1";
  std::string host = "127.0.0.1";
  int port = 47800;
  double rate = 5.0;
  double speed_cap = 0.25;
  std::string start = "0,0,0";
};

int cmd_spawn(const DroneFlags& df) {
  gmp3_drone_options o;
  gmp3_drone_options_default(&o);
  o.id = df.id.c_str();
  o.host = df.host.c_str();
  o.port = df.port;
  o.rate = df.rate;
  o.speed_cap = df.speed_cap;
  if (!parse_vec3(df.start, o.start)) {
    std::fprintf(stderr, "error: --start-pos must be x,y,z\n");
    return 1;
  }
  const sigset_t signals = block_signals();
  gmp3_drone* raw = nullptr;
  if (auto s = gmp3_drone_create(&o, &raw); s != GMP3_OK) return report(s, "drone");
  std::unique_ptr<gmp3_drone, void (*)(gmp3_drone*)> drone(raw, gmp3_drone_free);

  std::atomic<bool> done{false};
  gmp3_status run_status = GMP3_OK;
  std::string run_error;
  std::thread worker([&] {
    run_status = gmp3_drone_run(drone.get());
    if (run_status != GMP3_OK) run_error = gmp3_last_error();
    done = true;
  });
  std::printf("drone %s -> %s:%d\n", df.id.c_str(), df.host.c_str(), df.port);
  std::fflush(stdout);
  if (wait_signal(signals, [&] { return done.load(); })) gmp3_drone_stop(drone.get());
  worker.join();

  double sp[5];
  const std::size_t n = gmp3_drone_setpoint_count(drone.get());
  if (gmp3_drone_last_setpoint(drone.get(), sp) == GMP3_OK) {
    std::printf("setpoints %zu, last %.9g,%.9g,%.9g yaw %.9g\n", n, sp[1], sp[2], sp[3], sp[4]);
  } else {
    std::printf("setpoints 0\n");
  }
  if (run_status != GMP3_OK) {
    std::fprintf(stderr, "error: drone: %s\n", run_error.c_str());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GMP3 SE(3) trajectory planner and drone ground station"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "plan one scenario and export CSVs");
  std::string run_scenario, run_out = ".", run_traj, run_metrics;
  ConfigFlags run_flags;
  run->add_option("scenario", run_scenario, "scenario JSON")->required();
  run->add_option("--out-dir", run_out, "directory for trajectory.csv and metrics.csv");
  run->add_option("--trajectory", run_traj, "trajectory CSV path");
  run->add_option("--metrics", run_metrics, "metrics CSV path");
  run_flags.attach(run);

  auto* compare = app.add_subcommand("compare", "compare optimizers with and without influence");
  std::string cmp_scenario, cmp_out = "compare_out", cmp_opts = gmp3_optimizer_kinds(), cmp_influence = "both";
  ConfigFlags cmp_flags;
  compare->add_option("scenario", cmp_scenario, "scenario JSON")->required();
  compare->add_option("--optimizers", cmp_opts, "comma separated optimizer kinds");
  compare->add_option("--influence", cmp_influence, "both, on or off");
  compare->add_option("--out-dir", cmp_out, "directory for compare.csv and curves");
  cmp_flags.attach(compare);

  auto* serve = app.add_subcommand("serve", "run the ground station");
  ServeFlags sf;
  ConfigFlags serve_flags;
  serve_flags.profile = "paper_rmsprop";
  serve->add_option("--host", sf.host);
  serve->add_option("--drone-port", sf.drone_port, "drone TCP port (0: any)");
  serve->add_option("--http-port", sf.http_port, "operator HTTP port (0: any)");
  serve->add_option("--rate", sf.rate, "telemetry Hz");
  serve->add_option("--speed-cap", sf.speed_cap, "m/s");
  serve->add_option("--fence-min", sf.fence_min, "x,y,z");
  serve->add_option("--fence-max", sf.fence_max, "x,y,z");
  serve->add_option("--generator", sf.generator, "passthrough or gmp3");
  serve->add_option("--environment", sf.environment, "scenario JSON with obstacles for the gmp3 generator");
  serve->add_option("--load", sf.load, "console line run at startup, e.g. 'load fleet_monitor'");
  serve_flags.attach(serve);

  auto* spawn = app.add_subcommand("spawn-drone", "run one simulated drone");
  DroneFlags df;
  spawn->add_option("--id", df.id);
  spawn->add_option("--host", df.host);
  spawn->add_option("--port", df.port);
  spawn->add_option("--rate", df.rate, "telemetry Hz");
  spawn->add_option("--speed-cap", df.speed_cap, "m/s");
  spawn->add_option("--start-pos", df.start, "x,y,z");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*run) return cmd_run(run_scenario, run_flags, run_out, run_traj, run_metrics);
  if (*compare) return cmd_compare(cmp_scenario, cmp_flags, cmp_opts, cmp_influence, cmp_out);
  if (*serve) return cmd_serve(sf, serve_flags);
  if (*spawn) return cmd_spawn(df);
  return 1;
}
