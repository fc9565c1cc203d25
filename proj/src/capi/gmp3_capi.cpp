#include "gmp3/gmp3.h"

#include <chrono>
#include <cstring>
#include <string>

#include "core/config_io.hpp"
#include "core/errors.hpp"
#include "core/export.hpp"
#include "core/planner.hpp"
#include "sim/drone_client.hpp"
#include "station/server.hpp"

struct gmp3_scenario {
  gmp3::Scenario value;
};
struct gmp3_config {
  gmp3::PlannerConfig value;
};
struct gmp3_result {
  gmp3::PlanResult value;
  double wall_seconds = 0.0;
};
struct gmp3_station {
  std::unique_ptr<gmp3::StationServer> server;
};
struct gmp3_drone {
  std::unique_ptr<gmp3::DroneClient> client;
};

namespace {

thread_local std::string g_last_error;

gmp3_status fail(gmp3_status s, const std::string& what) {
  g_last_error = what;
  return s;
}

gmp3_status invalid(const char* what) { return fail(GMP3_ERR_INVALID_ARGUMENT, what); }

template <class F>
gmp3_status guarded(F&& f) {
  g_last_error.clear();
  try {
    return f();
  } catch (const gmp3::net::PortBusy& e) {
    return fail(GMP3_ERR_PORT_BUSY, e.what());
  } catch (const gmp3::IoError& e) {
    return fail(GMP3_ERR_IO, e.what());
  } catch (const gmp3::NotFound& e) {
    return fail(GMP3_ERR_NOT_FOUND, e.what());
  } catch (const gmp3::NumericFailure& e) {
    return fail(GMP3_ERR_NUMERIC, e.what());
  } catch (const gmp3::PluginError& e) {
    return fail(GMP3_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(GMP3_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::domain_error& e) {
    return fail(GMP3_ERR_NUMERIC, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(GMP3_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(GMP3_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(GMP3_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(GMP3_ERR_INTERNAL, "unknown error");
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

extern "C" {

const char* gmp3_last_error(void) { return g_last_error.c_str(); }

const char* gmp3_status_name(gmp3_status status) {
  switch (status) {
    case GMP3_OK: return "OK";
    case GMP3_ERR_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case GMP3_ERR_NUMERIC: return "NUMERIC";
    case GMP3_ERR_IO: return "IO";
    case GMP3_ERR_NOT_FOUND: return "NOT_FOUND";
    case GMP3_ERR_PORT_BUSY: return "PORT_BUSY";
    case GMP3_ERR_STATE: return "STATE";
    case GMP3_ERR_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

const char* gmp3_version(void) { return "0.1.0"; }

void gmp3_string_free(char* s) { std::free(s); }

const char* gmp3_optimizer_kinds(void) {
  static const std::string kinds = [] {
    std::vector<std::string> v;
    for (auto k : gmp3::kAllOptimizers) v.emplace_back(gmp3::to_string(k));
    return join(v);
  }();
  return kinds.c_str();
}

const char* gmp3_profile_names(void) {
  static const std::string names = join(gmp3::profile_names());
  return names.c_str();
}

const char* gmp3_config_keys(void) {
  static const std::string keys = join(gmp3::config_keys());
  return keys.c_str();
}

gmp3_status gmp3_scenario_load(const char* path, gmp3_scenario** out) {
  if (!path || !out) return invalid("null argument");
  return guarded([&] {
    *out = new gmp3_scenario{gmp3::load_scenario(path)};
    return GMP3_OK;
  });
}

gmp3_status gmp3_scenario_from_json(const char* json, gmp3_scenario** out) {
  if (!json || !out) return invalid("null argument");
  return guarded([&] {
    *out = new gmp3_scenario{gmp3::scenario_from_json(nlohmann::json::parse(json))};
    return GMP3_OK;
  });
}

void gmp3_scenario_free(gmp3_scenario* scenario) { delete scenario; }

gmp3_status gmp3_config_default(gmp3_config** out) {
  if (!out) return invalid("null argument");
  return guarded([&] {
    *out = new gmp3_config{gmp3::profile_config("default")};
    return GMP3_OK;
  });
}

gmp3_status gmp3_config_from_profile(const char* profile, gmp3_config** out) {
  if (!profile || !out) return invalid("null argument");
  return guarded([&] {
    *out = new gmp3_config{gmp3::profile_config(profile)};
    return GMP3_OK;
  });
}

gmp3_status gmp3_config_load(gmp3_config* cfg, const char* path) {
  if (!cfg || !path) return invalid("null argument");
  return guarded([&] {
    cfg->value = gmp3::load_config(path, cfg->value);
    return GMP3_OK;
  });
}

gmp3_status gmp3_config_set(gmp3_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid("null argument");
  return guarded([&] {
    gmp3::PlannerConfig copy = cfg->value;
    gmp3::set_config_value(copy, key, value);
    copy.validate();
    cfg->value = std::move(copy);
    return GMP3_OK;
  });
}

gmp3_status gmp3_config_to_json(const gmp3_config* cfg, char** out) {
  if (!cfg || !out) return invalid("null argument");
  return guarded([&] {
    *out = dup(gmp3::config_to_json(cfg->value).dump(2));
    return GMP3_OK;
  });
}

gmp3_config* gmp3_config_clone(const gmp3_config* cfg) { return cfg ? new gmp3_config{cfg->value} : nullptr; }

void gmp3_config_free(gmp3_config* cfg) { delete cfg; }

gmp3_status gmp3_plan(const gmp3_scenario* scenario, const gmp3_config* cfg, gmp3_result** out) {
  if (!scenario || !cfg || !out) return invalid("null argument");
  *out = nullptr;
  return guarded([&] {
    const auto t0 = std::chrono::steady_clock::now();
    auto* r = new gmp3_result{gmp3::plan(scenario->value, cfg->value), 0.0};
    r->wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    *out = r;
    if (r->value.failed) return fail(GMP3_ERR_NUMERIC, r->value.failure);
    return GMP3_OK;
  });
}

gmp3_status gmp3_result_summary(const gmp3_result* result, gmp3_summary* out) {
  if (!result || !out) return invalid("null argument");
  const auto& r = result->value;
  *out = gmp3_summary{r.initial_loss,     r.initial_violation, r.best_loss,           r.final_violation,
                      r.value,            r.max_linear_speed,  r.max_angular_rate,    result->wall_seconds,
                      r.iterations_used,  r.trajectory.poses.size(), r.trajectory.dt,       r.failed ? 1 : 0};
  return GMP3_OK;
}

gmp3_status gmp3_result_history(const gmp3_result* result, gmp3_history which, const double** data, size_t* length) {
  if (!result || !data || !length) return invalid("null argument");
  const auto& r = result->value;
  const std::vector<double>* v = nullptr;
  switch (which) {
    case GMP3_HISTORY_LOSS: v = &r.loss_history; break;
    case GMP3_HISTORY_VIOLATION: v = &r.violation_history; break;
    case GMP3_HISTORY_SWEEP_LOSS: v = &r.sweep_loss_history; break;
    case GMP3_HISTORY_NORMALIZED_LOSS: v = &r.normalized_loss_history; break;
    case GMP3_HISTORY_CUMULATIVE_VIOLATION: v = &r.cumulative_violation; break;
  }
  if (!v) return invalid("unknown history");
  *data = v->data();
  *length = v->size();
  return GMP3_OK;
}

gmp3_status gmp3_result_sample(const gmp3_result* result, size_t i, double out[7]) {
  if (!result || !out) return invalid("null argument");
  const auto& traj = result->value.trajectory;
  if (i >= traj.poses.size()) return fail(GMP3_ERR_NOT_FOUND, "sample index out of range");
  const auto& pose = traj.poses[i];
  const auto e = gmp3::se3::rot_to_euler(pose.rotation);
  out[0] = traj.timestamps[i];
  out[1] = pose.position.x();
  out[2] = pose.position.y();
  out[3] = pose.position.z();
  out[4] = e.roll;
  out[5] = e.pitch;
  out[6] = e.yaw;
  return GMP3_OK;
}

const char* gmp3_result_failure(const gmp3_result* result) { return result ? result->value.failure.c_str() : ""; }

gmp3_status gmp3_result_export(const gmp3_result* result, const char* trajectory_csv, const char* metrics_csv) {
  if (!result || !trajectory_csv || !metrics_csv) return invalid("null argument");
  return guarded([&] {
    gmp3::export_result(result->value, trajectory_csv, metrics_csv);
    return GMP3_OK;
  });
}

void gmp3_result_free(gmp3_result* result) { delete result; }

void gmp3_station_options_default(gmp3_station_options* o) {
  if (!o) return;
  const auto d = gmp3::StationConfig::defaults();
  *o = gmp3_station_options{"127.0.0.1", 47800, 8080, d.telemetry_rate, d.speed_cap,
                            {d.fence.min().x(), d.fence.min().y(), d.fence.min().z()},
                            {d.fence.max().x(), d.fence.max().y(), d.fence.max().z()},
                            "passthrough", nullptr};
}

gmp3_status gmp3_station_create(const gmp3_station_options* o, const gmp3_config* plan_config, gmp3_station** out) {
  if (!o || !out) return invalid("null argument");
  return guarded([&] {
    gmp3::StationConfig sc = gmp3::StationConfig::defaults();
    sc.fence = gmp3::GeoFence(gmp3::Vec3(o->fence_min[0], o->fence_min[1], o->fence_min[2]),
                              gmp3::Vec3(o->fence_max[0], o->fence_max[1], o->fence_max[2]));
    sc.telemetry_rate = o->telemetry_rate;
    sc.speed_cap = o->speed_cap;
    if (o->generator) sc.generator = o->generator;
    if (o->environment_path) sc.environment = gmp3::load_scenario(o->environment_path);
    sc.environment.bounds = {sc.fence.min(), sc.fence.max()};
    if (plan_config) sc.plan_config = plan_config->value;
    sc.plan_config.clamp_speed = true;
    sc.plan_config.speed_cap = sc.speed_cap;
    gmp3::ServerConfig srv;
    if (o->host) srv.host = o->host;
    srv.drone_port = o->drone_port;
    srv.http_port = o->http_port;
    *out = new gmp3_station{std::make_unique<gmp3::StationServer>(std::move(sc), srv)};
    return GMP3_OK;
  });
}

gmp3_status gmp3_station_start(gmp3_station* s) {
  if (!s) return invalid("null argument");
  return guarded([&] {
    s->server->start();
    return GMP3_OK;
  });
}

int gmp3_station_drone_port(const gmp3_station* s) { return s ? s->server->drone_port() : 0; }
int gmp3_station_http_port(const gmp3_station* s) { return s ? s->server->http_port() : 0; }

gmp3_status gmp3_station_fleet_json(gmp3_station* s, char** out) {
  if (!s || !out) return invalid("null argument");
  return guarded([&] {
    *out = dup(s->server->station().fleet_json().dump());
    return GMP3_OK;
  });
}

gmp3_status gmp3_station_console(gmp3_station* s, const char* line, char** out) {
  if (!s || !line || !out) return invalid("null argument");
  return guarded([&] {
    *out = dup(s->server->station().console(line));
    return GMP3_OK;
  });
}

gmp3_status gmp3_station_stop(gmp3_station* s) {
  if (!s) return invalid("null argument");
  return guarded([&] {
    s->server->stop();
    return GMP3_OK;
  });
}

void gmp3_station_free(gmp3_station* s) {
  if (!s) return;
  try {
    s->server->stop();
  } catch (...) {
  }
  delete s;
}

void gmp3_drone_options_default(gmp3_drone_options* o) {
  if (!o) return;
  *o = gmp3_drone_options{"d1", "127.0.0.1", 47800, 5.0, 0.25, {0.0, 0.0, 0.0}};
}

gmp3_status gmp3_drone_create(const gmp3_drone_options* o, gmp3_drone** out) {
  if (!o || !out || !o->id || !o->host) return invalid("null argument");
  return guarded([&] {
    gmp3::DroneClientConfig c;
    c.id = o->id;
    c.host = o->host;
    c.port = o->port;
    c.rate = o->rate;
    c.speed_cap = o->speed_cap;
    c.start = gmp3::Vec3(o->start[0], o->start[1], o->start[2]);
    if (c.id.empty()) throw gmp3::InvalidArgument("drone id must not be empty");
    if (!(c.speed_cap > 0.0)) throw gmp3::InvalidArgument("speed cap must be > 0");
    *out = new gmp3_drone{std::make_unique<gmp3::DroneClient>(c)};
    return GMP3_OK;
  });
}

gmp3_status gmp3_drone_run(gmp3_drone* d) {
  if (!d) return invalid("null argument");
  return guarded([&] {
    d->client->run();
    return GMP3_OK;
  });
}

void gmp3_drone_stop(gmp3_drone* d) {
  if (d) d->client->stop();
}

size_t gmp3_drone_setpoint_count(const gmp3_drone* d) { return d ? d->client->setpoints().size() : 0; }

gmp3_status gmp3_drone_last_setpoint(const gmp3_drone* d, double out[5]) {
  if (!d || !out) return invalid("null argument");
  const auto sps = d->client->setpoints();
  if (sps.empty()) return fail(GMP3_ERR_NOT_FOUND, "no setpoint received");
  const auto& sp = sps.back();
  out[0] = sp.t;
  out[1] = sp.position.x();
  out[2] = sp.position.y();
  out[3] = sp.position.z();
  out[4] = sp.yaw;
  return GMP3_OK;
}

gmp3_status gmp3_drone_position(const gmp3_drone* d, double out[3]) {
  if (!d || !out) return invalid("null argument");
  const auto p = d->client->state().pose.position;
  out[0] = p.x();
  out[1] = p.y();
  out[2] = p.z();
  return GMP3_OK;
}

void gmp3_drone_free(gmp3_drone* d) { delete d; }

}  // extern "C"
