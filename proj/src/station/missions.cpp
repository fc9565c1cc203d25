#include "station/missions.hpp"

#include <algorithm>

#include "station/ground_station.hpp"

namespace gmp3 {

using nlohmann::json;

namespace {

Vec3 vec3_option(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw PluginError(std::string(what) + " must be a 3-element array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::vector<std::string> drones_option(const json& o) {
  if (!o.contains("drones") || !o.at("drones").is_array() || o.at("drones").empty()) {
    throw PluginError("mission needs a non-empty \"drones\" list");
  }
  return o.at("drones").get<std::vector<std::string>>();
}

}  // namespace

std::string_view to_string(Mission::State state) {
  switch (state) {
    case Mission::State::kReady: return "ready";
    case Mission::State::kRunning: return "running";
    case Mission::State::kPaused: return "paused";
    case Mission::State::kReturning: return "returning";
    case Mission::State::kComplete: return "complete";
  }
  return "unknown";
}

Mission::Mission(std::string name, std::vector<std::string> drones, double altitude)
    : Plugin(std::move(name)), drones_(std::move(drones)), altitude_(altitude) {
  if (drones_.empty()) throw PluginError("mission needs at least one drone");
  if (!(altitude_ > 0.0)) throw PluginError("mission altitude must be > 0");
}

void Mission::on_load(PluginContext& ctx) {
  station_ = &ctx.station();
  if (stages_.empty()) throw PluginError("mission '" + name() + "' has no stages");
}

void Mission::add_stage(Stage stage) {
  for (const auto& s : stages_) {
    if (s.name == stage.name) throw PluginError("duplicate stage '" + stage.name + "'");
  }
  if (stage.name == kReady || stage.name == kReturnToLaunch || stage.name == kComplete) {
    throw PluginError("stage name '" + stage.name + "' is reserved");
  }
  stages_.push_back(std::move(stage));
}

bool Mission::assigned(const std::string& drone) const {
  return std::find(drones_.begin(), drones_.end(), drone) != drones_.end();
}

void Mission::report(const std::string& kind, const json& detail) {
  json frame = {{"type", "mission"}, {"kind", kind}, {"mission", name()}, {"stage", stage_},
                {"state", std::string(to_string(state_))}};
  for (auto it = detail.begin(); it != detail.end(); ++it) frame[it.key()] = it.value();
  station_->events().publish(frame);
}

bool Mission::start(double now, std::string* reason) {
  if (state_ != State::kReady) {
    if (reason) *reason = "mission already started";
    return false;
  }
  for (const auto& d : drones_) {
    if (!station_->drone_info(d)) {
      if (reason) *reason = "drone '" + d + "' is not connected";
      return false;
    }
  }
  state_ = State::kRunning;
  history_ = {kReady};
  visited_.clear();
  enter(stages_.front().name, now);
  update(now);
  return true;
}

bool Mission::stop(double now, std::string* reason) {
  if (state_ == State::kComplete) {
    if (reason) *reason = "mission already complete";
    return false;
  }
  if (state_ == State::kReturning || (state_ == State::kPaused && resume_ == State::kReturning)) return true;
  enter_terminal(now);
  return true;
}

void Mission::enter(const std::string& stage, double now) {
  auto it = std::find_if(stages_.begin(), stages_.end(), [&](const Stage& s) { return s.name == stage; });
  if (it == stages_.end()) {
    error_ = "unknown stage '" + stage + "'";
    report("error", {{"error", error_}});
    enter_terminal(now);
    return;
  }
  if (visited_.contains(stage) && !it->cyclic) {
    error_ = "stage '" + stage + "' entered twice";
    report("error", {{"error", error_}});
    enter_terminal(now);
    return;
  }
  visited_.insert(stage);
  stage_ = stage;
  history_.push_back(stage);
  report("stage");
  if (it->enter) it->enter(now);
}

void Mission::enter_terminal(double now) {
  state_ = State::kReturning;
  stage_ = kReturnToLaunch;
  history_.push_back(kReturnToLaunch);
  report("stage");
  for (const auto& d : drones_) {
    station_->cancel(d, now);
    const auto info = station_->drone_info(d);
    if (!info || !info->has_telemetry || info->mode != FlightMode::kAirborne) continue;
    const Vec3 launch = info->launch_point.value_or(info->telemetry.position);
    fly_to(d, Vec3(launch.x(), launch.y(), info->telemetry.position.z()), now);
    station_->enqueue(d, {"land", json::object()}, now);
  }
}

bool Mission::any_lost() const {
  for (const auto& d : drones_) {
    const auto info = station_->drone_info(d);
    if (!info || info->lost) return true;
  }
  return false;
}

bool Mission::all_home() const {
  for (const auto& d : drones_) {
    const auto info = station_->drone_info(d);
    if (!info) continue;
    if (!station_->idle(d) || info->mode == FlightMode::kAirborne) return false;
  }
  return true;
}

void Mission::update(double now) {
  if (!station_ || state_ == State::kReady || state_ == State::kComplete) return;

  if (state_ == State::kPaused) {
    if (any_lost()) return;
    state_ = resume_;
    report("resumed");
  } else if (any_lost()) {
    resume_ = state_;
    state_ = State::kPaused;
    report("paused", {{"reason", "drone lost"}});
    return;
  }

  if (state_ == State::kReturning) {
    if (all_home()) {
      state_ = State::kComplete;
      stage_ = kComplete;
      history_.push_back(kComplete);
      report("complete");
    }
    return;
  }

  for (std::size_t guard = 0; guard <= stages_.size() && state_ == State::kRunning; ++guard) {
    auto it = std::find_if(stages_.begin(), stages_.end(), [&](const Stage& s) { return s.name == stage_; });
    if (it == stages_.end() || !it->done || !it->done(now)) return;
    const std::string next = it->next ? it->next() : std::string{};
    if (next.empty()) {
      enter_terminal(now);
      return;
    }
    enter(next, now);
  }
}

json Mission::status() const {
  json j = {{"name", name()},
            {"type", type()},
            {"state", std::string(to_string(state_))},
            {"stage", stage_},
            {"history", history_},
            {"drones", drones_}};
  if (!error_.empty()) j["error"] = error_;
  const json extra = extra_status();
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return j;
}

void Mission::ensure_airborne(const std::string& drone, double now) {
  const auto info = station_->drone_info(drone);
  if (!info) return;
  if (info->mode == FlightMode::kDisarmed) station_->enqueue(drone, {"arm", json::object()}, now);
  if (info->mode != FlightMode::kAirborne) station_->enqueue(drone, {"takeoff", {{"altitude", altitude_}}}, now);
}

void Mission::fly_to(const std::string& drone, const Vec3& target, double now) {
  const auto r = station_->enqueue(drone, {"goto", {{"pos", json::array({target.x(), target.y(), target.z()})}}}, now);
  if (!r.ok) report("error", {{"drone_id", drone}, {"error", r.reason}});
}

std::optional<Vec3> Mission::position(const std::string& drone) const {
  const auto info = station_->drone_info(drone);
  if (!info || !info->has_telemetry) return std::nullopt;
  return info->telemetry.position;
}

double Mission::battery(const std::string& drone) const {
  const auto info = station_->drone_info(drone);
  return info ? info->battery : 0.0;
}

bool Mission::at(const std::string& drone, const Vec3& target) const {
  const auto p = position(drone);
  return p && station_->idle(drone) && (*p - target).norm() <= station_->config().arrive_tolerance;
}

WaypointMission::WaypointMission(std::string name, std::vector<std::string> drones, double altitude,
                                 std::vector<StageTargets> stages)
    : Mission(std::move(name), std::move(drones), altitude) {
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto targets = stages[i].targets;
    for (const auto& [d, t] : targets) {
      if (!assigned(d)) throw PluginError("stage '" + stages[i].name + "' targets unassigned drone '" + d + "'");
    }
    const std::string next = i + 1 < stages.size() ? stages[i + 1].name : std::string{};
    add_stage({stages[i].name,
               [this, targets](double now) {
                 for (const auto& [d, t] : targets) {
                   ensure_airborne(d, now);
                   fly_to(d, t, now);
                 }
               },
               [this, targets](double) {
                 return std::all_of(targets.begin(), targets.end(), [this](const auto& kv) { return at(kv.first, kv.second); });
               },
               [next] { return next; },
               false});
  }
}

std::unique_ptr<WaypointMission> WaypointMission::from_json(const std::string& name, const json& o) {
  std::vector<StageTargets> stages;
  if (!o.contains("stages") || !o.at("stages").is_array()) throw PluginError("waypoint_mission needs \"stages\"");
  for (const auto& s : o.at("stages")) {
    StageTargets st;
    st.name = s.at("name").get<std::string>();
    if (s.contains("targets")) {
      for (auto it = s.at("targets").begin(); it != s.at("targets").end(); ++it) {
        st.targets[it.key()] = vec3_option(it.value(), "stage target");
      }
    }
    stages.push_back(std::move(st));
  }
  return std::make_unique<WaypointMission>(name, drones_option(o), o.value("altitude", 1.0), std::move(stages));
}

ObserverSwapMission::ObserverSwapMission(std::string name, std::vector<std::string> drones, double altitude,
                                         Vec3 post, double threshold)
    : Mission(std::move(name), std::move(drones), altitude), post_(post), threshold_(threshold) {
  if (!(threshold_ > 0.0 && threshold_ < 1.0)) throw PluginError("threshold must lie in (0, 1)");

  add_stage({"Launch",
             [this](double now) {
               observer_ = best_standby();
               if (observer_.empty()) {
                 no_standby_ = true;
                 report("error", {{"error", "no drone available to observe"}});
                 return;
               }
               ensure_airborne(observer_, now);
               fly_to(observer_, post_, now);
             },
             [this](double) { return no_standby_ || at(observer_, post_); },
             [this] { return no_standby_ ? std::string{} : std::string("Observe"); },
             false});
  add_stage({"Observe", nullptr, [this](double) { return battery(observer_) < threshold_; },
             [] { return std::string("Swap"); }, true});
  add_stage({"Swap",
             [this](double now) {
               const std::string replacement = best_standby();
               if (replacement.empty()) {
                 no_standby_ = true;
                 report("error", {{"error", "no standby drone above threshold"}});
                 return;
               }
               const std::string old = observer_;
               ensure_airborne(replacement, now);
               fly_to(replacement, post_, now);
               if (const auto info = station().drone_info(old); info && info->has_telemetry) {
                 const Vec3 launch = info->launch_point.value_or(info->telemetry.position);
                 fly_to(old, Vec3(launch.x(), launch.y(), info->telemetry.position.z()), now);
                 station().enqueue(old, {"land", json::object()}, now);
               }
               observer_ = replacement;
               ++swaps_;
               report("swap", {{"observer", observer_}, {"relieved", old}});
             },
             [this](double) { return no_standby_ || at(observer_, post_); },
             [this] { return no_standby_ ? std::string{} : std::string("Observe"); },
             true});
}

std::string ObserverSwapMission::best_standby() const {
  std::string best;
  double best_battery = -1.0;
  for (const auto& d : drones()) {
    if (d == observer_) continue;
    const auto info = station().drone_info(d);
    if (!info || info->lost || !info->has_telemetry || info->mode == FlightMode::kAirborne) continue;
    if (info->battery < threshold_) continue;
    if (info->battery > best_battery) {
      best_battery = info->battery;
      best = d;
    }
  }
  return best;
}

std::unique_ptr<ObserverSwapMission> ObserverSwapMission::from_json(const std::string& name, const json& o) {
  if (!o.contains("station")) throw PluginError("observer_swap needs \"station\"");
  return std::make_unique<ObserverSwapMission>(name, drones_option(o), o.value("altitude", 1.0),
                                               vec3_option(o.at("station"), "station"), o.value("threshold", 0.3));
}

json ObserverSwapMission::extra_status() const {
  return {{"observer", observer_}, {"swaps", swaps_}, {"threshold", threshold_}};
}

}  // namespace gmp3
