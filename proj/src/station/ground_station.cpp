#include "station/ground_station.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "core/config_io.hpp"
#include "core/errors.hpp"
#include "station/missions.hpp"

namespace gmp3 {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::optional<double> number_arg(const json& args, const char* key) {
  if (!args.contains(key)) return std::nullopt;
  const auto& v = args.at(key);
  if (!v.is_number()) return std::nullopt;
  const double x = v.get<double>();
  if (!std::isfinite(x)) return std::nullopt;
  return x;
}

/// x,y,z (or dx,dy,dz) keys, or a 3-element array under array_key.
std::optional<Vec3> vec_arg(const json& args, const char* array_key, const char* kx, const char* ky, const char* kz) {
  if (args.contains(array_key)) {
    const auto& a = args.at(array_key);
    if (!a.is_array() || a.size() != 3) return std::nullopt;
    Vec3 v;
    for (std::size_t k = 0; k < 3; ++k) {
      if (!a[k].is_number()) return std::nullopt;
      v[static_cast<Eigen::Index>(k)] = a[k].get<double>();
    }
    if (!v.allFinite()) return std::nullopt;
    return v;
  }
  const auto x = number_arg(args, kx), y = number_arg(args, ky), z = number_arg(args, kz);
  if (!x || !y || !z) return std::nullopt;
  return Vec3(*x, *y, *z);
}

EnqueueResult reject(std::string reason) { return {false, 0, std::move(reason)}; }

}  // namespace

std::optional<json> EventBus::Subscription::pop(double timeout_s) {
  std::unique_lock lock(m_);
  cv_.wait_for(lock, std::chrono::duration<double>(timeout_s), [this] { return !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  json frame = std::move(queue_.front());
  queue_.pop_front();
  return frame;
}

std::vector<json> EventBus::Subscription::drain() {
  std::lock_guard lock(m_);
  std::vector<json> out(std::make_move_iterator(queue_.begin()), std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::shared_ptr<EventBus::Subscription> EventBus::subscribe() {
  auto sub = std::make_shared<Subscription>();
  std::lock_guard lock(m_);
  subs_.push_back(sub);
  return sub;
}

void EventBus::publish(const json& frame) {
  std::vector<std::shared_ptr<Subscription>> live;
  {
    std::lock_guard lock(m_);
    std::erase_if(subs_, [](const auto& w) { return w.expired(); });
    for (const auto& w : subs_) {
      if (auto s = w.lock()) live.push_back(std::move(s));
    }
  }
  for (const auto& s : live) {
    {
      std::lock_guard lock(s->m_);
      if (s->queue_.size() >= Subscription::kMaxQueued) {
        s->queue_.pop_front();
        s->overflowed_ = true;
      }
      s->queue_.push_back(frame);
    }
    s->cv_.notify_one();
  }
}

std::size_t EventBus::subscribers() const {
  std::lock_guard lock(m_);
  return static_cast<std::size_t>(std::count_if(subs_.begin(), subs_.end(), [](const auto& w) { return !w.expired(); }));
}

StationConfig StationConfig::defaults() {
  StationConfig c;
  c.environment.bounds = {c.fence.min(), c.fence.max()};
  c.environment.start.position = c.fence.min();
  c.environment.goal.position = c.fence.min();
  c.environment.weights.q = 0.89 * Mat3::Identity();
  c.environment.weights.mu = 0.1;
  c.environment.weights.lambda = 2.5;
  c.plan_config = profile_config("paper_rmsprop");
  c.plan_config.clamp_speed = true;
  c.plan_config.speed_cap = c.speed_cap;
  return c;
}

GroundStation::GroundStation(StationConfig config)
    : config_(std::move(config)), follower_(std::make_unique<PassThroughFollower>()), plugins_(*this) {
  if (!(config_.telemetry_rate > 0.0) || !(config_.speed_cap > 0.0) || !(config_.telemetry_timeout > 0.0) ||
      !(config_.arrive_tolerance > 0.0)) {
    throw InvalidArgument("station rates, speed cap, timeout and tolerance must be > 0");
  }
  if (config_.generator == "passthrough") {
    generator_ = std::make_unique<PassThroughGenerator>();
  } else if (config_.generator == "gmp3") {
    Scenario env = config_.environment;
    env.bounds = {config_.fence.min(), config_.fence.max()};
    PlannerConfig pc = config_.plan_config;
    pc.clamp_speed = true;
    pc.speed_cap = config_.speed_cap;
    generator_ = std::make_unique<Gmp3Generator>(std::move(env), std::move(pc), config_.inline_planning);
  } else {
    throw InvalidArgument("unknown generator '" + config_.generator + "' (valid: passthrough, gmp3)");
  }
}

GroundStation::~GroundStation() {
  std::lock_guard lock(m_);
  plugins_.unload_all();
}

GroundStation::Drone* GroundStation::find(const std::string& id) {
  auto it = drones_.find(id);
  return it == drones_.end() ? nullptr : &it->second;
}

const GroundStation::Drone* GroundStation::find(const std::string& id) const {
  auto it = drones_.find(id);
  return it == drones_.end() ? nullptr : &it->second;
}

void GroundStation::send(Drone& d, const wire::Message& m) {
  if (!d.link) return;
  try {
    d.link->send(m);
  } catch (const std::exception& e) {
    status_event(d.id, "link_error", {{"error", e.what()}});
  }
}

void GroundStation::status_event(const std::string& drone, const std::string& kind, const json& detail) {
  json frame = {{"type", "status"}, {"kind", kind}};
  if (!drone.empty()) frame["drone_id"] = drone;
  if (detail.is_object()) {
    for (auto it = detail.begin(); it != detail.end(); ++it) frame[it.key()] = it.value();
  }
  events_.publish(frame);
}

wire::Ack GroundStation::connect(const wire::Hello& hello, std::shared_ptr<DroneLink> link, double now) {
  std::lock_guard lock(m_);
  wire::Ack ack{0, true, {}};
  if (shut_down_) ack = {0, false, "shutting down"};
  else if (hello.drone_id.empty()) ack = {0, false, "invalid drone id"};
  else if (drones_.contains(hello.drone_id)) ack = {0, false, "duplicate drone id"};

  if (link) {
    try {
      link->send(ack);
    } catch (const std::exception&) {
    }
  }
  if (!ack.ok) {
    status_event(hello.drone_id, "hello_rejected", {{"reason", ack.reason}});
    return ack;
  }
  Drone d;
  d.id = hello.drone_id;
  d.link = std::move(link);
  d.last_seen = now;
  drones_.emplace(d.id, std::move(d));
  status_event(hello.drone_id, "connected", {{"caps", hello.caps}});
  return ack;
}

void GroundStation::disconnect(const std::string& drone_id, double) {
  std::lock_guard lock(m_);
  auto it = drones_.find(drone_id);
  if (it == drones_.end()) return;
  if (it->second.link) it->second.link->close();
  drones_.erase(it);
  status_event(drone_id, "disconnected");
}

void GroundStation::on_message(const std::string& drone_id, const wire::Message& message, double now) {
  std::lock_guard lock(m_);
  Drone* d = find(drone_id);
  if (!d) return;

  if (const auto* t = std::get_if<Telemetry>(&message)) {
    d->telemetry = *t;
    d->last_seen = now;
    ++d->telemetry_frames;
    if (!d->launch) d->launch = t->position;
    if (d->lost) {
      d->lost = false;
      status_event(d->id, "recovered");
    }
    json frame = wire::to_json(*t);
    frame["drone_id"] = d->id;
    events_.publish(frame);
    return;
  }
  if (const auto* a = std::get_if<wire::Ack>(&message)) {
    d->last_seen = now;
    if (!d->active || d->active->stage != Stage::kAwaitAck || d->active->command.id != a->id) return;
    if (!a->ok) {
      finish(*d, false, a->reason, now);
      return;
    }
    const std::string& name = d->active->command.name;
    if (d->telemetry) {
      if (name == "arm") d->telemetry->mode = FlightMode::kArmed;
      if (name == "disarm") d->telemetry->mode = FlightMode::kDisarmed;
      if (name == "takeoff") d->telemetry->mode = FlightMode::kAirborne;
    }
    if (name == "takeoff" || name == "land") {
      d->active->stage = Stage::kAwaitMotion;
      step_active(*d, now);
    } else {
      finish(*d, true, {}, now);
    }
    if (!d->active) start_next(*d, now);
    return;
  }
  status_event(d->id, "protocol", {{"error", "unexpected frame from drone"}});
}

GroundStation::Projection GroundStation::project(const Drone& d) const {
  Projection p;
  if (d.telemetry) {
    p.mode = d.telemetry->mode;
    p.position = d.telemetry->position;
  }
  if (d.active) apply(p, d.active->command, d);
  for (const auto& q : d.queue) apply(p, q, d);
  return p;
}

void GroundStation::apply(Projection& p, const Queued& q, const Drone& d) {
  if (q.name == "arm") {
    p.mode = FlightMode::kArmed;
  } else if (q.name == "disarm") {
    p.mode = FlightMode::kDisarmed;
  } else if (q.name == "takeoff") {
    p.mode = FlightMode::kAirborne;
    p.position = q.target;
  } else if (q.name == "land") {
    p.mode = FlightMode::kLanded;
    if (p.position) p.position->z() = d.launch ? d.launch->z() : p.position->z();
  } else if (q.name == "goto" || q.name == "move_by") {
    p.position = q.target;
  }
}

EnqueueResult GroundStation::validate(const Drone& d, const CommandRequest& request, Queued& out) const {
  const auto& names = kCommandNames;
  if (std::find(std::begin(names), std::end(names), request.name) == std::end(names)) {
    return reject("invalid args: unknown command '" + request.name + "'");
  }
  const json args = request.args.is_null() ? json::object() : request.args;
  if (!args.is_object()) return reject("invalid args");
  out.name = request.name;
  out.args = args;

  const Projection p = project(d);
  const auto& n = request.name;
  const bool on_ground = p.mode == FlightMode::kArmed || p.mode == FlightMode::kLanded;

  if (n == "arm") {
    if (p.mode != FlightMode::kDisarmed) return reject("precondition: disarmed");
  } else if (n == "disarm") {
    if (!on_ground) return reject("precondition: on ground");
  } else if (n == "takeoff") {
    double alt = 1.0;
    if (args.contains("altitude")) {
      const auto a = number_arg(args, "altitude");
      if (!a || *a <= 0.0) return reject("invalid args");
      alt = *a;
    }
    if (!on_ground) return reject("precondition: armed");
    if (!p.position) return reject("precondition: telemetry");
    const double ground = d.launch ? d.launch->z() : p.position->z();
    out.target = Vec3(p.position->x(), p.position->y(), ground + alt);
    out.args["altitude"] = alt;
    if (!config_.fence.contains(out.target)) return reject("geofence");
  } else if (n == "land") {
    if (p.mode != FlightMode::kAirborne) return reject("precondition: airborne");
  } else if (n == "goto") {
    const auto target = vec_arg(args, "pos", "x", "y", "z");
    if (!target) return reject("invalid args");
    if (args.contains("yaw") && !number_arg(args, "yaw")) return reject("invalid args");
    if (p.mode != FlightMode::kAirborne) return reject("precondition: airborne");
    if (!config_.fence.contains(*target)) return reject("geofence");
    out.target = *target;
    out.yaw = number_arg(args, "yaw").value_or(d.telemetry ? d.telemetry->ypr.yaw : 0.0);
  } else if (n == "move_by") {
    const auto delta = vec_arg(args, "delta", "dx", "dy", "dz");
    if (!delta) return reject("invalid args");
    if (p.mode != FlightMode::kAirborne) return reject("precondition: airborne");
    if (!p.position) return reject("precondition: telemetry");
    out.target = *p.position + *delta;
    if (!config_.fence.contains(out.target)) return reject("geofence");
    out.yaw = d.telemetry ? d.telemetry->ypr.yaw : 0.0;
  } else if (n == "set_speed_cap") {
    const auto s = number_arg(args, "speed");
    if (!s || *s <= 0.0) return reject("invalid args");
  } else {  // start_mission / stop_mission
    std::string mission;
    if (args.contains("mission")) {
      if (!args.at("mission").is_string()) return reject("invalid args");
      mission = args.at("mission").get<std::string>();
    } else {
      for (const auto& name : plugins_.names()) {
        auto* m = dynamic_cast<Mission*>(plugins_.find(name));
        if (m && m->assigned(d.id)) {
          mission = name;
          break;
        }
      }
    }
    if (mission.empty() || !dynamic_cast<Mission*>(plugins_.find(mission))) return reject("unknown mission");
    out.args["mission"] = mission;
  }
  return {true, 0, {}};
}

EnqueueResult GroundStation::enqueue(const std::string& drone_id, const CommandRequest& request, double now) {
  std::lock_guard lock(m_);
  Drone* d = find(drone_id);
  if (!d) return reject("unknown drone");
  if (shut_down_) return reject("shutting down");
  Queued q;
  EnqueueResult r = validate(*d, request, q);
  if (!r.ok) {
    status_event(drone_id, "rejected", {{"name", request.name}, {"reason", r.reason}});
    return r;
  }
  q.id = d->next_id++;
  q.issued_at = now;
  r.id = q.id;
  d->queue.push_back(std::move(q));
  status_event(drone_id, "queued", {{"id", r.id}, {"name", request.name}});
  return r;
}

void GroundStation::cancel(const std::string& drone_id, double now) {
  std::lock_guard lock(m_);
  Drone* d = find(drone_id);
  if (!d) return;
  d->queue.clear();
  if (d->active && d->active->stage == Stage::kFlow) {
    hold(*d, now);
    finish(*d, false, "cancelled", now);
  }
}

void GroundStation::hold(Drone& d, double now) {
  if (!d.telemetry || d.telemetry->mode != FlightMode::kAirborne) return;
  send(d, Setpoint{now, d.telemetry->position, d.telemetry->ypr.yaw});
  status_event(d.id, "hold", {{"pos", vec_json(d.telemetry->position)}});
}

void GroundStation::finish(Drone& d, bool ok, const std::string& reason, double) {
  if (!d.active) return;
  json detail = {{"id", d.active->command.id}, {"name", d.active->command.name}, {"ok", ok}};
  if (!reason.empty()) detail["reason"] = reason;
  d.active.reset();
  status_event(d.id, "command_done", detail);
}

void GroundStation::start_next(Drone& d, double now) {
  while (!d.active && !d.queue.empty()) {
    Queued q = std::move(d.queue.front());
    d.queue.pop_front();
    log_.push_back({d.id, q.id, q.name, now});
    d.active = Active{q, Stage::kAwaitAck, nullptr};

    if (q.name == "start_mission" || q.name == "stop_mission") {
      std::string reason;
      const bool ok = mission_command(q.args.at("mission").get<std::string>(), q.name == "start_mission", now, &reason);
      finish(d, ok, reason, now);
    } else if (q.name == "goto" || q.name == "move_by") {
      if (!d.telemetry || d.telemetry->mode != FlightMode::kAirborne) {
        finish(d, false, "precondition: airborne", now);
        continue;
      }
      PlanRequest req;
      req.drone_id = d.id;
      req.from.position = d.telemetry->position;
      req.from.rotation = se3::euler_to_rot(d.telemetry->ypr);
      req.target = q.target;
      req.target_yaw = q.yaw;
      d.active->stage = Stage::kFlow;
      d.active->flow = std::make_unique<MovementFlow>(req, generator_->generate(req), follower_);
      status_event(d.id, "planning", {{"id", q.id}, {"generator", std::string(generator_->name())}});
      step_active(d, now);
    } else {
      json args = q.args;
      if (q.name == "takeoff") args["altitude"] = q.target.z() - (d.launch ? d.launch->z() : 0.0);
      send(d, wire::Cmd{q.id, q.name, args});
    }
  }
}

void GroundStation::step_active(Drone& d, double now) {
  if (!d.active) return;
  Active& a = *d.active;
  const double tol = config_.arrive_tolerance;
  switch (a.stage) {
    case Stage::kAwaitAck:
      return;
    case Stage::kAwaitMotion:
      if (!d.telemetry) return;
      if (a.command.name == "takeoff") {
        if (d.telemetry->mode == FlightMode::kAirborne && (d.telemetry->position - a.command.target).norm() <= tol) {
          finish(d, true, {}, now);
        }
      } else if (d.telemetry->mode == FlightMode::kLanded) {
        finish(d, true, {}, now);
      }
      return;
    case Stage::kFlow: {
      MovementFlow& flow = *a.flow;
      const bool had_plan = flow.trajectory() != nullptr;
      const auto sp = flow.update(now);
      if (flow.phase() == MovementFlow::Phase::kFailed) {
        hold(d, now);
        status_event(d.id, "plan_failed", {{"id", a.command.id}, {"error", flow.error()}});
        finish(d, false, flow.error(), now);
        return;
      }
      if (!had_plan && flow.trajectory()) {
        d.plan = *flow.trajectory();
        status_event(d.id, "plan", {{"id", a.command.id}, {"samples", d.plan->poses.size()}, {"dt", d.plan->dt}});
      }
      if (sp) {
        if (!config_.fence.contains(sp->position)) {
          hold(d, now);
          status_event(d.id, "geofence", {{"id", a.command.id}, {"pos", vec_json(sp->position)}});
          finish(d, false, "geofence", now);
          return;
        }
        send(d, *sp);
      }
      if (flow.final_emitted() && d.telemetry && (d.telemetry->position - flow.final_position()).norm() <= tol) {
        finish(d, true, {}, now);
      }
      return;
    }
  }
}

void GroundStation::update(double now) {
  std::lock_guard lock(m_);
  if (shut_down_) return;
  for (auto& [id, d] : drones_) {
    if (!d.lost && now - d.last_seen > config_.telemetry_timeout) {
      d.lost = true;
      status_event(id, "lost", {{"last_seen", d.last_seen}});
    }
    step_active(d, now);
    if (!d.active) start_next(d, now);
  }
  plugins_.update(now);
}

void GroundStation::shutdown(double now) {
  std::lock_guard lock(m_);
  if (shut_down_) return;
  shut_down_ = true;
  for (auto& [id, d] : drones_) {
    d.queue.clear();
    d.active.reset();
    hold(d, now);
    if (d.link) d.link->close();
  }
  status_event({}, "shutdown");
}

std::vector<std::string> GroundStation::drone_ids() const {
  std::lock_guard lock(m_);
  std::vector<std::string> out;
  for (const auto& [id, d] : drones_) out.push_back(id);
  return out;
}

std::optional<DroneInfo> GroundStation::drone_info(const std::string& drone_id) const {
  std::lock_guard lock(m_);
  const Drone* d = find(drone_id);
  if (!d) return std::nullopt;
  DroneInfo info;
  info.id = d->id;
  info.has_telemetry = d->telemetry.has_value();
  if (d->telemetry) {
    info.telemetry = *d->telemetry;
    info.mode = d->telemetry->mode;
    info.battery = d->telemetry->battery;
  }
  info.lost = d->lost;
  info.queued = d->queue.size();
  if (d->active) info.active_command = d->active->command.id;
  info.launch_point = d->launch;
  info.telemetry_frames = d->telemetry_frames;
  return info;
}

std::optional<SampledTrajectory> GroundStation::active_plan(const std::string& drone_id) const {
  std::lock_guard lock(m_);
  const Drone* d = find(drone_id);
  if (!d) return std::nullopt;
  return d->plan;
}

bool GroundStation::idle(const std::string& drone_id) const {
  std::lock_guard lock(m_);
  const Drone* d = find(drone_id);
  return d && !d->active && d->queue.empty();
}

std::vector<ExecutedCommand> GroundStation::execution_log() const {
  std::lock_guard lock(m_);
  return log_;
}

json GroundStation::fleet_json() const {
  std::lock_guard lock(m_);
  json drones = json::array();
  for (const auto& [id, d] : drones_) {
    json j = {{"id", id}, {"lost", d.lost}, {"queued", d.queue.size()}};
    j["active_command"] = d.active ? json(d.active->command.id) : json(nullptr);
    if (d.telemetry) {
      const auto& t = *d.telemetry;
      j["mode"] = std::string(to_string(t.mode));
      j["battery"] = t.battery;
      j["pos"] = vec_json(t.position);
      j["vel"] = vec_json(t.velocity);
      j["ypr"] = json::array({t.ypr.yaw, t.ypr.pitch, t.ypr.roll});
      j["t"] = t.t;
    } else {
      j["mode"] = "unknown";
    }
    drones.push_back(j);
  }
  json obstacles = json::array();
  for (const auto& o : config_.environment.obstacles) {
    obstacles.push_back({{"center", vec_json(o.center)}, {"radius", o.radius}});
  }
  return {{"fence", {{"min", vec_json(config_.fence.min())}, {"max", vec_json(config_.fence.max())}}},
          {"obstacles", obstacles},
          {"speed_cap", config_.speed_cap},
          {"telemetry_rate", config_.telemetry_rate},
          {"drones", drones}};
}

json GroundStation::plan_json(const std::string& drone_id) const {
  std::lock_guard lock(m_);
  const Drone* d = find(drone_id);
  if (!d || !d->plan) return nullptr;
  json points = json::array();
  for (std::size_t j = 0; j < d->plan->poses.size(); ++j) {
    const auto& p = d->plan->poses[j];
    points.push_back({{"t", d->plan->timestamps[j]},
                      {"x", p.position.x()},
                      {"y", p.position.y()},
                      {"z", p.position.z()},
                      {"yaw", se3::rot_to_euler(p.rotation).yaw}});
  }
  return {{"drone_id", drone_id}, {"dt", d->plan->dt}, {"points", points}};
}

json GroundStation::missions_json() const {
  std::lock_guard lock(m_);
  json out = json::array();
  for (const auto& name : plugins_.names()) {
    if (auto* m = dynamic_cast<Mission*>(plugins_.find(name))) out.push_back(m->status());
  }
  return out;
}

bool GroundStation::mission_command(const std::string& mission, bool start, double now, std::string* reason) {
  std::lock_guard lock(m_);
  auto* m = dynamic_cast<Mission*>(plugins_.find(mission));
  if (!m) {
    if (reason) *reason = "unknown mission";
    return false;
  }
  std::string why;
  const bool ok = start ? m->start(now, &why) : m->stop(now, &why);
  if (reason) *reason = why;
  return ok;
}

std::string GroundStation::console(const std::string& line) {
  std::lock_guard lock(m_);
  return plugins_.console(line);
}

void GroundStation::set_generator(std::unique_ptr<TrajectoryGenerator> generator) {
  if (!generator) throw InvalidArgument("null generator");
  std::lock_guard lock(m_);
  generator_ = std::move(generator);
}

void GroundStation::set_follower(std::shared_ptr<TrajectoryFollower> follower) {
  if (!follower) throw InvalidArgument("null follower");
  std::lock_guard lock(m_);
  follower_ = std::move(follower);
}

}  // namespace gmp3
