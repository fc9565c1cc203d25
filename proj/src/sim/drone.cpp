#include "sim/drone.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace gmp3 {

std::string_view to_string(FlightMode mode) {
  switch (mode) {
    case FlightMode::kDisarmed: return "disarmed";
    case FlightMode::kArmed: return "armed";
    case FlightMode::kAirborne: return "airborne";
    case FlightMode::kLanded: return "landed";
  }
  return "unknown";
}

std::optional<FlightMode> parse_flight_mode(std::string_view name) {
  for (auto m : {FlightMode::kDisarmed, FlightMode::kArmed, FlightMode::kAirborne, FlightMode::kLanded}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double DroneState::yaw() const { return se3::rot_to_euler(pose.rotation).yaw; }

namespace sim {

namespace {

double wrap(double a) {
  a = std::remainder(a, 2.0 * std::numbers::pi);
  return a;
}

}  // namespace

DroneState tick(const DroneState& state, const Setpoint& setpoint, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("tick dt must be > 0");
  DroneState next = state;
  next.velocity = Vec3::Zero();
  if (state.mode != FlightMode::kAirborne) return next;

  next.battery = std::max(0.0, state.battery - dt / kBatteryLife);

  const Vec3 diff = setpoint.position - state.pose.position;
  const double dist = diff.norm();
  const double reach = state.speed_cap * dt;
  if (dist <= reach) {
    next.pose.position = setpoint.position;
    if (dist > 0.0) next.velocity = diff / dt;
  } else {
    const Vec3 dir = diff / dist;
    next.pose.position = state.pose.position + reach * dir;
    next.velocity = state.speed_cap * dir;
  }

  const double yaw = state.yaw();
  const double err = wrap(setpoint.yaw - yaw);
  const double slew = kYawRate * dt;
  const double new_yaw = std::abs(err) <= slew ? setpoint.yaw : yaw + std::copysign(slew, err);
  if (err == 0.0) return next;
  const EulerAngles e = se3::rot_to_euler(state.pose.rotation);
  next.pose.rotation = se3::euler_to_rot({wrap(new_yaw), e.pitch, e.roll});
  return next;
}

Telemetry telemetry(const DroneState& state, double t) {
  Telemetry f;
  f.t = t;
  f.position = state.pose.position;
  f.velocity = state.velocity;
  f.ypr = se3::rot_to_euler(state.pose.rotation);
  f.battery = state.battery;
  f.mode = state.mode;
  return f;
}

}  // namespace sim

SimVehicle::SimVehicle(std::string id, const Vec3& start, double speed_cap) : id_(std::move(id)), launch_(start) {
  if (!(speed_cap > 0.0)) throw InvalidArgument("speed cap must be > 0");
  state_.pose.position = start;
  state_.speed_cap = speed_cap;
  setpoint_.position = start;
}

CommandReply SimVehicle::command(std::uint64_t id, const std::string& name, double arg) {
  if (id <= last_id_) return {false, "duplicate id"};
  last_id_ = id;
  auto& mode = state_.mode;
  if (name == "arm") {
    if (mode != FlightMode::kDisarmed) return {false, "precondition: disarmed"};
    mode = FlightMode::kArmed;
  } else if (name == "disarm") {
    if (mode != FlightMode::kArmed && mode != FlightMode::kLanded) return {false, "precondition: on ground"};
    mode = FlightMode::kDisarmed;
  } else if (name == "takeoff") {
    if (mode != FlightMode::kArmed && mode != FlightMode::kLanded) return {false, "precondition: armed"};
    if (!(arg > 0.0)) return {false, "invalid args"};
    mode = FlightMode::kAirborne;
    landing_ = false;
    setpoint_.position = state_.pose.position;
    setpoint_.position.z() = launch_.z() + arg;
    setpoint_.yaw = state_.yaw();
  } else if (name == "land") {
    if (mode != FlightMode::kAirborne) return {false, "precondition: airborne"};
    landing_ = true;
    setpoint_.position = state_.pose.position;
    setpoint_.position.z() = launch_.z();
  } else if (name == "set_speed_cap") {
    if (!(arg > 0.0) || !std::isfinite(arg)) return {false, "invalid args"};
    state_.speed_cap = arg;
  } else if (name == "hold") {
    setpoint_.position = state_.pose.position;
  } else {
    return {false, "unknown command"};
  }
  return {};
}

void SimVehicle::apply_setpoint(const Setpoint& sp) {
  if (state_.mode != FlightMode::kAirborne || landing_) return;
  setpoint_ = sp;
}

void SimVehicle::advance(double dt) {
  state_ = sim::tick(state_, setpoint_, dt);
  if (landing_ && state_.pose.position == setpoint_.position) {
    landing_ = false;
    state_.mode = FlightMode::kLanded;
    state_.velocity = Vec3::Zero();
  }
}

}  // namespace gmp3
