#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "core/se3.hpp"

namespace gmp3 {

enum class FlightMode { kDisarmed, kArmed, kAirborne, kLanded };

std::string_view to_string(FlightMode mode);
std::optional<FlightMode> parse_flight_mode(std::string_view name);

struct Setpoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
};

struct DroneState {
  Pose pose;
  Vec3 velocity = Vec3::Zero();
  FlightMode mode = FlightMode::kDisarmed;
  double battery = 1.0;     ///< fraction
  double speed_cap = 0.25;  ///< m/s

  double yaw() const;
};

struct Telemetry {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  EulerAngles ypr;
  double battery = 1.0;
  FlightMode mode = FlightMode::kDisarmed;
};

namespace sim {

inline constexpr double kYawRate = 1.5707963267948966;  // rad/s
inline constexpr double kBatteryLife = 600.0;           // s airborne from full to empty

/// Straight-line move of at most speed_cap * dt toward the setpoint (snapping
/// when closer), yaw slew at kYawRate, linear battery drain while airborne.
/// Only airborne vehicles move.
DroneState tick(const DroneState& state, const Setpoint& setpoint, double dt);

Telemetry telemetry(const DroneState& state, double t);

}  // namespace sim

struct CommandReply {
  bool ok = true;
  std::string reason;
};

/// Vehicle-side command handling and setpoint tracking, transport free.
class SimVehicle {
 public:
  SimVehicle(std::string id, const Vec3& start, double speed_cap = 0.25);

  const std::string& id() const { return id_; }
  const DroneState& state() const { return state_; }
  const Vec3& launch_point() const { return launch_; }
  const Setpoint& setpoint() const { return setpoint_; }

  /// arm, disarm, takeoff{altitude}, land, set_speed_cap{speed}, hold.
  /// Ids must increase; a repeated id is refused.
  CommandReply command(std::uint64_t id, const std::string& name, double arg = 0.0);

  /// Ignored unless airborne.
  void apply_setpoint(const Setpoint& sp);

  void advance(double dt);

  /// Test hook for battery-driven scenarios.
  void set_battery(double battery) { state_.battery = battery; }

 private:
  std::string id_;
  DroneState state_;
  Vec3 launch_;
  Setpoint setpoint_;
  bool landing_ = false;
  std::uint64_t last_id_ = 0;
};

}  // namespace gmp3
