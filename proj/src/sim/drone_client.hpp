#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "sim/drone.hpp"
#include "station/wire.hpp"

namespace gmp3 {

/// Runs a CMD frame against the vehicle; the reply becomes the ACK.
wire::Ack handle_command(SimVehicle& vehicle, const wire::Cmd& cmd);

struct DroneClientConfig {
  std::string id = "d1";
  std::string host = "127.0.0.1";
  int port = 47800;
  double rate = 5.0;        ///< telemetry Hz
  double speed_cap = 0.25;  ///< m/s
  Vec3 start = Vec3::Zero();
  double physics_dt = 0.02;
  double connect_timeout = 5.0;
};

/// Simulated drone speaking the line protocol over TCP.
class DroneClient {
 public:
  explicit DroneClient(DroneClientConfig config);

  /// Connects, sends HELLO and loops until the station closes the link or
  /// stop() is called. Throws IoError when the station cannot be reached
  /// or refuses the HELLO.
  void run();
  void stop() { stop_ = true; }

  DroneState state() const;
  std::vector<Setpoint> setpoints() const;
  std::size_t telemetry_sent() const { return telemetry_sent_; }

 private:
  DroneClientConfig config_;
  SimVehicle vehicle_;
  mutable std::mutex m_;
  std::vector<Setpoint> setpoints_;
  std::atomic<bool> stop_{false};
  std::atomic<std::size_t> telemetry_sent_{0};
};

}  // namespace gmp3
