#pragma once

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sim/drone.hpp"
#include "station/ground_station.hpp"

namespace gmp3 {

/// Station plus simulated drones over in-process links, stepped in virtual
/// time. Frames sent in one step are delivered at the next, so runs are
/// fully deterministic.
class VirtualFleet {
 public:
  explicit VirtualFleet(StationConfig config = StationConfig::defaults(), double physics_dt = 0.02);
  ~VirtualFleet();

  GroundStation& station() { return *station_; }
  double now() const { return now_; }
  double physics_dt() const { return dt_; }

  /// Connects a new drone; false when the station refuses the HELLO.
  bool add_drone(const std::string& id, const Vec3& start, double speed_cap = 0.25);
  SimVehicle& vehicle(const std::string& id);

  /// One physics step: deliver station frames, advance vehicles, emit due
  /// telemetry, deliver it, run the dispatcher.
  void step();
  void run_for(double seconds);
  /// Steps until pred holds or timeout elapses; returns pred's final value.
  bool run_until(const std::function<bool()>& pred, double timeout);

  /// Telemetry is generated but not delivered while muted (link loss).
  void mute(const std::string& id, bool muted);
  void disconnect(const std::string& id);

  const std::vector<Setpoint>& setpoints(const std::string& id) const;
  const std::vector<wire::Ack>& acks(const std::string& id) const;
  std::size_t telemetry_frames(const std::string& id) const;
  /// Largest commanded speed seen on any tick.
  double max_speed(const std::string& id) const;
  bool link_closed(const std::string& id) const;

 private:
  struct Node;
  class Link;

  Node& node(const std::string& id);
  const Node& node(const std::string& id) const;

  double dt_;
  double now_ = 0.0;
  long step_ = 0;
  std::unique_ptr<GroundStation> station_;
  std::map<std::string, std::unique_ptr<Node>> nodes_;
};

}  // namespace gmp3
