#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/planner.hpp"
#include "core/trajectory.hpp"
#include "sim/drone.hpp"
#include "station/flow.hpp"
#include "station/geofence.hpp"
#include "station/plugins.hpp"
#include "station/wire.hpp"

namespace gmp3 {

/// Fan-out of JSON event frames to any number of subscribers.
class EventBus {
 public:
  class Subscription {
   public:
    /// Waits up to timeout_s for the next frame.
    std::optional<nlohmann::json> pop(double timeout_s);
    std::vector<nlohmann::json> drain();

   private:
    friend class EventBus;
    static constexpr std::size_t kMaxQueued = 4096;
    std::mutex m_;
    std::condition_variable cv_;
    std::deque<nlohmann::json> queue_;
    bool overflowed_ = false;
  };

  std::shared_ptr<Subscription> subscribe();
  void publish(const nlohmann::json& frame);
  std::size_t subscribers() const;

 private:
  mutable std::mutex m_;
  std::vector<std::weak_ptr<Subscription>> subs_;
};

/// Station side of one drone connection.
class DroneLink {
 public:
  virtual ~DroneLink() = default;
  virtual void send(const wire::Message& message) = 0;
  virtual void close() = 0;
};

struct StationConfig {
  GeoFence fence{Vec3(-5.0, -5.0, 0.0), Vec3(5.0, 5.0, 5.0)};
  double telemetry_rate = 5.0;      ///< Hz, advertised to drones
  double speed_cap = 0.25;          ///< m/s, applied to the planner's flight trajectory
  double telemetry_timeout = 2.0;   ///< s without TELEM before a drone counts as lost
  double arrive_tolerance = 0.05;   ///< m
  std::string generator = "passthrough";  ///< or "gmp3"
  /// Obstacles and loss weights for the gmp3 generator (bounds are replaced by the fence).
  Scenario environment;
  PlannerConfig plan_config;
  /// Run the gmp3 generator lazily on the dispatcher instead of a worker
  /// (deterministic virtual-time runs only).
  bool inline_planning = false;

  /// paper_rmsprop planner profile with speed clamping at speed_cap.
  static StationConfig defaults();
};

struct CommandRequest {
  std::string name;
  nlohmann::json args = nlohmann::json::object();
};

struct EnqueueResult {
  bool ok = false;
  std::uint64_t id = 0;
  std::string reason;
};

struct DroneInfo {
  std::string id;
  bool has_telemetry = false;
  Telemetry telemetry;
  FlightMode mode = FlightMode::kDisarmed;
  double battery = 1.0;
  bool lost = false;
  std::size_t queued = 0;
  std::optional<std::uint64_t> active_command;
  std::optional<Vec3> launch_point;
  std::size_t telemetry_frames = 0;
};

struct ExecutedCommand {
  std::string drone_id;
  std::uint64_t id = 0;
  std::string name;
  double started_at = 0.0;
};

/// Command queues, dispatcher, movement flows, geofence and plugin host.
/// Transport and clock agnostic: callers feed messages and the current time.
/// Every public member is safe to call from any thread.
class GroundStation {
 public:
  static constexpr const char* kCommandNames[] = {"arm",  "disarm",        "takeoff",       "land",        "goto",
                                                  "move_by", "set_speed_cap", "start_mission", "stop_mission"};

  explicit GroundStation(StationConfig config = StationConfig::defaults());
  ~GroundStation();

  GroundStation(const GroundStation&) = delete;
  GroundStation& operator=(const GroundStation&) = delete;

  const StationConfig& config() const { return config_; }
  EventBus& events() { return events_; }
  PluginManager& plugins() { return plugins_; }

  /// Registers a drone after its HELLO. The returned ACK (id 0) has already
  /// been sent on the link; on rejection the caller should close the link.
  wire::Ack connect(const wire::Hello& hello, std::shared_ptr<DroneLink> link, double now);
  void disconnect(const std::string& drone_id, double now);
  /// TELEM and ACK frames from a drone.
  void on_message(const std::string& drone_id, const wire::Message& message, double now);

  /// Validates against the drone's projected state after everything already
  /// queued; accepted commands get the next id and join the FIFO.
  EnqueueResult enqueue(const std::string& drone_id, const CommandRequest& request, double now);
  /// Drops queued commands and aborts an active movement with a hold setpoint.
  void cancel(const std::string& drone_id, double now);

  /// Dispatcher step: timeouts, command execution, setpoint emission, plugins.
  void update(double now);

  /// Hold setpoints to every airborne drone, then closes all links.
  void shutdown(double now);

  std::vector<std::string> drone_ids() const;
  std::optional<DroneInfo> drone_info(const std::string& drone_id) const;
  /// Active (or last) planned trajectory of a drone.
  std::optional<SampledTrajectory> active_plan(const std::string& drone_id) const;
  bool idle(const std::string& drone_id) const;
  std::vector<ExecutedCommand> execution_log() const;

  nlohmann::json fleet_json() const;
  nlohmann::json plan_json(const std::string& drone_id) const;
  nlohmann::json missions_json() const;

  /// start / stop a mission plugin by instance name; false with reason when absent.
  bool mission_command(const std::string& mission, bool start, double now, std::string* reason = nullptr);

  /// Plugin console (load/unload/plugins/help plus plugin commands).
  std::string console(const std::string& line);

  /// Swaps the generator/follower (e.g. a custom follower in tests).
  void set_generator(std::unique_ptr<TrajectoryGenerator> generator);
  void set_follower(std::shared_ptr<TrajectoryFollower> follower);

 private:
  struct Queued {
    std::uint64_t id = 0;
    std::string name;
    nlohmann::json args;
    double issued_at = 0.0;
    Vec3 target = Vec3::Zero();  // goto / move_by / takeoff
    double yaw = 0.0;
  };
  enum class Stage { kAwaitAck, kAwaitMotion, kFlow };
  struct Active {
    Queued command;
    Stage stage = Stage::kAwaitAck;
    std::unique_ptr<MovementFlow> flow;
  };
  struct Drone {
    std::string id;
    std::shared_ptr<DroneLink> link;
    std::optional<Telemetry> telemetry;
    double last_seen = 0.0;
    bool lost = false;
    std::deque<Queued> queue;
    std::optional<Active> active;
    std::uint64_t next_id = 1;
    std::optional<Vec3> launch;
    std::optional<SampledTrajectory> plan;
    std::size_t telemetry_frames = 0;
  };
  struct Projection {
    FlightMode mode = FlightMode::kDisarmed;
    std::optional<Vec3> position;
  };

  Projection project(const Drone& d) const;
  static void apply(Projection& p, const Queued& q, const Drone& d);
  EnqueueResult validate(const Drone& d, const CommandRequest& request, Queued& out) const;
  void start_next(Drone& d, double now);
  void step_active(Drone& d, double now);
  void finish(Drone& d, bool ok, const std::string& reason, double now);
  void hold(Drone& d, double now);
  void send(Drone& d, const wire::Message& m);
  void status_event(const std::string& drone, const std::string& kind, const nlohmann::json& detail = {});
  Drone* find(const std::string& id);
  const Drone* find(const std::string& id) const;

  StationConfig config_;
  mutable std::recursive_mutex m_;
  std::map<std::string, Drone> drones_;
  std::vector<ExecutedCommand> log_;
  std::unique_ptr<TrajectoryGenerator> generator_;
  std::shared_ptr<TrajectoryFollower> follower_;
  EventBus events_;
  PluginManager plugins_;
  bool shut_down_ = false;
};

}  // namespace gmp3
