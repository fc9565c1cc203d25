#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/se3.hpp"
#include "station/plugins.hpp"

namespace gmp3 {

/// Stage machine run by the station dispatcher: Ready, the declared stages,
/// then the terminal return-to-launch stage and Complete.
class Mission : public Plugin {
 public:
  enum class State { kReady, kRunning, kPaused, kReturning, kComplete };

  static constexpr const char* kReady = "Ready";
  static constexpr const char* kReturnToLaunch = "ReturnToLaunch";
  static constexpr const char* kComplete = "Complete";

  struct Stage {
    std::string name;
    std::function<void(double now)> enter;
    std::function<bool(double now)> done;
    /// Name of the following stage; empty goes to return-to-launch.
    std::function<std::string()> next;
    bool cyclic = false;  ///< may be entered more than once per run
  };

  Mission(std::string name, std::vector<std::string> drones, double altitude);

  std::vector<std::string> dependencies() const override { return {"fleet_monitor"}; }
  void on_load(PluginContext& ctx) override;
  void update(double now) override;
  nlohmann::json status() const override;

  bool start(double now, std::string* reason = nullptr);
  bool stop(double now, std::string* reason = nullptr);

  bool assigned(const std::string& drone) const;
  const std::vector<std::string>& drones() const { return drones_; }
  State state() const { return state_; }
  const std::string& stage() const { return stage_; }
  const std::vector<std::string>& history() const { return history_; }

 protected:
  void add_stage(Stage stage);
  GroundStation& station() { return *station_; }
  const GroundStation& station() const { return *station_; }
  double altitude() const { return altitude_; }

  /// Queues arm/takeoff as needed so the drone ends up airborne.
  void ensure_airborne(const std::string& drone, double now);
  void fly_to(const std::string& drone, const Vec3& target, double now);
  /// Idle and within the station's arrival tolerance of target.
  bool at(const std::string& drone, const Vec3& target) const;
  std::optional<Vec3> position(const std::string& drone) const;
  double battery(const std::string& drone) const;
  void report(const std::string& kind, const nlohmann::json& detail = nlohmann::json::object());

  virtual nlohmann::json extra_status() const { return nlohmann::json::object(); }

 private:
  void enter(const std::string& stage, double now);
  void enter_terminal(double now);
  bool any_lost() const;
  bool all_home() const;

  std::vector<std::string> drones_;
  double altitude_;
  GroundStation* station_ = nullptr;
  std::vector<Stage> stages_;
  State state_ = State::kReady;
  State resume_ = State::kRunning;
  std::string stage_ = kReady;
  std::vector<std::string> history_;
  std::set<std::string> visited_;
  std::string error_;
};

/// Declared stages, each flying assigned drones to fixed targets.
/// options: {"drones": [...], "altitude": 1.0,
///           "stages": [{"name": "S1", "targets": {"d1": [x, y, z]}}, ...]}
class WaypointMission final : public Mission {
 public:
  struct StageTargets {
    std::string name;
    std::map<std::string, Vec3> targets;
  };

  WaypointMission(std::string name, std::vector<std::string> drones, double altitude, std::vector<StageTargets> stages);
  static std::unique_ptr<WaypointMission> from_json(const std::string& name, const nlohmann::json& options);

  std::string type() const override { return "waypoint_mission"; }
};

/// One drone holds an observation point; when its battery drops below the
/// threshold the standby with the most charge launches to replace it and
/// the old observer returns to its launch point. Observe/Swap repeat.
/// options: {"drones": [...], "station": [x, y, z], "threshold": 0.3, "altitude": 1.0}
class ObserverSwapMission final : public Mission {
 public:
  ObserverSwapMission(std::string name, std::vector<std::string> drones, double altitude, Vec3 post,
                      double threshold);
  static std::unique_ptr<ObserverSwapMission> from_json(const std::string& name, const nlohmann::json& options);

  std::string type() const override { return "observer_swap"; }
  const std::string& observer() const { return observer_; }
  std::size_t swaps() const { return swaps_; }

 protected:
  nlohmann::json extra_status() const override;

 private:
  std::string best_standby() const;

  Vec3 post_;
  double threshold_;
  std::string observer_;
  std::size_t swaps_ = 0;
  bool no_standby_ = false;
};

std::string_view to_string(Mission::State state);

}  // namespace gmp3
