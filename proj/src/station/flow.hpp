#pragma once

#include <cstddef>
#include <future>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "core/planner.hpp"
#include "core/trajectory.hpp"
#include "sim/drone.hpp"

namespace gmp3 {

struct Waypoint {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  std::size_t index = 0;
};

/// Sample floor(t / dt), clamped to the plan. Throws InvalidArgument on an empty plan.
Waypoint waypoint_query(const SampledTrajectory& plan, double t);

struct PlanRequest {
  std::string drone_id;
  Pose from;
  Vec3 target = Vec3::Zero();
  double target_yaw = 0.0;
};

struct GeneratedPlan {
  bool ok = false;
  std::string error;
  SampledTrajectory trajectory;
};

/// Long-horizon side of the split flow.
class TrajectoryGenerator {
 public:
  virtual ~TrajectoryGenerator() = default;
  virtual std::string_view name() const = 0;
  /// Must not block the caller for the duration of planning.
  virtual std::shared_future<GeneratedPlan> generate(const PlanRequest& request) = 0;
};

/// One-sample plan holding the target.
class PassThroughGenerator final : public TrajectoryGenerator {
 public:
  std::string_view name() const override { return "passthrough"; }
  std::shared_future<GeneratedPlan> generate(const PlanRequest& request) override;
};

/// Runs the planner from the current pose to the target over the
/// environment's obstacles. Uses the flight (speed-capped) trajectory.
class Gmp3Generator final : public TrajectoryGenerator {
 public:
  /// inline_execution runs the planner lazily on the first poll instead of on
  /// a worker thread; used by deterministic virtual-time harnesses.
  Gmp3Generator(Scenario environment, PlannerConfig config, bool inline_execution = false);

  std::string_view name() const override { return "gmp3"; }
  std::shared_future<GeneratedPlan> generate(const PlanRequest& request) override;

  static GeneratedPlan run(const Scenario& environment, const PlannerConfig& config, const PlanRequest& request);

 private:
  Scenario environment_;
  PlannerConfig config_;
  bool inline_;
};

/// Short-horizon side: picks the waypoint to track at a given elapsed time.
/// A local-avoidance follower would plug in here.
class TrajectoryFollower {
 public:
  virtual ~TrajectoryFollower() = default;
  virtual std::string_view name() const = 0;
  virtual Waypoint follow(const SampledTrajectory& plan, double elapsed) = 0;
};

class PassThroughFollower final : public TrajectoryFollower {
 public:
  std::string_view name() const override { return "passthrough"; }
  Waypoint follow(const SampledTrajectory& plan, double elapsed) override { return waypoint_query(plan, elapsed); }
};

/// One goto: waits for the plan without blocking, then emits a setpoint
/// each time the followed waypoint changes.
class MovementFlow {
 public:
  enum class Phase { kPlanning, kFollowing, kFailed };

  MovementFlow(PlanRequest request, std::shared_future<GeneratedPlan> plan,
               std::shared_ptr<TrajectoryFollower> follower);

  std::optional<Setpoint> update(double now);

  Phase phase() const { return phase_; }
  const PlanRequest& request() const { return request_; }
  const std::string& error() const { return error_; }
  /// Null until the plan arrives.
  const SampledTrajectory* trajectory() const { return plan_ ? &plan_->trajectory : nullptr; }
  bool final_emitted() const { return final_emitted_; }
  Vec3 final_position() const;

 private:
  PlanRequest request_;
  std::shared_future<GeneratedPlan> pending_;
  std::optional<GeneratedPlan> plan_;
  std::shared_ptr<TrajectoryFollower> follower_;
  Phase phase_ = Phase::kPlanning;
  std::string error_;
  double started_ = 0.0;
  std::optional<std::size_t> last_index_;
  bool final_emitted_ = false;
};

}  // namespace gmp3
