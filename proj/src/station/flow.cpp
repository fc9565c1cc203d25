#include "station/flow.hpp"

#include <chrono>
#include <cmath>

#include "core/errors.hpp"

namespace gmp3 {

Waypoint waypoint_query(const SampledTrajectory& plan, double t) {
  if (plan.poses.empty()) throw InvalidArgument("waypoint query on an empty plan");
  const std::size_t last = plan.poses.size() - 1;
  std::size_t index = 0;
  if (t > 0.0 && plan.dt > 0.0) {
    const double k = std::floor(t / plan.dt);
    index = k >= static_cast<double>(last) ? last : static_cast<std::size_t>(k);
  }
  const Pose& p = plan.poses[index];
  return {p.position, se3::rot_to_euler(p.rotation).yaw, index};
}

std::shared_future<GeneratedPlan> PassThroughGenerator::generate(const PlanRequest& request) {
  GeneratedPlan plan;
  plan.ok = true;
  plan.trajectory.dt = 0.2;
  plan.trajectory.timestamps = {0.0};
  Pose goal;
  goal.position = request.target;
  goal.rotation = se3::rot_z(request.target_yaw);
  plan.trajectory.poses = {goal};
  std::promise<GeneratedPlan> p;
  p.set_value(std::move(plan));
  return p.get_future().share();
}

Gmp3Generator::Gmp3Generator(Scenario environment, PlannerConfig config, bool inline_execution)
    : environment_(std::move(environment)), config_(std::move(config)), inline_(inline_execution) {
  config_.validate();
}

GeneratedPlan Gmp3Generator::run(const Scenario& environment, const PlannerConfig& config,
                                 const PlanRequest& request) {
  GeneratedPlan out;
  try {
    Scenario s = environment;
    s.start = request.from;
    s.goal.position = request.target;
    s.goal.rotation = se3::rot_z(request.target_yaw);
    const PlanResult r = plan(s, config);
    if (r.failed) {
      out.error = "planner failure: " + r.failure;
      return out;
    }
    out.ok = true;
    out.trajectory = r.flight_trajectory;
  } catch (const std::exception& e) {
    out.error = std::string("planner failure: ") + e.what();
  }
  return out;
}

std::shared_future<GeneratedPlan> Gmp3Generator::generate(const PlanRequest& request) {
  const auto policy = inline_ ? std::launch::deferred : std::launch::async;
  return std::async(policy, [env = environment_, cfg = config_, request] { return run(env, cfg, request); }).share();
}

MovementFlow::MovementFlow(PlanRequest request, std::shared_future<GeneratedPlan> plan,
                           std::shared_ptr<TrajectoryFollower> follower)
    : request_(std::move(request)), pending_(std::move(plan)), follower_(std::move(follower)) {
  if (!follower_) throw InvalidArgument("movement flow needs a follower");
}

std::optional<Setpoint> MovementFlow::update(double now) {
  if (phase_ == Phase::kPlanning) {
    if (pending_.wait_for(std::chrono::seconds(0)) == std::future_status::timeout) return std::nullopt;
    plan_ = pending_.get();
    if (!plan_->ok || plan_->trajectory.poses.empty()) {
      phase_ = Phase::kFailed;
      error_ = plan_->error.empty() ? "planner returned no trajectory" : plan_->error;
      plan_.reset();
      return std::nullopt;
    }
    phase_ = Phase::kFollowing;
    started_ = now;
  }
  if (phase_ != Phase::kFollowing) return std::nullopt;

  const Waypoint wp = follower_->follow(plan_->trajectory, now - started_);
  if (last_index_ && *last_index_ == wp.index) return std::nullopt;
  last_index_ = wp.index;
  if (wp.index + 1 == plan_->trajectory.poses.size()) final_emitted_ = true;
  return Setpoint{now, wp.position, wp.yaw};
}

Vec3 MovementFlow::final_position() const {
  return plan_ ? plan_->trajectory.poses.back().position : request_.target;
}

}  // namespace gmp3
