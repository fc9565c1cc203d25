#include "core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "core/errors.hpp"

namespace gmp3 {

void LossWeights::validate() const {
  if (!q.allFinite() || (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw InvalidArgument("Q must be finite and symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    throw InvalidArgument("Q must be positive definite");
  }
  if (!std::isfinite(mu) || mu < 0.0) throw InvalidArgument("mu must be finite and >= 0");
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidArgument("lambda must be finite and >= 0");
}

void Scenario::validate() const {
  if (!(bounds.min.array() < bounds.max.array()).all()) {
    throw InvalidArgument("bounds: min must be below max on every axis");
  }
  if (!se3::is_rotation(start.rotation) || !se3::is_rotation(goal.rotation)) {
    throw InvalidArgument("start/goal rotation is not a valid rotation");
  }
  if (!bounds.contains(start.position)) throw InvalidArgument("start lies outside bounds");
  if (!bounds.contains(goal.position)) throw InvalidArgument("goal lies outside bounds");
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const auto& o = obstacles[k];
    if (!o.center.allFinite() || !std::isfinite(o.radius) || o.radius <= 0.0) {
      throw InvalidArgument("obstacle " + std::to_string(k) + " needs a finite center and radius > 0");
    }
  }
  weights.validate();
}

BreakpointVector::BreakpointVector(std::size_t count)
    : params_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kBlock * count))) {
  if (count == 0) throw InvalidArgument("at least one breakpoint is required");
}

BreakpointVector::BreakpointVector(Eigen::VectorXd params) : params_(std::move(params)) {
  if (params_.size() == 0 || params_.size() % static_cast<Eigen::Index>(kBlock) != 0) {
    throw InvalidArgument("decision vector length must be a positive multiple of 6");
  }
  if (!params_.allFinite()) throw InvalidArgument("decision vector must be finite");
}

EulerAngles BreakpointVector::angles(std::size_t i) const {
  const auto base = static_cast<Eigen::Index>(kBlock * i);
  return {params_[base + 3], params_[base + 4], params_[base + 5]};
}

Pose BreakpointVector::pose(std::size_t i) const {
  Pose p;
  p.position = position(i);
  p.rotation = se3::euler_to_rot(angles(i));
  return p;
}

SampledTrajectory interpolate(const Scenario& scenario, const BreakpointVector& theta,
                              std::size_t samples, double dt) {
  const std::size_t n = theta.count();
  if (samples < n + 1) {
    throw InvalidArgument("sample count N must be at least breakpoints + 1");
  }
  if (!std::isfinite(dt) || dt <= 0.0) throw InvalidArgument("dt must be positive");

  std::vector<Pose> knots;
  knots.reserve(n + 2);
  knots.push_back(scenario.start);
  for (std::size_t i = 0; i < n; ++i) knots.push_back(theta.pose(i));
  knots.push_back(scenario.goal);

  std::vector<Vec3> segment_log(n + 1);
  for (std::size_t m = 0; m <= n; ++m) {
    segment_log[m] =
        se3::log_so3(knots[m].rotation.transpose() * knots[m + 1].rotation, PiBranch::kCanonical);
  }

  SampledTrajectory out;
  out.dt = dt;
  out.timestamps.resize(samples + 1);
  out.poses.resize(samples + 1);
  for (std::size_t j = 0; j <= samples; ++j) {
    out.timestamps[j] = static_cast<double>(j) * dt;
    // Integer arithmetic keeps knot hits exact.
    const std::size_t scaled = j * (n + 1);
    const std::size_t m = std::min(scaled / samples, n);
    const double u = static_cast<double>(scaled - m * samples) / static_cast<double>(samples);
    Pose& p = out.poses[j];
    p.position = knots[m].position + u * (knots[m + 1].position - knots[m].position);
    p.rotation = knots[m].rotation * se3::exp_so3(u * segment_log[m]);
  }
  out.poses.front() = scenario.start;
  out.poses.back() = scenario.goal;
  return out;
}

double violation(const SampledTrajectory& traj, const std::vector<Obstacle>& obstacles) {
  const double count = static_cast<double>(traj.poses.size());
  double nu = 0.0;
  for (const auto& obstacle : obstacles) {
    double sum = 0.0;
    for (const auto& pose : traj.poses) {
      const double d = (pose.position - obstacle.center).norm();
      sum += std::max(1.0 - d / obstacle.radius, 0.0);
    }
    nu += sum / count;
  }
  return nu;
}

LossBreakdown loss(const SampledTrajectory& traj, const std::vector<Obstacle>& obstacles,
                   const LossWeights& w) {
  LossBreakdown out;
  double rotation_sum = 0.0;
  for (std::size_t j = 0; j + 1 < traj.poses.size(); ++j) {
    const Vec3 dp = traj.poses[j + 1].position - traj.poses[j].position;
    out.smoothness += dp.dot(w.q * dp);
    const double dr = se3::geodesic_distance(traj.poses[j].rotation, traj.poses[j + 1].rotation);
    rotation_sum += dr * dr;
  }
  out.rotation = w.mu * rotation_sum;
  out.violation = violation(traj, obstacles);
  out.total = (out.smoothness + out.rotation) * (1.0 + w.lambda * out.violation);
  return out;
}

Evaluation evaluate(const Scenario& scenario, const BreakpointVector& theta, std::size_t samples,
                    double dt, const LossWeights& w) {
  Evaluation e;
  e.trajectory = interpolate(scenario, theta, samples, dt);
  e.loss = loss(e.trajectory, scenario.obstacles, w);
  return e;
}

BreakpointVector initial_theta(const Scenario& scenario, std::size_t count) {
  BreakpointVector theta(count);
  const Vec3 chord = scenario.goal.position - scenario.start.position;
  for (std::size_t i = 0; i < count; ++i) {
    Vector6 block = Vector6::Zero();
    const double fraction = static_cast<double>(i + 1) / static_cast<double>(count + 1);
    block.head<3>() = scenario.start.position + fraction * chord;
    theta.set_block(i, block);
  }
  return theta;
}

std::size_t sample_count(double total_time, double dt) {
  if (!(total_time > 0.0) || !(dt > 0.0)) throw InvalidArgument("total_time and dt must be positive");
  const double ratio = total_time / dt;
  return static_cast<std::size_t>(std::max(1.0, std::ceil(ratio - 1e-9)));
}

}  // namespace gmp3
