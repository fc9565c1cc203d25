#include "core/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/errors.hpp"

namespace gmp3 {

LossWeights WeightOverrides::apply(LossWeights base) const {
  if (q) base.q = *q;
  if (mu) base.mu = *mu;
  if (lambda) base.lambda = *lambda;
  return base;
}

void PlannerConfig::validate() const {
  hyper.validate();
  if (!(scheme.delta > 0.0) || !std::isfinite(scheme.delta)) throw InvalidArgument("fd_delta must be > 0");
  constants.validate();
  if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw InvalidArgument("tolerance must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("dt must be > 0");
  if (samples == 0 && (!(total_time > 0.0) || !std::isfinite(total_time))) {
    throw InvalidArgument("total_time must be > 0 when N is not given");
  }
  if (n_agents < 1) throw InvalidArgument("n_agents must be >= 1");
  if (resolved_samples() < n_agents + 1) throw InvalidArgument("N must be at least n_agents + 1");
  if (clamp_speed && (!(speed_cap > 0.0) || !std::isfinite(speed_cap))) {
    throw InvalidArgument("speed_cap must be > 0 when clamp_speed is set");
  }
}

std::size_t PlannerConfig::resolved_samples() const {
  return samples != 0 ? samples : sample_count(total_time, dt);
}

bool stopping(std::span<const double> history, double tolerance, std::size_t max_iterations) {
  if (history.empty()) throw InvalidArgument("stopping needs a non-empty history");
  const std::size_t k = history.size() - 1;
  if (k >= max_iterations) return true;
  if (k == 0) return false;
  const double scale = std::max(1.0, history.front());
  return std::abs(history[k] - history[k - 1]) < tolerance * scale;
}

std::vector<double> normalized_loss(std::span<const double> history) {
  if (history.empty()) throw InvalidArgument("normalized_loss needs a non-empty history");
  const double best = *std::min_element(history.begin(), history.end());
  const double span = history.front() - best;
  std::vector<double> out(history.size(), 0.0);
  if (span > 0.0) {
    for (std::size_t k = 0; k < history.size(); ++k) out[k] = (history[k] - best) / span;
  }
  return out;
}

SpeedReport speed_report(const SampledTrajectory& traj) {
  SpeedReport r;
  for (std::size_t j = 0; j + 1 < traj.poses.size(); ++j) {
    const double dp = (traj.poses[j + 1].position - traj.poses[j].position).norm();
    const double dr = se3::geodesic_distance(traj.poses[j].rotation, traj.poses[j + 1].rotation);
    r.max_linear = std::max(r.max_linear, dp / traj.dt);
    r.max_angular = std::max(r.max_angular, dr / traj.dt);
  }
  return r;
}

SampledTrajectory retime_to_speed_cap(const Scenario& scenario, const BreakpointVector& theta,
                                      std::size_t samples, double dt, double cap) {
  SampledTrajectory traj = interpolate(scenario, theta, samples, dt);
  const double vmax = speed_report(traj).max_linear;
  if (vmax <= cap) return traj;
  // Linear segments: speed scales as 1/N, so this guess is at most a few samples short.
  auto n = static_cast<std::size_t>(std::ceil(static_cast<double>(samples) * vmax / cap));
  for (;; ++n) {
    traj = interpolate(scenario, theta, n, dt);
    if (speed_report(traj).max_linear <= cap) return traj;
  }
}

PlanResult plan(const Scenario& scenario, const PlannerConfig& config, const PlanObserver& observer) {
  config.validate();
  scenario.validate();
  const LossWeights weights = config.weights.apply(scenario.weights);
  weights.validate();

  const std::size_t samples = config.resolved_samples();
  const double dt = config.dt;
  const std::size_t n = config.n_agents;

  const Objective objective = [&](const Eigen::VectorXd& p) -> double {
    if (!p.allFinite()) return std::numeric_limits<double>::quiet_NaN();
    return evaluate(scenario, BreakpointVector(p), samples, dt, weights).loss.total;
  };

  const BreakpointVector theta0 = initial_theta(scenario, n);
  const Evaluation initial = evaluate(scenario, theta0, samples, dt, weights);

  Hyperparams hyper = config.hyper;
  if (!config.influence_aware) {
    hyper.beta1 = 0.0;
    hyper.beta2 = 0.0;
  }
  ConsensusGraph graph = config.consensus ? ConsensusGraph::chain(n) : ConsensusGraph::isolated(n);
  SwarmState swarm = SwarmState::create(theta0.params(), initial.loss.total, std::move(graph), theta0.params());
  std::vector<OptimizerState> optimizers(n, OptimizerState(config.optimizer, config.constants, 6));

  PlanResult result;
  result.initial_loss = initial.loss.total;
  result.initial_violation = initial.loss.violation;

  std::vector<double> stop_history{initial.loss.total};
  double running_violation = 0.0;
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    double after = 0.0;
    try {
      after = sweep(swarm, objective, config.scheme, hyper, optimizers);
    } catch (const NumericFailure& e) {
      result.failed = true;
      result.failure = e.what();
      break;
    }
    const Evaluation best = evaluate(scenario, BreakpointVector(swarm.global_best), samples, dt, weights);
    result.loss_history.push_back(swarm.global_best_loss);
    result.violation_history.push_back(best.loss.violation);
    running_violation += best.loss.violation;
    result.cumulative_violation.push_back(running_violation);
    result.sweep_loss_history.push_back(after);
    stop_history.push_back(after);
    result.iterations_used = k;

    if (observer && !observer(k, swarm.global_best_loss)) {
      result.cancelled = true;
      break;
    }
    if (config.stop_early && stopping(stop_history, config.tolerance, config.max_iterations)) break;
  }

  result.best_theta = BreakpointVector(swarm.global_best);
  const Evaluation final_eval = evaluate(scenario, result.best_theta, samples, dt, weights);
  result.trajectory = final_eval.trajectory;
  result.best_loss = swarm.global_best_loss;
  result.final_violation = final_eval.loss.violation;
  result.value = value_estimate(result.sweep_loss_history, config.hyper.gamma);

  std::vector<double> with_initial{result.initial_loss};
  with_initial.insert(with_initial.end(), result.loss_history.begin(), result.loss_history.end());
  const auto normalized = normalized_loss(with_initial);
  result.normalized_loss_history.assign(normalized.begin() + 1, normalized.end());

  const SpeedReport speeds = speed_report(result.trajectory);
  result.max_linear_speed = speeds.max_linear;
  result.max_angular_rate = speeds.max_angular;
  result.flight_trajectory =
      config.clamp_speed
          ? retime_to_speed_cap(scenario, result.best_theta, samples, dt, config.speed_cap)
          : result.trajectory;
  return result;
}

}  // namespace gmp3
