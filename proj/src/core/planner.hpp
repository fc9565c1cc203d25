#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/consensus.hpp"
#include "core/optimizers.hpp"
#include "core/trajectory.hpp"

namespace gmp3 {

/// Per-field replacements for the scenario's loss weights.
struct WeightOverrides {
  std::optional<Mat3> q;
  std::optional<double> mu;
  std::optional<double> lambda;

  LossWeights apply(LossWeights base) const;
  bool empty() const { return !q && !mu && !lambda; }
};

struct PlannerConfig {
  Hyperparams hyper;
  WeightOverrides weights;
  FdScheme scheme;
  OptimizerKind optimizer = OptimizerKind::kRmsProp;
  ConstantsProfile constants_profile = ConstantsProfile::kDefault;
  OptimizerConstants constants = default_constants(OptimizerKind::kRmsProp);
  std::size_t max_iterations = 100;
  double tolerance = 1e-6;  ///< relative, see stopping()
  bool stop_early = true;   ///< false runs exactly max_iterations sweeps
  double dt = 0.05;
  double total_time = 10.0;
  std::size_t samples = 0;  ///< N; 0 derives it from total_time / dt
  bool influence_aware = true;
  bool consensus = true;
  std::size_t n_agents = 3;
  bool clamp_speed = false;  ///< retime the flight trajectory to respect speed_cap
  double speed_cap = 0.25;   ///< m/s

  void validate() const;
  std::size_t resolved_samples() const;
};

struct PlanResult {
  SampledTrajectory trajectory;  ///< global-best decision vector
  BreakpointVector best_theta{1};

  std::vector<double> loss_history;       ///< best-so-far loss after each iteration
  std::vector<double> violation_history;  ///< nu of the best-so-far after each iteration
  std::vector<double> cumulative_violation;
  std::vector<double> sweep_loss_history;  ///< loss of the current iterate after each sweep
  std::vector<double> normalized_loss_history;

  double initial_loss = 0.0;
  double initial_violation = 0.0;
  double best_loss = 0.0;
  double final_violation = 0.0;
  double value = 0.0;  ///< discounted -loss over the sweep history
  std::size_t iterations_used = 0;

  bool failed = false;
  bool cancelled = false;
  std::string failure;

  double max_linear_speed = 0.0;  ///< max |dp| / dt over the trajectory
  double max_angular_rate = 0.0;  ///< max d_R / dt
  /// Same decision vector resampled so that no sample step exceeds speed_cap
  /// (only when clamp_speed is set; otherwise equal to trajectory).
  SampledTrajectory flight_trajectory;
};

/// Called after every iteration with (iteration, best loss); returning false cancels.
using PlanObserver = std::function<bool(std::size_t, double)>;

PlanResult plan(const Scenario& scenario, const PlannerConfig& config, const PlanObserver& observer = {});

/// history holds L_0, L_1, ..., L_k. True when k >= max_iterations or
/// |L_k - L_{k-1}| < tolerance * max(1, L_0).
bool stopping(std::span<const double> history, double tolerance, std::size_t max_iterations);

/// (L_k - L_best) / (L_0 - L_best), or zeros when L_0 <= L_best.
std::vector<double> normalized_loss(std::span<const double> history);

struct SpeedReport {
  double max_linear = 0.0;
  double max_angular = 0.0;
};
SpeedReport speed_report(const SampledTrajectory& traj);

/// Resample theta with the smallest N' >= samples whose linear speed stays within cap.
SampledTrajectory retime_to_speed_cap(const Scenario& scenario, const BreakpointVector& theta,
                                      std::size_t samples, double dt, double cap);

}  // namespace gmp3
