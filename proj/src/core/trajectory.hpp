#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "core/se3.hpp"

namespace gmp3 {

using Vector6 = Eigen::Matrix<double, 6, 1>;

struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 1.0;  // meters, > 0
};

/// Closed axis-aligned box.
struct Bounds {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Weights of the trajectory loss: translational smoothness (Q, symmetric
/// positive definite), squared rotational increments (mu), obstacle factor (lambda).
struct LossWeights {
  Mat3 q = Mat3::Identity();
  double mu = 0.0;
  double lambda = 0.0;

  /// Throws InvalidArgument when Q is not symmetric PD or mu/lambda are negative.
  void validate() const;
};

struct Scenario {
  Pose start;
  Pose goal;
  std::vector<Obstacle> obstacles;
  Bounds bounds;
  LossWeights weights;

  void validate() const;
};

/// Decision vector: n breakpoints, each (x, y, z, yaw, pitch, roll).
class BreakpointVector {
 public:
  static constexpr std::size_t kBlock = 6;

  explicit BreakpointVector(std::size_t count = 1);
  explicit BreakpointVector(Eigen::VectorXd params);

  std::size_t count() const { return static_cast<std::size_t>(params_.size()) / kBlock; }

  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Vector6 block(std::size_t i) const { return params_.segment<6>(static_cast<Eigen::Index>(kBlock * i)); }
  void set_block(std::size_t i, const Vector6& v) { params_.segment<6>(static_cast<Eigen::Index>(kBlock * i)) = v; }

  Vec3 position(std::size_t i) const { return params_.segment<3>(static_cast<Eigen::Index>(kBlock * i)); }
  EulerAngles angles(std::size_t i) const;

  /// Breakpoint i as a pose (rotation from its ZYX Euler triple).
  Pose pose(std::size_t i) const;

 private:
  Eigen::VectorXd params_;
};

/// Poses sampled at t_j = j * dt, j = 0..N.
struct SampledTrajectory {
  double dt = 0.0;
  std::vector<double> timestamps;
  std::vector<Pose> poses;

  std::size_t intervals() const { return poses.empty() ? 0 : poses.size() - 1; }
};

struct LossBreakdown {
  double total = 0.0;
  double smoothness = 0.0;  // sum dp^T Q dp
  double rotation = 0.0;    // mu * sum d_R^2
  double violation = 0.0;   // nu
};

struct Evaluation {
  LossBreakdown loss;
  SampledTrajectory trajectory;
};

/// Knots [start, breakpoints..., goal] at uniform fractions of N*dt; linear
/// positions and geodesic rotations between knots; N+1 uniform samples with
/// the endpoints copied verbatim from the scenario.
SampledTrajectory interpolate(const Scenario& scenario, const BreakpointVector& theta,
                              std::size_t samples, double dt);

/// Mean normalized penetration summed over obstacles (nu >= 0).
double violation(const SampledTrajectory& traj, const std::vector<Obstacle>& obstacles);

LossBreakdown loss(const SampledTrajectory& traj, const std::vector<Obstacle>& obstacles,
                   const LossWeights& w);

Evaluation evaluate(const Scenario& scenario, const BreakpointVector& theta, std::size_t samples,
                    double dt, const LossWeights& w);

/// Breakpoints evenly spaced on the start-goal chord with zero Euler angles.
BreakpointVector initial_theta(const Scenario& scenario, std::size_t count);

/// Smallest N with N * dt >= total_time (tolerant to binary rounding of dt).
std::size_t sample_count(double total_time, double dt);

}  // namespace gmp3
