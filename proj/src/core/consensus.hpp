#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "core/optimizers.hpp"
#include "core/trajectory.hpp"

namespace gmp3 {

enum class FdKind { kTwoPoint, kThreePoint, kFivePoint };

std::string_view to_string(FdKind kind);
std::optional<FdKind> parse_fd_kind(std::string_view name);

struct FdScheme {
  FdKind kind = FdKind::kTwoPoint;
  double delta = 1e-3;  // perturbation magnitude, > 0
};

struct Hyperparams {
  double alpha = 0.0028;  // gradient gain
  double beta1 = 0.0028;  // pull toward personal best
  double beta2 = 0.0028;  // pull toward global best
  double gamma = 1.0;     // discount for value bookkeeping
  double consensus_gain = 1.0;

  void validate() const;
};

/// Neighbour sets with row weights summing to 1; symmetric as a relation.
class ConsensusGraph {
 public:
  struct Edge {
    std::size_t neighbor;
    double weight;
  };

  ConsensusGraph() = default;

  /// Validates weights (>= 0, rows sum to 1) and symmetry.
  explicit ConsensusGraph(std::vector<std::vector<Edge>> neighbors);

  /// 1 - 2 - ... - n with w_ij = 1/|N_i|.
  static ConsensusGraph chain(std::size_t n);
  static ConsensusGraph isolated(std::size_t n);

  std::size_t size() const { return neighbors_.size(); }
  const std::vector<Edge>& neighbors(std::size_t i) const { return neighbors_.at(i); }

 private:
  std::vector<std::vector<Edge>> neighbors_;
};

struct AgentState {
  std::size_t index = 0;
  Vector6 params = Vector6::Zero();
  Vector6 personal_best = Vector6::Zero();
  double personal_best_loss = 0.0;
};

struct SwarmState {
  std::vector<AgentState> agents;
  Eigen::VectorXd global_best;
  double global_best_loss = 0.0;
  ConsensusGraph graph;
  /// Reference decision vector; consensus compares displacements params - anchor.
  Eigen::VectorXd anchor;

  /// Bests start at theta0 / loss0. A zero-length anchor means a zero anchor.
  static SwarmState create(const Eigen::VectorXd& theta0, double loss0, ConsensusGraph graph,
                           Eigen::VectorXd anchor = {});

  Eigen::VectorXd theta() const;
  Vector6 anchor_block(std::size_t i) const;
  Vector6 global_best_block(std::size_t i) const;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Rounding-noise floor: a component with |g| <= kFdNoise * max|f probe| / delta
/// is indistinguishable from zero and is returned as exactly 0.
inline constexpr double kFdNoise = 64.0 * 2.220446049250313e-16;

/// Finite-difference gradient over components [begin, begin + count).
/// Throws NumericFailure carrying the component index on a non-finite probe.
Eigen::VectorXd fd_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                            const FdScheme& scheme, Eigen::Index begin, Eigen::Index count);

/// Full gradient.
Eigen::VectorXd fd_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                            const FdScheme& scheme);

/// sum_j w_ij (d_i - d_j) with d = params - anchor; zero for an empty neighbour set.
Vector6 consensus_term(std::size_t i, const SwarmState& swarm);

/// alpha*grad + beta1*(pi - personal best) + beta2*(pi - global best block)
/// + consensus_gain*consensus_term.
Vector6 composite_direction(std::size_t i, const Vector6& grad_block, const SwarmState& swarm,
                            const Hyperparams& h);

/// One Gauss-Seidel pass over the agents in index order. Returns the
/// objective after the last agent's update. On NumericFailure neither the
/// swarm nor the optimizer states are modified.
double sweep(SwarmState& swarm, const Objective& objective, const FdScheme& scheme,
             const Hyperparams& h, std::vector<OptimizerState>& optimizers);

/// sum_k gamma^k * (-loss_k)
double value_estimate(std::span<const double> loss_history, double gamma);

/// Finite deterministic multi-agent instance for checking the Bellman backup.
struct DiscreteInstance {
  std::size_t states = 0;
  std::vector<std::size_t> agent_actions;  // action count per agent
  /// [state][joint action]; joint index is mixed radix with agent 0 fastest.
  std::vector<std::vector<double>> loss;
  std::vector<std::vector<std::size_t>> next;

  std::size_t joint_actions() const;
  std::size_t joint_index(std::span<const std::size_t> per_agent) const;

  /// Throws InvalidInstance on shape errors or unreachable successors.
  void validate() const;
};

/// (TV)(s) = min over joint actions [loss(s, a) + gamma V(next(s, a))].
std::vector<double> bellman_apply(std::span<const double> value, const DiscreteInstance& instance,
                                  double gamma);

}  // namespace gmp3
