#include "core/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "core/errors.hpp"

namespace gmp3 {

std::string_view to_string(FdKind kind) {
  switch (kind) {
    case FdKind::kTwoPoint: return "two_point";
    case FdKind::kThreePoint: return "three_point";
    case FdKind::kFivePoint: return "five_point";
  }
  return "unknown";
}

std::optional<FdKind> parse_fd_kind(std::string_view name) {
  for (auto kind : {FdKind::kTwoPoint, FdKind::kThreePoint, FdKind::kFivePoint}) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void Hyperparams::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!ok(alpha) || !ok(beta1) || !ok(beta2) || !ok(consensus_gain)) {
    throw InvalidArgument("alpha, beta1, beta2 and consensus_gain must be finite and >= 0");
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");
}

ConsensusGraph::ConsensusGraph(std::vector<std::vector<Edge>> neighbors)
    : neighbors_(std::move(neighbors)) {
  const std::size_t n = neighbors_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = neighbors_[i];
    if (row.empty()) continue;
    double sum = 0.0;
    for (const auto& e : row) {
      if (e.neighbor >= n || e.neighbor == i) {
        throw InvalidArgument("consensus graph: bad neighbour index for agent " + std::to_string(i));
      }
      if (!std::isfinite(e.weight) || e.weight < 0.0) {
        throw InvalidArgument("consensus graph: weights must be finite and >= 0");
      }
      sum += e.weight;
      const auto& back = neighbors_[e.neighbor];
      const bool symmetric = std::any_of(back.begin(), back.end(),
                                         [i](const Edge& b) { return b.neighbor == i; });
      if (!symmetric) throw InvalidArgument("consensus graph must be symmetric");
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw InvalidArgument("consensus graph: weights of agent " + std::to_string(i) + " must sum to 1");
    }
  }
}

ConsensusGraph ConsensusGraph::chain(std::size_t n) {
  std::vector<std::vector<Edge>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> ids;
    if (i > 0) ids.push_back(i - 1);
    if (i + 1 < n) ids.push_back(i + 1);
    for (auto j : ids) rows[i].push_back({j, 1.0 / static_cast<double>(ids.size())});
  }
  return ConsensusGraph(std::move(rows));
}

ConsensusGraph ConsensusGraph::isolated(std::size_t n) {
  return ConsensusGraph(std::vector<std::vector<Edge>>(n));
}

SwarmState SwarmState::create(const Eigen::VectorXd& theta0, double loss0, ConsensusGraph graph,
                              Eigen::VectorXd anchor) {
  const BreakpointVector bp(theta0);  // validates shape
  if (graph.size() != bp.count()) throw InvalidArgument("graph size must equal agent count");
  if (anchor.size() == 0) anchor = Eigen::VectorXd::Zero(theta0.size());
  if (anchor.size() != theta0.size()) throw InvalidArgument("anchor size mismatch");

  SwarmState s;
  s.agents.resize(bp.count());
  for (std::size_t i = 0; i < bp.count(); ++i) {
    auto& a = s.agents[i];
    a.index = i;
    a.params = bp.block(i);
    a.personal_best = a.params;
    a.personal_best_loss = loss0;
  }
  s.global_best = theta0;
  s.global_best_loss = loss0;
  s.graph = std::move(graph);
  s.anchor = std::move(anchor);
  return s;
}

Eigen::VectorXd SwarmState::theta() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(6 * agents.size()));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    out.segment<6>(static_cast<Eigen::Index>(6 * i)) = agents[i].params;
  }
  return out;
}

Vector6 SwarmState::anchor_block(std::size_t i) const {
  return anchor.segment<6>(static_cast<Eigen::Index>(6 * i));
}

Vector6 SwarmState::global_best_block(std::size_t i) const {
  return global_best.segment<6>(static_cast<Eigen::Index>(6 * i));
}

Eigen::VectorXd fd_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                            const FdScheme& scheme, Eigen::Index begin, Eigen::Index count) {
  if (!(scheme.delta > 0.0) || !std::isfinite(scheme.delta)) {
    throw InvalidArgument("finite-difference delta must be > 0");
  }
  if (begin < 0 || count < 0 || begin + count > theta.size()) {
    throw InvalidArgument("gradient component range out of bounds");
  }
  Eigen::VectorXd grad(count);
  Eigen::VectorXd probe = theta;
  double scale = 0.0;

  auto eval = [&](Eigen::Index k, double offset) {
    probe[k] = theta[k] + offset;
    const double f = objective(probe);
    probe[k] = theta[k];
    scale = std::max(scale, std::abs(f));
    if (!std::isfinite(f)) {
      throw NumericFailure("non-finite objective at finite-difference probe of component " +
                               std::to_string(k),
                           k);
    }
    return f;
  };

  double f0 = 0.0;
  if (scheme.kind == FdKind::kThreePoint) {
    f0 = objective(theta);
    if (!std::isfinite(f0)) throw NumericFailure("non-finite objective at base point", begin);
  }
  const double base_scale = std::abs(f0);

  for (Eigen::Index c = 0; c < count; ++c) {
    const Eigen::Index k = begin + c;
    scale = base_scale;
    // Representable step, so that probes at +-h are exactly symmetric.
    double d = (theta[k] + scheme.delta) - theta[k];
    if (!(d > 0.0)) d = scheme.delta;
    switch (scheme.kind) {
      case FdKind::kTwoPoint:
        grad[c] = (eval(k, d) - eval(k, -d)) / (2.0 * d);
        break;
      case FdKind::kThreePoint:
        grad[c] = (4.0 * eval(k, d) - eval(k, 2.0 * d) - 3.0 * f0) / (2.0 * d);
        break;
      case FdKind::kFivePoint:
        grad[c] = (-eval(k, 2.0 * d) + 8.0 * eval(k, d) - 8.0 * eval(k, -d) + eval(k, -2.0 * d)) /
                  (12.0 * d);
        break;
    }
    if (std::abs(grad[c]) <= kFdNoise * scale / d) grad[c] = 0.0;
  }
  return grad;
}

Eigen::VectorXd fd_gradient(const Objective& objective, const Eigen::VectorXd& theta,
                            const FdScheme& scheme) {
  return fd_gradient(objective, theta, scheme, 0, theta.size());
}

Vector6 consensus_term(std::size_t i, const SwarmState& swarm) {
  Vector6 term = Vector6::Zero();
  const Vector6 own = swarm.agents.at(i).params - swarm.anchor_block(i);
  for (const auto& e : swarm.graph.neighbors(i)) {
    const Vector6 other = swarm.agents.at(e.neighbor).params - swarm.anchor_block(e.neighbor);
    term += e.weight * (own - other);
  }
  return term;
}

Vector6 composite_direction(std::size_t i, const Vector6& grad_block, const SwarmState& swarm,
                            const Hyperparams& h) {
  const auto& agent = swarm.agents.at(i);
  return h.alpha * grad_block + h.beta1 * (agent.params - agent.personal_best) +
         h.beta2 * (agent.params - swarm.global_best_block(i)) +
         h.consensus_gain * consensus_term(i, swarm);
}

double sweep(SwarmState& swarm, const Objective& objective, const FdScheme& scheme,
             const Hyperparams& h, std::vector<OptimizerState>& optimizers) {
  if (optimizers.size() != swarm.agents.size()) {
    throw InvalidArgument("one optimizer state per agent is required");
  }
  SwarmState next = swarm;
  std::vector<OptimizerState> opt = optimizers;
  double last = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t i = 0; i < next.agents.size(); ++i) {
    const auto begin = static_cast<Eigen::Index>(6 * i);
    const Vector6 grad = fd_gradient(objective, next.theta(), scheme, begin, 6);
    const Vector6 direction = composite_direction(i, grad, next, h);
    const Vector6 delta = opt[i].step(direction);

    auto& agent = next.agents[i];
    agent.params += delta;
    if (!agent.params.allFinite()) {
      throw NumericFailure("agent " + std::to_string(i) + " parameters became non-finite", begin);
    }
    const Eigen::VectorXd theta = next.theta();
    last = objective(theta);
    if (!std::isfinite(last)) {
      throw NumericFailure("non-finite objective after agent " + std::to_string(i) + " update", begin);
    }
    if (last < agent.personal_best_loss) {
      agent.personal_best_loss = last;
      agent.personal_best = agent.params;
    }
    if (last < next.global_best_loss) {
      next.global_best_loss = last;
      next.global_best = theta;
    }
  }

  swarm = std::move(next);
  optimizers = std::move(opt);
  return last;
}

double value_estimate(std::span<const double> loss_history, double gamma) {
  double value = 0.0;
  double discount = 1.0;
  for (double l : loss_history) {
    value += discount * (-l);
    discount *= gamma;
  }
  return value;
}

std::size_t DiscreteInstance::joint_actions() const {
  std::size_t total = 1;
  for (auto a : agent_actions) total *= a;
  return agent_actions.empty() ? 0 : total;
}

std::size_t DiscreteInstance::joint_index(std::span<const std::size_t> per_agent) const {
  if (per_agent.size() != agent_actions.size()) throw InvalidInstance("joint action arity mismatch");
  std::size_t index = 0;
  std::size_t stride = 1;
  for (std::size_t i = 0; i < per_agent.size(); ++i) {
    if (per_agent[i] >= agent_actions[i]) throw InvalidInstance("action index out of range");
    index += per_agent[i] * stride;
    stride *= agent_actions[i];
  }
  return index;
}

void DiscreteInstance::validate() const {
  const std::size_t joint = joint_actions();
  if (states == 0 || joint == 0) throw InvalidInstance("instance needs states and actions");
  if (loss.size() != states || next.size() != states) throw InvalidInstance("tables must have one row per state");
  for (std::size_t s = 0; s < states; ++s) {
    if (loss[s].size() != joint || next[s].size() != joint) {
      throw InvalidInstance("row " + std::to_string(s) + " must have one entry per joint action");
    }
    for (std::size_t a = 0; a < joint; ++a) {
      if (next[s][a] >= states) {
        throw InvalidInstance("successor of state " + std::to_string(s) + " is not in the state set");
      }
      if (!std::isfinite(loss[s][a])) throw InvalidInstance("loss table must be finite");
    }
  }
}

std::vector<double> bellman_apply(std::span<const double> value, const DiscreteInstance& instance,
                                  double gamma) {
  instance.validate();
  if (value.size() != instance.states) throw InvalidInstance("value table size must equal state count");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidArgument("gamma must lie in [0, 1]");

  std::vector<double> out(instance.states);
  const std::size_t joint = instance.joint_actions();
  for (std::size_t s = 0; s < instance.states; ++s) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < joint; ++a) {
      best = std::min(best, instance.loss[s][a] + gamma * value[instance.next[s][a]]);
    }
    out[s] = best;
  }
  return out;
}

}  // namespace gmp3
