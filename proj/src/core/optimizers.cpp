#include "core/optimizers.hpp"

#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace gmp3 {

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kMgd: return "mgd";
    case OptimizerKind::kAdaGrad: return "adagrad";
    case OptimizerKind::kRmsProp: return "rmsprop";
    case OptimizerKind::kAdaDelta: return "adadelta";
    case OptimizerKind::kAdam: return "adam";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name) {
  for (auto kind : kAllOptimizers) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

void OptimizerConstants::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v < 1.0; };
  if (!std::isfinite(eta) || eta <= 0.0) throw InvalidArgument("optimizer eta must be > 0");
  if (!in_unit(momentum)) throw InvalidArgument("MGD momentum must lie in [0, 1)");
  if (!in_unit(decay)) throw InvalidArgument("RMSProp decay must lie in [0, 1)");
  if (!in_unit(rho)) throw InvalidArgument("AdaDelta rho must lie in [0, 1)");
  if (!in_unit(adam_beta1) || !in_unit(adam_beta2)) throw InvalidArgument("Adam betas must lie in [0, 1)");
  if (!std::isfinite(epsilon) || epsilon <= 0.0) throw InvalidArgument("epsilon must be > 0");
}

OptimizerConstants default_constants(OptimizerKind kind, ConstantsProfile profile) {
  OptimizerConstants c;
  if (kind == OptimizerKind::kAdaDelta) c.epsilon = 1e-6;
  if (kind == OptimizerKind::kRmsProp && profile == ConstantsProfile::kPaper) c.decay = 0.01;
  return c;
}

OptimizerState::OptimizerState(OptimizerKind kind, const OptimizerConstants& constants, Eigen::Index dim)
    : kind_(kind),
      constants_(constants),
      first_(Eigen::VectorXd::Zero(dim)),
      second_(Eigen::VectorXd::Zero(dim)) {
  constants_.validate();
}

Eigen::VectorXd OptimizerState::step(const Eigen::VectorXd& g) {
  if (g.size() != first_.size()) throw InvalidArgument("gradient dimension mismatch");
  const auto& c = constants_;
  const Eigen::ArrayXd g2 = g.array().square();

  Eigen::VectorXd first = first_;
  Eigen::VectorXd second = second_;
  Eigen::VectorXd delta;
  long steps = steps_ + 1;

  switch (kind_) {
    case OptimizerKind::kMgd:
      first = c.momentum * first - g;
      delta = first;
      break;
    case OptimizerKind::kAdaGrad:
      first = (first.array() + g2).matrix();
      delta = (-c.eta * g.array() / (first.array() + c.epsilon).sqrt()).matrix();
      break;
    case OptimizerKind::kRmsProp:
      first = (c.decay * first.array() + (1.0 - c.decay) * g2).matrix();
      delta = (-c.eta * g.array() / (first.array() + c.epsilon).sqrt()).matrix();
      break;
    case OptimizerKind::kAdaDelta:
      first = (c.rho * first.array() + (1.0 - c.rho) * g2).matrix();
      delta = (-(second.array() + c.epsilon).sqrt() / (first.array() + c.epsilon).sqrt() * g.array())
                  .matrix();
      second = (c.rho * second.array() + (1.0 - c.rho) * delta.array().square()).matrix();
      break;
    case OptimizerKind::kAdam: {
      first = c.adam_beta1 * first + (1.0 - c.adam_beta1) * g;
      second = (c.adam_beta2 * second.array() + (1.0 - c.adam_beta2) * g2).matrix();
      const double t = static_cast<double>(steps);
      const Eigen::ArrayXd m_hat = first.array() / (1.0 - std::pow(c.adam_beta1, t));
      const Eigen::ArrayXd v_hat = second.array() / (1.0 - std::pow(c.adam_beta2, t));
      delta = (-c.eta * m_hat / (v_hat + c.epsilon).sqrt()).matrix();
      break;
    }
  }

  if (!first.allFinite() || !second.allFinite() || !delta.allFinite()) {
    throw NumericFailure(std::string(to_string(kind_)) + ": non-finite accumulator or step");
  }
  first_ = std::move(first);
  second_ = std::move(second);
  steps_ = steps;
  return delta;
}

}  // namespace gmp3
