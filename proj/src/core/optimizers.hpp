#pragma once

#include <array>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace gmp3 {

enum class OptimizerKind { kMgd, kAdaGrad, kRmsProp, kAdaDelta, kAdam };

inline constexpr std::array<OptimizerKind, 5> kAllOptimizers = {
    OptimizerKind::kMgd, OptimizerKind::kAdaGrad, OptimizerKind::kRmsProp, OptimizerKind::kAdaDelta,
    OptimizerKind::kAdam};

std::string_view to_string(OptimizerKind kind);
std::optional<OptimizerKind> parse_optimizer_kind(std::string_view name);

/// Which default set default_constants() returns.
enum class ConstantsProfile {
  kDefault,
  kPaper,  ///< RMSProp decay 0.01 from the published parameter table
};

/// Constants of every rule; each kind reads only its own.
struct OptimizerConstants {
  double eta = 0.1;          // step scale (AdaGrad, RMSProp, Adam)
  double momentum = 0.9;     // MGD
  double decay = 0.9;        // RMSProp
  double rho = 0.95;         // AdaDelta
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

OptimizerConstants default_constants(OptimizerKind kind,
                                     ConstantsProfile profile = ConstantsProfile::kDefault);

/// Per-agent optimizer memory. step() consumes the composite direction as
/// the gradient signal g and returns the additive parameter delta.
class OptimizerState {
 public:
  OptimizerState(OptimizerKind kind, const OptimizerConstants& constants, Eigen::Index dim = 6);

  /// Element-wise update. Throws NumericFailure (state untouched) when an
  /// accumulator or the delta would become non-finite.
  Eigen::VectorXd step(const Eigen::VectorXd& g);

  OptimizerKind kind() const { return kind_; }
  const OptimizerConstants& constants() const { return constants_; }
  long steps() const { return steps_; }

  /// velocity (MGD), G (AdaGrad), E[g^2] (RMSProp, AdaDelta), m (Adam)
  const Eigen::VectorXd& first() const { return first_; }
  /// E[dpi^2] (AdaDelta), v (Adam); zero for the others
  const Eigen::VectorXd& second() const { return second_; }

 private:
  OptimizerKind kind_;
  OptimizerConstants constants_;
  Eigen::VectorXd first_;
  Eigen::VectorXd second_;
  long steps_ = 0;
};

}  // namespace gmp3
