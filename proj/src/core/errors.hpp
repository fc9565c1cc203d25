#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gmp3 {

/// Input violates an operation's precondition (non-finite values, bad sizes).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation produced a non-finite value.
class NumericFailure : public std::runtime_error {
 public:
  explicit NumericFailure(const std::string& what, std::ptrdiff_t component = -1)
      : std::runtime_error(what), component_(component) {}

  /// Index of the offending vector component, or -1 when not applicable.
  std::ptrdiff_t component() const noexcept { return component_; }

 private:
  std::ptrdiff_t component_;
};

/// Rotation angle too close to pi for a unique logarithm.
class DegenerateRotation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class InvalidInstance : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmp3
