#pragma once

#include <stdexcept>
#include <string>

namespace secfuse {

/// Invalid scenario, model or estimator configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad runtime input: dimension mismatches, unreadable attack traces.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that had to be inverted was numerically singular.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}

  /// Estimated 2-norm condition number of the offending matrix.
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

class EstimatorError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class FusionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace secfuse
