#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "secfuse/errors.hpp"

namespace secfuse {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Tolerance above which an input covariance is reported as asymmetric.
inline constexpr double kAsymmetryWarnTolerance = 1e-10;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// max |M - M^T| relative to max(1, max |M|).
double relative_asymmetry(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol);

/// Ratio of extreme singular values; +inf for a singular matrix.
double condition_number(const Matrix& m);

/// Returns (M + M^T)/2 and emits a warning naming `what` if the input was
/// asymmetric beyond kAsymmetryWarnTolerance. Throws ConfigError if not square.
Matrix validated_covariance(const Matrix& m, const std::string& what);

/// Factor L with L L^T = M for a symmetric positive semidefinite M.
/// Negative eigenvalues within round-off are clipped to zero.
Matrix psd_factor(const Matrix& m);

bool is_positive_definite(const Matrix& m);

/// A per-step sequence of values; a single element is broadcast to every
/// step.
template <typename T>
class StepSequence {
 public:
  StepSequence() = default;
  StepSequence(T constant) : items_{std::move(constant)} {}  // NOLINT: implicit broadcast
  explicit StepSequence(std::vector<T> items) : items_(std::move(items)) {
    if (items_.empty()) throw ConfigError("step sequence must not be empty");
  }

  bool is_constant() const { return items_.size() == 1; }
  std::size_t size() const { return items_.size(); }

  const T& at(std::size_t k) const {
    if (items_.empty()) throw ConfigError("step sequence is empty");
    if (items_.size() == 1) return items_.front();
    if (k >= items_.size()) {
      throw ConfigError("step sequence has no entry for step " + std::to_string(k) + " (length " +
                        std::to_string(items_.size()) + ")");
    }
    return items_[k];
  }

  const std::vector<T>& items() const { return items_; }

 private:
  std::vector<T> items_;
};

}  // namespace secfuse
