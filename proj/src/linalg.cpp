#include "secfuse/linalg.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace secfuse {

double relative_asymmetry(const Matrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  if (m.size() == 0) return 0.0;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() / scale;
}

bool is_symmetric(const Matrix& m, double tol) { return relative_asymmetry(m) <= tol; }

double condition_number(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double smallest = s(s.size() - 1);
  if (smallest <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smallest;
}

Matrix validated_covariance(const Matrix& m, const std::string& what) {
  if (m.rows() != m.cols()) {
    throw ConfigError(what + ": covariance must be square, got " + std::to_string(m.rows()) + "x" +
                      std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw ConfigError(what + ": covariance has non-finite entries");
  const double asym = relative_asymmetry(m);
  if (asym > kAsymmetryWarnTolerance) {
    spdlog::warn("{}: covariance asymmetric by {:.3g} (relative); symmetrized", what, asym);
  }
  return symmetrize(m);
}

Matrix psd_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(m));
  Vector values = eig.eigenvalues();
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Index i = 0; i < values.size(); ++i) {
    if (values(i) < -1e-9 * scale) {
      throw ConfigError("covariance is not positive semidefinite (eigenvalue " +
                        std::to_string(values(i)) + ")");
    }
    values(i) = std::sqrt(std::max(values(i), 0.0));
  }
  return eig.eigenvectors() * values.asDiagonal();
}

bool is_positive_definite(const Matrix& m) {
  if (m.rows() != m.cols() || m.size() == 0) return false;
  Eigen::LLT<Matrix> llt(symmetrize(m));
  return llt.info() == Eigen::Success;
}

}  // namespace secfuse
