#include "secfuse/baseline.hpp"

#include <cmath>
#include <string>

namespace secfuse {
namespace {

Matrix predicted_covariance(const AkfState& state, const AugmentedSubsystem& aug) {
  const Matrix& A = aug.A_a;
  return symmetrize(A * state.P * A.transpose() + aug.Q_a + state.q_theta * aug.Phi_a * aug.Phi_a.transpose());
}

Matrix gain_from(const Matrix& p_pred, const AugmentedSubsystem& aug) {
  const Matrix& C = aug.C_a;
  const Matrix S = symmetrize(C * p_pred * C.transpose() + aug.R);
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    const double cond = condition_number(S);
    throw EstimatorError("augmented Kalman filter: innovation covariance is singular (condition " +
                             std::to_string(cond) + ")",
                         cond);
  }
  return llt.solve(C * p_pred).transpose();
}

}  // namespace

AkfState init_akf(const AugmentedSubsystem& aug, double q_theta, const AkfInit& init) {
  if (!(q_theta >= 0.0) || !std::isfinite(q_theta)) throw ConfigError("q_theta must be >= 0");
  const Index na = aug.dim();
  AkfState s;
  s.q_theta = q_theta;
  s.X_hat = init.X_hat.value_or(Vector::Zero(na));
  s.P = init.P.value_or(Matrix::Identity(na, na));
  if (s.X_hat.size() != na) throw ConfigError("baseline init X_hat has wrong length");
  if (s.P.rows() != na || s.P.cols() != na) throw ConfigError("baseline init P has wrong shape");
  if (!is_symmetric(s.P, kAsymmetryWarnTolerance)) throw ConfigError("baseline init P must be symmetric");
  return s;
}

Matrix akf_gain(const AkfState& state, const AugmentedSubsystem& aug) {
  return gain_from(predicted_covariance(state, aug), aug);
}

AkfState akf_step(const AkfState& state, const Vector& y, const AugmentedSubsystem& aug) {
  if (y.size() != aug.measurement_dim()) {
    throw InputError("augmented Kalman filter: measurement has length " + std::to_string(y.size()) + ", expected " +
                     std::to_string(aug.measurement_dim()));
  }
  const Matrix p_pred = predicted_covariance(state, aug);
  const Matrix K = gain_from(p_pred, aug);
  const Vector predicted = aug.A_a * state.X_hat;

  AkfState next = state;
  next.X_hat = predicted + K * (y - aug.C_a * predicted);
  const Matrix k_a = Matrix::Identity(aug.dim(), aug.dim()) - K * aug.C_a;
  next.P = symmetrize(k_a * p_pred * k_a.transpose() + K * aug.R * K.transpose());
  return next;
}

}  // namespace secfuse
