#include "secfuse/local_estimator.hpp"

#include <cmath>
#include <string>

namespace secfuse {
namespace {

std::string shape(const Matrix& m) { return std::to_string(m.rows()) + "x" + std::to_string(m.cols()); }

Matrix checked_override(const std::optional<Matrix>& value, Index rows, Index cols, const char* name,
                        bool symmetric) {
  if (!value) return {};
  if (value->rows() != rows || value->cols() != cols) {
    throw ConfigError(std::string("estimator init ") + name + ": expected " + std::to_string(rows) + "x" +
                      std::to_string(cols) + ", got " + shape(*value));
  }
  if (symmetric && !is_symmetric(*value, kAsymmetryWarnTolerance)) {
    throw ConfigError(std::string("estimator init ") + name + " must be symmetric");
  }
  return *value;
}

Vector checked_vector(const std::optional<Vector>& value, Index size, const char* name) {
  if (!value) return Vector::Zero(size);
  if (value->size() != size) {
    throw ConfigError(std::string("estimator init ") + name + ": expected length " + std::to_string(size) +
                      ", got " + std::to_string(value->size()));
  }
  return *value;
}

}  // namespace

LocalEstimatorState init_local(const AugmentedSubsystem& aug, const LocalInit& init, double eta) {
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ConfigError("compensation factor eta must be >= 0");
  const Index na = aug.dim();
  const Index p = aug.p;
  const Index m = aug.measurement_dim();

  LocalEstimatorState s;
  s.X_hat = checked_vector(init.X_hat, na, "X_hat");
  s.phi_hat = checked_vector(init.phi_hat, p, "phi_hat");
  s.P_X = init.P_X ? checked_override(init.P_X, na, na, "P_X", true) : Matrix::Identity(na, na);
  s.P_phi = init.P_phi ? checked_override(init.P_phi, p, p, "P_phi", true) : Matrix::Identity(p, p);
  s.U = init.U ? checked_override(init.U, na, p, "U", false) : Matrix::Zero(na, p);
  s.V = init.V ? checked_override(init.V, p, p, "V", true) : Matrix::Zero(p, p);
  s.K_prev = Matrix::Zero(na, m);
  s.Gamma_prev = Matrix::Zero(p, m);
  s.C_a_prev = aug.C_a;
  s.eta = eta;
  return s;
}

Matrix state_gain_complement(const Matrix& K, const Matrix& C_a) {
  return Matrix::Identity(K.rows(), C_a.cols()) - K * C_a;
}

Matrix attack_gain_complement(const Matrix& Gamma, const Matrix& C_a, const Matrix& Phi_a) {
  return Matrix::Identity(Gamma.rows(), Phi_a.cols()) - Gamma * C_a * Phi_a;
}

Matrix attack_gain_state(const Matrix& Gamma, const Matrix& C_a, const Matrix& A_a) { return Gamma * C_a * A_a; }

XiTriple compute_xi(const LocalEstimatorState& state, const AugmentedSubsystem& aug) {
  const double eta = state.eta;
  const Index p = aug.p;
  const Matrix& A = aug.A_a;
  const Matrix& Phi = aug.Phi_a;
  const Matrix gamma_a_prev = attack_gain_complement(state.Gamma_prev, state.C_a_prev, Phi);
  const Matrix k_a_prev = state_gain_complement(state.K_prev, state.C_a_prev);

  XiTriple xi;
  xi.Xi1 = 6.0 * eta * Matrix::Identity(p, p) - state.P_phi - eta * gamma_a_prev.transpose() - eta * gamma_a_prev;
  xi.Xi1 = symmetrize(xi.Xi1);
  xi.Xi2 = state.U + eta * k_a_prev * Phi;
  const Matrix a_xi2 = A * xi.Xi2;
  xi.Xi = A * state.P_X * A.transpose() + aug.Q_a + Phi * xi.Xi1 * Phi.transpose() - a_xi2 * Phi.transpose() -
          Phi * a_xi2.transpose();
  xi.Xi = symmetrize(xi.Xi);
  return xi;
}

Matrix innovation_covariance(const XiTriple& xi, const AugmentedSubsystem& aug) {
  return symmetrize(aug.C_a * xi.Xi * aug.C_a.transpose() + aug.R);
}

GainPair compute_gains(const LocalEstimatorState& state, const XiTriple& xi, const AugmentedSubsystem& aug) {
  const double eta = state.eta;
  const Matrix& A = aug.A_a;
  const Matrix& Phi = aug.Phi_a;
  const Matrix& C = aug.C_a;
  const Matrix S = innovation_covariance(xi, aug);

  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-15)) {
    const double cond = condition_number(S);
    throw EstimatorError("innovation covariance is numerically singular (condition " + std::to_string(cond) + ")",
                         cond);
  }

  const Matrix gamma_a_prev = attack_gain_complement(state.Gamma_prev, state.C_a_prev, Phi);
  const Matrix k_a_prev = state_gain_complement(state.K_prev, state.C_a_prev);
  const Matrix bracket = state.P_phi * Phi.transpose() + state.U.transpose() * A.transpose() +
                         eta * gamma_a_prev * Phi.transpose() + eta * (Phi * gamma_a_prev).transpose() +
                         eta * (A * k_a_prev * Phi).transpose() - 6.0 * eta * Phi.transpose();

  // X C^T S^-1 == (S^-1 C X^T)^T for symmetric S.
  GainPair gains;
  gains.K = llt.solve(C * xi.Xi).transpose();
  gains.Gamma = -llt.solve(C * bracket.transpose()).transpose();
  if (!gains.K.allFinite() || !gains.Gamma.allFinite()) {
    throw EstimatorError("estimator gains are not finite", condition_number(S));
  }
  return gains;
}

std::pair<LocalEstimatorState, Innovation> innovate_and_update(LocalEstimatorState state, const GainPair& gains,
                                                               const Vector& y, const AugmentedSubsystem& aug) {
  if (y.size() != aug.measurement_dim()) {
    throw InputError("local estimator: measurement has length " + std::to_string(y.size()) + ", expected " +
                     std::to_string(aug.measurement_dim()));
  }
  const Vector predicted = aug.A_a * state.X_hat + aug.Phi_a * state.phi_hat;
  Innovation innov{y - aug.C_a * predicted};
  state.X_hat = predicted + gains.K * innov.y_tilde;
  state.phi_hat = state.phi_hat + gains.Gamma * innov.y_tilde;
  return {std::move(state), std::move(innov)};
}

Matrix attack_error_covariance(const XiTriple& xi, const Matrix& Gamma, const AugmentedSubsystem& aug) {
  const Matrix gc = Gamma * aug.C_a;
  const Matrix gamma_a = attack_gain_complement(Gamma, aug.C_a, aug.Phi_a);
  const Matrix gamma_b = attack_gain_state(Gamma, aug.C_a, aug.A_a);
  const Matrix gb_xi2 = gamma_b * xi.Xi2;
  return gamma_a * xi.Xi1 - xi.Xi1 * (gc * aug.Phi_a).transpose() + gb_xi2.transpose() + gb_xi2 +
         Gamma * aug.R * Gamma.transpose() + gc * xi.Xi * gc.transpose();
}

Matrix state_error_covariance(const XiTriple& xi, const Matrix& K, const AugmentedSubsystem& aug) {
  const Matrix S = innovation_covariance(xi, aug);
  const Matrix kc = K * aug.C_a;
  return K * S * K.transpose() + xi.Xi - xi.Xi * kc.transpose() - kc * xi.Xi;
}

LocalEstimatorState propagate_covariances(LocalEstimatorState state, const GainPair& gains, const XiTriple& xi,
                                          const AugmentedSubsystem& aug) {
  const double eta = state.eta;
  const Matrix& A = aug.A_a;
  const Matrix& Phi = aug.Phi_a;
  const Matrix& C = aug.C_a;
  const Matrix& R = aug.R;
  const Matrix& K = gains.K;
  const Matrix& Gamma = gains.Gamma;

  const Matrix k_a = state_gain_complement(K, C);
  const Matrix gamma_a = attack_gain_complement(Gamma, C, Phi);
  const Matrix gamma_b = attack_gain_state(Gamma, C, A);
  const Matrix gc = Gamma * C;
  const Matrix gcp = gc * Phi;                                          // Gamma(k) C(k) Phi
  const Matrix gcp_prev = state.Gamma_prev * state.C_a_prev * Phi;      // Gamma(k-1) C(k-1) Phi
  const Matrix& U_prev = state.U;
  const Matrix& V_prev = state.V;

  const Matrix P_phi = attack_error_covariance(xi, Gamma, aug);
  const Matrix P_X = k_a * xi.Xi * k_a.transpose() + K * R * K.transpose();
  const Matrix U = k_a * (A * U_prev - Phi * V_prev) - eta * k_a * Phi * gcp_prev.transpose() -
                   K * R * Gamma.transpose() + k_a * xi.Xi * gc.transpose();
  const Matrix gb_u = gamma_b * U_prev;
  const Matrix V = gb_u.transpose() + gb_u + V_prev * gamma_a.transpose() - gcp * V_prev -
                   eta * gcp_prev * gcp.transpose() - eta * gcp * gcp_prev.transpose() +
                   Gamma * (C * xi.Xi * C.transpose() + R) * Gamma.transpose();

  state.P_phi = symmetrize(P_phi);
  state.P_X = symmetrize(P_X);
  state.U = U;
  state.V = symmetrize(V);
  state.K_prev = K;
  state.Gamma_prev = Gamma;
  state.C_a_prev = C;
  return state;
}

LocalEstimates extract_estimates(const LocalEstimatorState& state, Index n) {
  const Index p = state.X_hat.size() - n;
  return {state.X_hat.head(n), state.X_hat.tail(p)};
}

LocalStep step_local(const LocalEstimatorState& prev, const Vector& y, const AugmentedSubsystem& aug) {
  LocalStep out;
  out.xi = compute_xi(prev, aug);
  out.gains = compute_gains(prev, out.xi, aug);
  auto [updated, innov] = innovate_and_update(prev, out.gains, y, aug);
  out.innovation = std::move(innov);
  out.state = propagate_covariances(std::move(updated), out.gains, out.xi, aug);
  return out;
}

}  // namespace secfuse
