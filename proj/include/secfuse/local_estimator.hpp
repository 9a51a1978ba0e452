#pragma once

#include <optional>
#include <utility>

#include "secfuse/linalg.hpp"
#include "secfuse/model.hpp"

namespace secfuse {

/// Overrides for the step-0 estimator quantities. Unset fields take the
/// defaults X(0) = 0, phi(0) = 0, P_X(0) = I, P_phi(0) = I, U(0) = O, V(0) = O.
struct LocalInit {
  std::optional<Vector> X_hat;
  std::optional<Vector> phi_hat;
  std::optional<Matrix> P_X;
  std::optional<Matrix> P_phi;
  std::optional<Matrix> U;
  std::optional<Matrix> V;
};

/// Joint estimate of X_i = [x; theta_i] and the attack increment phi_i, with
/// the four covariance recursions that drive the gains.
struct LocalEstimatorState {
  Vector X_hat;      // n+p
  Vector phi_hat;    // p
  Matrix P_X;        // E{X~ X~^T}
  Matrix P_phi;      // E{phi~ phi~^T}
  Matrix U;          // E{X~ phi^^T}
  Matrix V;          // E{phi^ phi^^T}
  Matrix K_prev;     // K(k-1)
  Matrix Gamma_prev; // Gamma(k-1)
  Matrix C_a_prev;   // C_a(k-1), needed to rebuild K_a(k-1), Gamma_a(k-1)
  double eta = 1.0;  // compensation factor for the unknown E{theta theta^T}
};

struct XiTriple {
  Matrix Xi;   // (n+p) x (n+p)
  Matrix Xi1;  // p x p
  Matrix Xi2;  // (n+p) x p
};

struct GainPair {
  Matrix K;      // (n+p) x m
  Matrix Gamma;  // p x m
};

struct Innovation {
  Vector y_tilde;
};

struct LocalEstimates {
  Vector x_hat;
  Vector theta_hat;
};

LocalEstimatorState init_local(const AugmentedSubsystem& aug, const LocalInit& init = {},
                               double eta = 1.0);

// Gain-derived matrices, always rebuilt from stored gains.
Matrix state_gain_complement(const Matrix& K, const Matrix& C_a);                  // I - K C_a
Matrix attack_gain_complement(const Matrix& Gamma, const Matrix& C_a, const Matrix& Phi_a);  // I - Gamma C_a Phi_a
Matrix attack_gain_state(const Matrix& Gamma, const Matrix& C_a, const Matrix& A_a);        // Gamma C_a A_a

XiTriple compute_xi(const LocalEstimatorState& state, const AugmentedSubsystem& aug);

/// C_a Xi C_a^T + R, symmetrized.
Matrix innovation_covariance(const XiTriple& xi, const AugmentedSubsystem& aug);

/// Linear minimum variance gains. Throws EstimatorError when the innovation
/// covariance is numerically singular.
GainPair compute_gains(const LocalEstimatorState& state, const XiTriple& xi, const AugmentedSubsystem& aug);

/// Updates X_hat and phi_hat from the enhanced measurement y.
std::pair<LocalEstimatorState, Innovation> innovate_and_update(LocalEstimatorState state, const GainPair& gains,
                                                               const Vector& y, const AugmentedSubsystem& aug);

/// Advances P_phi, P_X, U, V to step k and rolls the step-k gains into
/// K_prev / Gamma_prev. `xi` must come from the step-(k-1) state.
LocalEstimatorState propagate_covariances(LocalEstimatorState state, const GainPair& gains, const XiTriple& xi,
                                          const AugmentedSubsystem& aug);

/// P_phi(k) as a function of an arbitrary attack gain.
Matrix attack_error_covariance(const XiTriple& xi, const Matrix& Gamma, const AugmentedSubsystem& aug);

/// P_X(k) = K S K^T + Xi - Xi (K C_a)^T - K C_a Xi for an arbitrary state gain.
Matrix state_error_covariance(const XiTriple& xi, const Matrix& K, const AugmentedSubsystem& aug);

LocalEstimates extract_estimates(const LocalEstimatorState& state, Index n);

/// Everything produced by one full step of a local estimator.
struct LocalStep {
  LocalEstimatorState state;
  XiTriple xi;
  GainPair gains;
  Innovation innovation;
};

/// compute_xi, compute_gains, innovate_and_update, propagate_covariances.
LocalStep step_local(const LocalEstimatorState& prev, const Vector& y, const AugmentedSubsystem& aug);

}  // namespace secfuse
