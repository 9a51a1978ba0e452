#pragma once

#include <optional>

#include "secfuse/linalg.hpp"
#include "secfuse/model.hpp"

namespace secfuse {

/// Kalman filter on the augmented subsystem that treats Phi_a phi(k) as
/// process noise of intensity q_theta on the attack channel.
struct AkfState {
  Vector X_hat;
  Matrix P;
  double q_theta = 1.0;
};

struct AkfInit {
  std::optional<Vector> X_hat;
  std::optional<Matrix> P;
};

/// Defaults: X_hat = 0, P = I.
AkfState init_akf(const AugmentedSubsystem& aug, double q_theta, const AkfInit& init = {});

/// Gain used by the step: P- C^T (C P- C^T + R)^-1.
Matrix akf_gain(const AkfState& state, const AugmentedSubsystem& aug);

/// Predict, gain, update (Joseph form). EstimatorError on a singular
/// innovation covariance.
AkfState akf_step(const AkfState& state, const Vector& y, const AugmentedSubsystem& aug);

}  // namespace secfuse
