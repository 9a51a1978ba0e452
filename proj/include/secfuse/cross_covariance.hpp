#pragma once

#include <optional>
#include <utility>

#include "secfuse/linalg.hpp"
#include "secfuse/local_estimator.hpp"
#include "secfuse/model.hpp"

namespace secfuse {

/// Overrides for the step-0 cross matrices; unset fields start at zero.
struct CrossInit {
  std::optional<Matrix> P_X;
  std::optional<Matrix> P_phi;
  std::optional<Matrix> U;
  std::optional<Matrix> Y;
  std::optional<Matrix> V;
};

/// Second moments coupling local estimators i and j (i != j). The (j, i)
/// direction is kept as its own CrossState.
struct CrossState {
  SensorId i;
  SensorId j;
  Matrix P_X;    // E{X~_i X~_j^T}, (n+p_i) x (n+p_j)
  Matrix P_phi;  // E{phi~_i phi~_j^T}, p_i x p_j
  Matrix U;      // E{X~_i phi^_j^T}, (n+p_i) x p_j
  Matrix Y;      // E{phi~_i phi^_j^T}, p_i x p_j
  Matrix V;      // E{phi^_i phi^_j^T}, p_i x p_j
  Matrix Q_a;    // cross process noise, (n+p_i) x (n+p_j)
};

CrossState init_cross(SensorId i, SensorId j, const SystemModel& sys, Index p_i, Index p_j,
                      const CrossInit& init = {});

/// Advances both directions of a pair to step k. `gains_*` are the step-k
/// gains; the cross states hold step-(k-1) matrices.
std::pair<CrossState, CrossState> propagate_cross(const CrossState& ij, const CrossState& ji, const GainPair& gains_i,
                                                  const GainPair& gains_j, const AugmentedSubsystem& aug_i,
                                                  const AugmentedSubsystem& aug_j);

}  // namespace secfuse
