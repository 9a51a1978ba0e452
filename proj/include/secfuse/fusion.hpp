#pragma once

#include <vector>

#include "secfuse/linalg.hpp"

namespace secfuse {

struct FusionWeights {
  std::vector<Matrix> G;  // r matrices, n x n, summing to I_n
  Matrix Sigma;           // nr x nr
  Matrix P0;              // fused error covariance (H^T Sigma^-1 H)^-1
};

struct FusedEstimate {
  Vector x0_hat;
};

/// Top-left n x n block of a local or cross covariance.
Matrix state_block(const Matrix& P_X, Index n);

/// Places grid[i][j] at block (i, j). Warns if the grid is not
/// transpose-coherent, then symmetrizes.
Matrix assemble_sigma(const std::vector<std::vector<Matrix>>& grid);

/// Matrix weights minimizing the fused error covariance subject to
/// sum_i G_i = I. Sigma is regularized once by 1e-9 * trace / (nr) if its
/// Cholesky factorization fails; FusionError if that fails too.
FusionWeights compute_weights(const Matrix& Sigma, Index n);

FusedEstimate fuse_states(const FusionWeights& weights, const std::vector<Vector>& locals);

}  // namespace secfuse
