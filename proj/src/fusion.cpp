#include "secfuse/fusion.hpp"

#include <spdlog/spdlog.h>

#include <string>

namespace secfuse {
namespace {

constexpr double kCoherenceTolerance = 1e-9;

bool usable(const Eigen::LLT<Matrix>& llt) { return llt.info() == Eigen::Success && llt.rcond() > 1e-15; }

}  // namespace

Matrix state_block(const Matrix& P_X, Index n) {
  if (P_X.rows() < n || P_X.cols() < n) throw InputError("state_block: matrix smaller than n x n");
  return P_X.topLeftCorner(n, n);
}

Matrix assemble_sigma(const std::vector<std::vector<Matrix>>& grid) {
  const auto r = static_cast<Index>(grid.size());
  if (r == 0) throw InputError("assemble_sigma: empty grid");
  const Index n = grid[0][0].rows();
  Matrix sigma(n * r, n * r);
  for (Index i = 0; i < r; ++i) {
    if (static_cast<Index>(grid[i].size()) != r) throw InputError("assemble_sigma: grid is not square");
    for (Index j = 0; j < r; ++j) {
      const Matrix& b = grid[i][j];
      if (b.rows() != n || b.cols() != n) throw InputError("assemble_sigma: blocks must all be n x n");
      sigma.block(i * n, j * n, n, n) = b;
    }
  }
  const double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  const double incoherence = (sigma - sigma.transpose()).cwiseAbs().maxCoeff();
  if (incoherence > kCoherenceTolerance * scale) {
    spdlog::warn("fusion: covariance grid not transpose-coherent (max deviation {:.3g}); symmetrized", incoherence);
  }
  return symmetrize(sigma);
}

FusionWeights compute_weights(const Matrix& Sigma, Index n) {
  if (n <= 0 || Sigma.rows() != Sigma.cols() || Sigma.rows() % n != 0) {
    throw InputError("compute_weights: Sigma must be square with a multiple of n rows");
  }
  const Index r = Sigma.rows() / n;
  FusionWeights w;
  w.Sigma = symmetrize(Sigma);

  Eigen::LLT<Matrix> llt(w.Sigma);
  if (!usable(llt)) {
    const double lambda = 1e-9 * w.Sigma.trace() / static_cast<double>(n * r);
    spdlog::warn("fusion: Sigma not positive definite; regularizing with lambda={:.3g}", lambda);
    llt.compute(w.Sigma + lambda * Matrix::Identity(n * r, n * r));
    if (!usable(llt)) {
      const double cond = condition_number(w.Sigma);
      throw FusionError("fusion covariance Sigma is numerically singular (condition " + std::to_string(cond) + ")",
                        cond);
    }
  }

  Matrix H(n * r, n);
  for (Index i = 0; i < r; ++i) H.middleRows(i * n, n).setIdentity();
  const Matrix sigma_inv_h = llt.solve(H);
  const Matrix information = symmetrize(H.transpose() * sigma_inv_h);
  Eigen::LLT<Matrix> info_llt(information);
  if (!usable(info_llt)) {
    const double cond = condition_number(information);
    throw FusionError("fused information matrix is numerically singular (condition " + std::to_string(cond) + ")",
                      cond);
  }
  w.P0 = symmetrize(info_llt.solve(Matrix::Identity(n, n)));
  const Matrix G = sigma_inv_h * w.P0;  // stacked [G_1^T; ...; G_r^T]
  w.G.reserve(r);
  for (Index i = 0; i < r; ++i) w.G.push_back(G.middleRows(i * n, n).transpose());
  return w;
}

FusedEstimate fuse_states(const FusionWeights& weights, const std::vector<Vector>& locals) {
  if (locals.size() != weights.G.size()) {
    throw InputError("fuse_states: " + std::to_string(locals.size()) + " local estimates for " +
                     std::to_string(weights.G.size()) + " weights");
  }
  const Index n = weights.G.front().rows();
  FusedEstimate out{Vector::Zero(n)};
  for (std::size_t i = 0; i < locals.size(); ++i) {
    if (locals[i].size() != n) throw InputError("fuse_states: local estimate has wrong length");
    out.x0_hat += weights.G[i] * locals[i];
  }
  return out;
}

}  // namespace secfuse
