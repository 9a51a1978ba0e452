#include <gtest/gtest.h>

#include "secfuse/errors.hpp"
#include "secfuse/fusion.hpp"
#include "support.hpp"

using namespace secfuse;
using testing_support::MatrixNear;
using testing_support::RandomMatrices;

namespace {

Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix m = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  m.topLeftCorner(a.rows(), a.cols()) = a;
  m.bottomRightCorner(b.rows(), b.cols()) = b;
  return m;
}

Matrix weight_sum(const FusionWeights& w) {
  Matrix s = Matrix::Zero(w.G.front().rows(), w.G.front().cols());
  for (const auto& g : w.G) s += g;
  return s;
}

}  // namespace

TEST(StateBlock, ExtractsTopLeft) {
  RandomMatrices rnd(1);
  const Matrix m = rnd.gaussian(5, 5);
  EXPECT_TRUE(MatrixNear(state_block(m, 4), m.topLeftCorner(4, 4), 0.0));
  EXPECT_TRUE(MatrixNear(state_block(Matrix::Identity(5, 5), 4), Matrix::Identity(4, 4), 0.0));
  EXPECT_TRUE(state_block(Matrix::Zero(5, 6), 4).isZero());
  EXPECT_THROW(state_block(Matrix::Zero(3, 3), 4), InputError);
}

TEST(AssembleSigma, PlacesBlocks) {
  const Matrix I = Matrix::Identity(2, 2);
  const Matrix O = Matrix::Zero(2, 2);
  EXPECT_TRUE(MatrixNear(assemble_sigma({{I, O}, {O, 3 * I}}), blkdiag(I, 3 * I), 0.0));
  RandomMatrices rnd(2);
  const Matrix p = rnd.pd(3);
  EXPECT_TRUE(MatrixNear(assemble_sigma({{p}}), p, 1e-15));
  const Matrix c = rnd.gaussian(2, 2);
  const Matrix s = assemble_sigma({{I, c}, {c.transpose(), 2 * I}});
  EXPECT_TRUE(MatrixNear(s.topRightCorner(2, 2), c, 1e-15));
  EXPECT_TRUE(MatrixNear(s.bottomLeftCorner(2, 2), c.transpose(), 1e-15));
}

TEST(AssembleSigma, SymmetrizesIncoherentGrid) {
  const Matrix I = Matrix::Identity(2, 2);
  const Matrix a = (Matrix(2, 2) << 0.1, 0.2, 0.3, 0.4).finished();
  const Matrix s = assemble_sigma({{I, a}, {Matrix::Zero(2, 2), I}});
  EXPECT_TRUE(MatrixNear(s, s.transpose(), 0.0));
  EXPECT_TRUE(MatrixNear(s.topRightCorner(2, 2), 0.5 * a, 1e-15));
}

TEST(AssembleSigma, RejectsMalformedGrids) {
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_THROW(assemble_sigma({}), InputError);
  EXPECT_THROW(assemble_sigma({{I, I}}), InputError);
  EXPECT_THROW(assemble_sigma({{I, I}, {I, Matrix::Identity(3, 3)}}), InputError);
}

TEST(Weights, InverseVarianceForBlockDiagonalSigma) {
  const Index n = 3;
  const Matrix I = Matrix::Identity(n, n);
  const FusionWeights w = compute_weights(blkdiag(I, 3 * I), n);
  ASSERT_EQ(w.G.size(), 2u);
  EXPECT_TRUE(MatrixNear(w.G[0], 0.75 * I, 1e-12));
  EXPECT_TRUE(MatrixNear(w.G[1], 0.25 * I, 1e-12));
  EXPECT_TRUE(MatrixNear(w.P0, 0.75 * I, 1e-12));
}

TEST(Weights, ExchangeSymmetryGivesEqualWeights) {
  RandomMatrices rnd(3);
  const Matrix p = rnd.pd(2);
  const Matrix c = 0.2 * p;
  Matrix sigma(4, 4);
  sigma << p, c, c, p;
  const FusionWeights w = compute_weights(sigma, 2);
  EXPECT_TRUE(MatrixNear(w.G[0], 0.5 * Matrix::Identity(2, 2), 1e-12));
  EXPECT_TRUE(MatrixNear(w.G[1], 0.5 * Matrix::Identity(2, 2), 1e-12));
}

TEST(Weights, SingleSensorIsIdentity) {
  RandomMatrices rnd(4);
  const Matrix p = rnd.pd(3);
  const FusionWeights w = compute_weights(p, 3);
  ASSERT_EQ(w.G.size(), 1u);
  EXPECT_TRUE(MatrixNear(w.G[0], Matrix::Identity(3, 3), 1e-12));
  EXPECT_TRUE(MatrixNear(w.P0, p, 1e-10));
}

TEST(Weights, MatchExplicitFormula) {
  // G = Sigma^-1 H (H^T Sigma^-1 H)^-1 with G_i the transposed row blocks.
  RandomMatrices rnd(5);
  const Index n = 3, r = 3;
  const Matrix sigma = rnd.pd(n * r);
  Matrix H(n * r, n);
  for (Index i = 0; i < r; ++i) H.middleRows(i * n, n).setIdentity();
  const Matrix si = sigma.inverse();
  const Matrix p0 = (H.transpose() * si * H).inverse();
  const Matrix G = si * H * p0;
  const FusionWeights w = compute_weights(sigma, n);
  for (Index i = 0; i < r; ++i) {
    EXPECT_TRUE(MatrixNear(w.G[static_cast<std::size_t>(i)], G.middleRows(i * n, n).transpose(), 1e-9));
  }
  EXPECT_TRUE(MatrixNear(w.P0, p0, 1e-9));
}

TEST(Weights, RandomSigmaNormalizationAndDominance) {
  RandomMatrices rnd(6);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + trial % 4;
    const Index r = 1 + (trial / 4) % 3;
    const Matrix sigma = rnd.pd(n * r, 1e-3);
    const FusionWeights w = compute_weights(sigma, n);
    ASSERT_TRUE(MatrixNear(weight_sum(w), Matrix::Identity(n, n), 1e-10)) << "trial " << trial;
    ASSERT_TRUE(MatrixNear(w.P0, w.P0.transpose(), 1e-10)) << "trial " << trial;
    for (Index i = 0; i < r; ++i) {
      ASSERT_LE(w.P0.trace(), sigma.block(i * n, i * n, n, n).trace() + 1e-9) << "trial " << trial;
    }
  }
}

TEST(Weights, RegularizesSingularSigmaOnce) {
  // Two identical estimators: Sigma = [P P; P P] is singular but fusable.
  RandomMatrices rnd(7);
  const Matrix p = rnd.pd(2);
  Matrix sigma(4, 4);
  sigma << p, p, p, p;
  const FusionWeights w = compute_weights(sigma, 2);
  EXPECT_TRUE(MatrixNear(weight_sum(w), Matrix::Identity(2, 2), 1e-10));
  EXPECT_TRUE(MatrixNear(w.P0, p, 1e-6));
}

TEST(Weights, ReportsHopelessSigma) {
  Matrix sigma = Matrix::Zero(4, 4);
  sigma(0, 0) = -1.0;
  try {
    compute_weights(sigma, 2);
    FAIL() << "expected FusionError";
  } catch (const FusionError& e) {
    EXPECT_GT(e.condition(), 1.0);
  }
  EXPECT_THROW(compute_weights(Matrix::Identity(5, 5), 2), InputError);
}

TEST(FuseStates, WeightedCombination) {
  FusionWeights w;
  w.G = {0.75 * Matrix::Identity(2, 2), 0.25 * Matrix::Identity(2, 2)};
  const Vector x = fuse_states(w, {Vector((Vector(2) << 4, 0).finished()), Vector((Vector(2) << 0, 4).finished())}).x0_hat;
  EXPECT_TRUE(MatrixNear(x, Vector((Vector(2) << 3, 1).finished()), 1e-15));

  FusionWeights single;
  single.G = {Matrix::Identity(2, 2)};
  const Vector v = (Vector(2) << -1, 2).finished();
  EXPECT_TRUE(MatrixNear(fuse_states(single, {v}).x0_hat, v, 0.0));
  EXPECT_THROW(fuse_states(w, {v}), InputError);
  EXPECT_THROW(fuse_states(w, {v, Vector::Zero(3)}), InputError);
}

TEST(FuseStates, UnbiasedAndTranslationEquivariant) {
  RandomMatrices rnd(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 3;
    const FusionWeights w = compute_weights(rnd.pd(3 * n), n);
    const Vector v = rnd.gaussian(n, 1);
    EXPECT_TRUE(MatrixNear(fuse_states(w, {v, v, v}).x0_hat, v, 1e-9));

    std::vector<Vector> locals{rnd.gaussian(n, 1), rnd.gaussian(n, 1), rnd.gaussian(n, 1)};
    const Vector c = rnd.gaussian(n, 1);
    std::vector<Vector> shifted = locals;
    for (auto& x : shifted) x += c;
    EXPECT_TRUE(MatrixNear(fuse_states(w, shifted).x0_hat, fuse_states(w, locals).x0_hat + c, 1e-9));
  }
}
