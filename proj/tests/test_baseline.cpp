#include <gtest/gtest.h>

#include "secfuse/baseline.hpp"
#include "secfuse/errors.hpp"
#include "secfuse/simulation.hpp"
#include "support.hpp"

using namespace secfuse;
using testing_support::MatrixNear;
using testing_support::RandomMatrices;

namespace {

// Textbook Kalman step, written out without the library's helpers.
struct TextbookStep {
  Matrix K;
  Vector x;
  Matrix P;
};

TextbookStep textbook(const Vector& x, const Matrix& P, const Vector& y, const AugmentedSubsystem& a, double q) {
  const Matrix Pm = a.A_a * P * a.A_a.transpose() + a.Q_a + q * a.Phi_a * a.Phi_a.transpose();
  const Matrix S = a.C_a * Pm * a.C_a.transpose() + a.R;
  const Matrix K = Pm * a.C_a.transpose() * S.inverse();
  const Vector xm = a.A_a * x;
  const Matrix P_plus = Pm - K * a.C_a * Pm;
  return {K, xm + K * (y - a.C_a * xm), P_plus};
}

}  // namespace

TEST(Akf, InitDefaultsAndErrors) {
  const AugmentedSubsystem a = testing_support::ieee_augmented(0);
  const AkfState s = init_akf(a, 0.5);
  EXPECT_TRUE(s.X_hat.isZero());
  EXPECT_EQ(s.X_hat.size(), 5);
  EXPECT_TRUE(MatrixNear(s.P, Matrix::Identity(5, 5), 0.0));
  EXPECT_EQ(s.q_theta, 0.5);
  EXPECT_THROW(init_akf(a, -1.0), ConfigError);
  AkfInit bad;
  bad.P = Matrix::Identity(4, 4);
  EXPECT_THROW(init_akf(a, 1.0, bad), ConfigError);
  AkfInit asym;
  asym.P = Matrix::Identity(5, 5);
  (*asym.P)(0, 1) = 0.5;
  EXPECT_THROW(init_akf(a, 1.0, asym), ConfigError);
}

TEST(Akf, ScalarStepMatchesTextbookFilter) {
  const AugmentedSubsystem a = testing_support::scalar_augmented();
  const AkfState s0 = init_akf(a, 1.0);
  const Vector y = (Vector(2) << 1.0, 0.5).finished();
  const TextbookStep ref = textbook(s0.X_hat, s0.P, y, a, 1.0);
  EXPECT_TRUE(MatrixNear(akf_gain(s0, a), ref.K, 1e-12));
  const AkfState s1 = akf_step(s0, y, a);
  EXPECT_TRUE(MatrixNear(s1.X_hat, ref.x, 1e-12));
  EXPECT_TRUE(MatrixNear(s1.P, ref.P, 1e-12));
}

TEST(Akf, FourBusStepsMatchTextbookFilter) {
  RandomMatrices rnd(21);
  const AugmentedSubsystem a = testing_support::ieee_augmented(1);
  AkfState s = init_akf(a, 10.0);
  Vector x = s.X_hat;
  Matrix P = s.P;
  for (int k = 1; k <= 30; ++k) {
    const Vector y = rnd.gaussian(3, 1);
    const TextbookStep ref = textbook(x, P, y, a, 10.0);
    s = akf_step(s, y, a);
    x = ref.x;
    P = ref.P;
    ASSERT_TRUE(MatrixNear(s.X_hat, x, 1e-10)) << "k=" << k;
    ASSERT_TRUE(MatrixNear(s.P, P, 1e-10)) << "k=" << k;
  }
}

TEST(Akf, ZeroInnovationIsAFixedPoint) {
  const AugmentedSubsystem a = testing_support::ieee_augmented(0);
  AkfInit init;
  init.X_hat = (Vector(5) << 1, -1, 2, 0.5, 0.3).finished();
  const AkfState s = init_akf(a, 1.0, init);
  const Vector y = a.C_a * a.A_a * s.X_hat;
  EXPECT_TRUE(MatrixNear(akf_step(s, y, a).X_hat, a.A_a * s.X_hat, 1e-12));
}

TEST(Akf, CovarianceStaysSymmetricPositive) {
  RandomMatrices rnd(22);
  const AugmentedSubsystem a = testing_support::ieee_augmented(0);
  AkfState s = init_akf(a, 0.1);
  for (int k = 1; k <= 200; ++k) {
    s = akf_step(s, rnd.gaussian(3, 1), a);
    ASSERT_TRUE(MatrixNear(s.P, s.P.transpose(), 1e-9)) << "k=" << k;
    ASSERT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(s.P).eigenvalues().minCoeff(), -1e-9) << "k=" << k;
  }
}

TEST(Akf, ErrorsOnBadMeasurementOrSingularInnovation) {
  AugmentedSubsystem a = testing_support::ieee_augmented(0);
  const AkfState s = init_akf(a, 1.0);
  EXPECT_THROW(akf_step(s, Vector::Zero(2), a), InputError);
  a.R.setZero();
  a.C_a.setZero();
  EXPECT_THROW(akf_step(s, Vector::Zero(3), a), EstimatorError);
}

TEST(Akf, NoiselessExactInitTracksTruth) {
  ScenarioConfig cfg = builtin_ieee4bus();
  cfg.attacks.clear();
  cfg.noiseless = true;
  cfg.x0_mean = (Vector(4) << 1, -2, 0.5, 3).finished();
  cfg.x0_cov = Matrix::Zero(4, 4);
  cfg.q_theta = 0.0;
  Vector X0(5);
  X0 << cfg.x0_mean, 0.0;
  for (int id : {1, 2}) cfg.akf_init[id].X_hat = X0;
  cfg.horizon = 50;
  const RunRecord rec = run_scenario(cfg, 3);
  for (std::size_t w = 0; w < 2; ++w) {
    for (std::size_t k = 0; k < rec.steps(); ++k) {
      ASSERT_TRUE(MatrixNear(rec.akf_x[w][k], rec.x[k], 1e-9)) << "w=" << w << " k=" << k;
    }
  }
}

TEST(Akf, AgreesWithProposedEstimatorWithoutAttacks) {
  // eta = 0 with zero attack statistics removes every attack term from the
  // proposed recursions, leaving the Kalman filter with q_theta = 0.
  ScenarioConfig cfg = builtin_ieee4bus();
  cfg.attacks.clear();
  cfg.eta = {{1, StepSequence<double>(0.0)}, {2, StepSequence<double>(0.0)}};
  cfg.local_init.P_phi = Matrix::Zero(1, 1);
  cfg.q_theta = 0.0;
  const RunRecord rec = run_scenario(cfg, 5);
  double worst = 0.0;
  for (std::size_t w = 0; w < 2; ++w) {
    for (std::size_t k = 0; k < rec.steps(); ++k) {
      worst = std::max(worst, (rec.x_hat[w][k] - rec.akf_x[w][k]).cwiseAbs().maxCoeff());
      worst = std::max(worst, (rec.theta_hat[w][k] - rec.akf_theta[w][k]).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LT(worst, 1e-8);
}
