#pragma once

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "oracles/expanded_forms.hpp"
#include "secfuse/local_estimator.hpp"
#include "secfuse/model.hpp"
#include "secfuse/simulation.hpp"

namespace testing_support {

using secfuse::Index;
using secfuse::Matrix;
using secfuse::Vector;

inline ::testing::AssertionResult MatrixNear(const Matrix& actual, const Matrix& expected, double tol) {
  if (actual.rows() != expected.rows() || actual.cols() != expected.cols()) {
    return ::testing::AssertionFailure() << "shape " << actual.rows() << "x" << actual.cols() << " vs "
                                         << expected.rows() << "x" << expected.cols();
  }
  const double err = (actual - expected).cwiseAbs().maxCoeff();
  if (err <= tol) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << "max abs difference " << err << " > " << tol << "\nactual:\n"
                                       << actual << "\nexpected:\n"
                                       << expected;
}

class RandomMatrices {
 public:
  explicit RandomMatrices(unsigned seed) : gen_(seed) {}

  Matrix gaussian(Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal_(gen_);
    return m;
  }
  Matrix pd(Index n, double floor = 0.1) {
    const Matrix b = gaussian(n, n);
    return b * b.transpose() + floor * Matrix::Identity(n, n);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_;
};

inline oracle::Augmented to_oracle(const secfuse::AugmentedSubsystem& aug) {
  return {aug.A_a, aug.Phi_a, aug.C_a, aug.Q_a, aug.R};
}

inline oracle::Moments to_oracle(const secfuse::LocalEstimatorState& s) {
  return {s.P_X, s.P_phi, s.U, s.V, s.K_prev, s.Gamma_prev, s.C_a_prev, s.eta};
}

/// n = 1 random walk, weak sensor 1 and strong sensor 2, both C = R = 1.
inline secfuse::ScenarioConfig scalar_config() { return secfuse::builtin_scalar(); }

inline secfuse::AugmentedSubsystem scalar_augmented() {
  const secfuse::ScenarioConfig cfg = scalar_config();
  const secfuse::Scenario sc = secfuse::prepare_scenario(cfg);
  return sc.augmented(0, 1);
}

inline secfuse::AugmentedSubsystem ieee_augmented(std::size_t w) {
  static const secfuse::ScenarioConfig cfg = secfuse::builtin_ieee4bus();
  const secfuse::Scenario sc = secfuse::prepare_scenario(cfg);
  return sc.augmented(w, 1);
}

/// A state with arbitrary (but admissible) step-(k-1) moments and gains.
inline secfuse::LocalEstimatorState random_state(const secfuse::AugmentedSubsystem& aug, RandomMatrices& rnd,
                                                 double eta) {
  secfuse::LocalEstimatorState s = secfuse::init_local(aug, {}, eta);
  s.P_X = rnd.pd(aug.dim());
  s.P_phi = rnd.pd(aug.p);
  s.U = 0.3 * rnd.gaussian(aug.dim(), aug.p);
  s.V = rnd.pd(aug.p);
  s.K_prev = 0.3 * rnd.gaussian(aug.dim(), aug.measurement_dim());
  s.Gamma_prev = 0.3 * rnd.gaussian(aug.p, aug.measurement_dim());
  return s;
}

}  // namespace testing_support
