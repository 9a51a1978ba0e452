#pragma once

// Exact first step of the scalar random walk observed by one attacked and
// one clean unit sensor (A = Q = C = 1, R = I, eta = 1, default inits),
// carried out in rational arithmetic.

#include <vector>

#include <boost/rational.hpp>

namespace oracle {

using Q = boost::rational<long long>;

struct RMat {
  int rows = 0, cols = 0;
  std::vector<Q> v;

  RMat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r * c), Q(0)) {}
  RMat(int r, int c, std::initializer_list<long long> entries) : RMat(r, c) {
    std::size_t i = 0;
    for (long long e : entries) v[i++] = Q(e);
  }
  Q& operator()(int i, int j) { return v[static_cast<std::size_t>(i * cols + j)]; }
  const Q& operator()(int i, int j) const { return v[static_cast<std::size_t>(i * cols + j)]; }

  static RMat identity(int n) {
    RMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1;
    return m;
  }
};

inline RMat operator*(const RMat& a, const RMat& b) {
  RMat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < b.cols; ++j)
      for (int k = 0; k < a.cols; ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}
inline RMat operator+(RMat a, const RMat& b) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
  return a;
}
inline RMat operator-(RMat a, const RMat& b) {
  for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] -= b.v[i];
  return a;
}
inline RMat operator*(Q s, RMat a) {
  for (auto& e : a.v) e *= s;
  return a;
}
inline RMat transpose(const RMat& a) {
  RMat t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

/// Gauss-Jordan inverse; the matrices used here are small and nonsingular.
inline RMat inverse(RMat a) {
  const int n = a.rows;
  RMat inv = RMat::identity(n);
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    while (a(pivot, col).numerator() == 0) ++pivot;
    for (int j = 0; j < n; ++j) {
      std::swap(a(col, j), a(pivot, j));
      std::swap(inv(col, j), inv(pivot, j));
    }
    const Q d = a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) /= d;
      inv(col, j) /= d;
    }
    for (int i = 0; i < n; ++i) {
      if (i == col || a(i, col).numerator() == 0) continue;
      const Q f = a(i, col);
      for (int j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

struct ScalarStep {
  RMat Xi1{1, 1}, Xi{2, 2}, S{2, 2}, K{2, 2}, Gamma{1, 2}, X_hat{2, 1}, phi_hat{1, 1};
};

/// y is the stacked measurement [weak; strong] at k = 1.
inline ScalarStep exact_scalar_step(long long y_weak, long long y_strong) {
  const RMat A = RMat::identity(2);           // diag(A, I_p) with A = 1
  const RMat Phi(2, 1, {0, 1});
  const RMat C(2, 2, {1, 1, 1, 0});           // [C_weak, I; C_strong, 0]
  const RMat Qa(2, 2, {1, 0, 0, 0});
  const RMat R = RMat::identity(2);
  const Q eta(1);

  // Step-0 values: P_X = I, P_phi = I, U = V = 0, previous gains zero.
  const RMat P_X = RMat::identity(2);
  const RMat P_phi = RMat::identity(1);
  const RMat U(2, 1);
  const RMat ga_prev = RMat::identity(1);  // I - 0 C Phi
  const RMat ka_prev = RMat::identity(2);  // I - 0 C

  ScalarStep s;
  s.Xi1 = Q(6) * eta * RMat::identity(1) - P_phi - eta * transpose(ga_prev) - eta * ga_prev;
  const RMat xi2 = U + eta * (ka_prev * Phi);
  s.Xi = A * P_X * transpose(A) + Qa + Phi * s.Xi1 * transpose(Phi) - A * xi2 * transpose(Phi) -
         Phi * transpose(A * xi2);
  s.S = C * s.Xi * transpose(C) + R;
  const RMat s_inv = inverse(s.S);
  s.K = s.Xi * transpose(C) * s_inv;
  s.Gamma = (s.Xi1 * transpose(Phi) - transpose(xi2) * transpose(A)) * transpose(C) * s_inv;

  RMat y(2, 1, {y_weak, y_strong});
  // Predictions from X_hat(0) = 0, phi_hat(0) = 0 vanish, so the innovation is y.
  s.X_hat = s.K * y;
  s.phi_hat = s.Gamma * y;
  return s;
}

inline double to_double(const Q& q) { return boost::rational_cast<double>(q); }

}  // namespace oracle
