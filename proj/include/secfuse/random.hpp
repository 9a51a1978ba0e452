#pragma once

#include <cstdint>
#include <random>

#include "secfuse/linalg.hpp"

namespace secfuse {

/// Gaussian source for one simulation run. Each run owns its own stream, so
/// runs can execute on any thread without changing results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  double standard_normal() { return normal_(engine_); }

  Vector standard_normal(Index dim) {
    Vector z(dim);
    for (Index i = 0; i < dim; ++i) z(i) = normal_(engine_);
    return z;
  }

  /// Draw from N(0, F F^T) given the factor F.
  Vector gaussian(const Matrix& factor) { return factor * standard_normal(factor.cols()); }

 private:
  // splitmix64 finalizer; decorrelates consecutive seeds.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Seed for Monte Carlo run `run_index` under `base_seed`.
inline std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return base_seed + run_index;
}

}  // namespace secfuse
