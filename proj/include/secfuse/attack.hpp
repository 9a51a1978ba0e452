#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "secfuse/linalg.hpp"
#include "secfuse/model.hpp"
#include "secfuse/random.hpp"

namespace secfuse {

struct NoAttack {};

/// theta(k) ~ N(0, cov), independent across k.
struct GaussianAttack {
  Matrix cov;
};

/// theta(k) = value for start <= k < end, zero otherwise.
struct PulseAttack {
  int start = 0;
  int end = 0;
  Vector value;
};

struct ConstantAttack {
  Vector value;
};

/// Pre-recorded trace; entry k is theta(k), including k = 0.
struct FileAttack {
  std::string path;
  std::vector<Vector> trace;
};

using AttackKind = std::variant<NoAttack, GaussianAttack, PulseAttack, ConstantAttack, FileAttack>;

class AttackSpec {
 public:
  /// Validates the kind against the attacked sensor's measurement size `dim`.
  AttackSpec(SensorId sensor, Index dim, AttackKind kind);

  SensorId sensor() const { return sensor_; }
  Index dim() const { return dim_; }
  const AttackKind& kind() const { return kind_; }
  std::string kind_name() const;

  /// Factor of the Gaussian covariance; empty for other kinds.
  const Matrix& gaussian_factor() const { return factor_; }

 private:
  SensorId sensor_;
  Index dim_;
  AttackKind kind_;
  Matrix factor_;
};

using AttackTrace = std::vector<Vector>;

/// One vector per non-empty line, whitespace separated; line index = step.
std::vector<Vector> load_attack_trace(const std::string& path, Index dim);

/// theta_i(k). Every kind except `file` yields zero at k = 0; Gaussian draws
/// for k >= 1 consume `rng`.
Vector generate_attack(const AttackSpec& spec, std::size_t k, Rng& rng);

/// theta_i(0..horizon).
AttackTrace generate_trace(const AttackSpec& spec, std::size_t horizon, Rng& rng);

Vector inject_attack(const Vector& y_o, const Vector& theta);

/// [y^a_i; y^o_j; ...] in strong-id order.
Vector assemble_measurement(const Vector& y_weak_attacked, const std::vector<Vector>& y_strongs);

/// As above, checked against the enhanced sensor's layout.
Vector assemble_measurement(const EnhancedSensor& enh, const Vector& y_weak_attacked,
                            const std::vector<Vector>& y_strongs);

}  // namespace secfuse
