#pragma once

#include <compare>
#include <cstddef>
#include <vector>

#include "secfuse/linalg.hpp"
#include "secfuse/random.hpp"

namespace secfuse {

/// 1-based sensor index as used throughout scenario files.
struct SensorId {
  int value = 0;

  constexpr SensorId() = default;
  constexpr explicit SensorId(int v) : value(v) {}
  auto operator<=>(const SensorId&) const = default;
};

enum class Defense { weak, strong };

/// Physical process x(k) = A(k) x(k-1) + w(k-1), w ~ N(0, Q).
class SystemModel {
 public:
  SystemModel() = default;
  SystemModel(StepSequence<Matrix> transition, Matrix process_noise);

  Index dim() const { return n_; }
  const Matrix& transition(std::size_t k) const { return transition_.at(k); }
  const StepSequence<Matrix>& transitions() const { return transition_; }
  const Matrix& process_noise() const { return q_; }
  const Matrix& process_noise_factor() const { return q_factor_; }

 private:
  Index n_ = 0;
  StepSequence<Matrix> transition_;
  Matrix q_;
  Matrix q_factor_;
};

/// Raw sensor y_i(k) = C_i(k) x(k) + v_i(k), v_i ~ N(0, R_i).
class SensorSpec {
 public:
  SensorSpec(SensorId id, StepSequence<Matrix> output, Matrix noise, Defense defense);

  SensorId id() const { return id_; }
  Defense defense() const { return defense_; }
  Index measurement_dim() const { return p_; }
  Index state_dim() const { return n_; }
  const Matrix& output(std::size_t k) const { return c_.at(k); }
  const StepSequence<Matrix>& outputs() const { return c_; }
  const Matrix& noise() const { return r_; }
  const Matrix& noise_factor() const { return r_factor_; }

 private:
  SensorId id_;
  Index p_;
  Index n_;
  StepSequence<Matrix> c_;
  Matrix r_;
  Matrix r_factor_;
  Defense defense_;
};

/// One weak sensor stacked on top of its assigned strong sensors.
struct EnhancedSensor {
  SensorId weak_id;
  std::vector<SensorId> strong_ids;
  StepSequence<Matrix> C;  // m_i x n
  Matrix Phi;              // m_i x p_i, selects the weak rows
  Matrix R;                // m_i x m_i, block diagonal

  Index weak_dim() const { return Phi.cols(); }
  Index measurement_dim() const { return Phi.rows(); }
};

/// Dynamics of X_i = [x; theta_i] at one step, with the attack increment
/// phi_i(k) = theta_i(k) - theta_i(k-1) entering through Phi_a.
struct AugmentedSubsystem {
  Index n = 0;  // physical state dimension
  Index p = 0;  // attack channel dimension
  Matrix A_a;    // (n+p) x (n+p)
  Matrix Phi_a;  // (n+p) x p
  Matrix C_a;    // m x (n+p)
  Matrix Q_a;    // (n+p) x (n+p)
  Matrix R;      // m x m

  Index dim() const { return n + p; }
  Index measurement_dim() const { return C_a.rows(); }
};

struct ObservabilityReport {
  Index rank = 0;
  Index dim = 0;
  int horizon = 0;
  bool full_rank = false;
};

EnhancedSensor build_enhanced_sensor(const SensorSpec& weak, const std::vector<SensorSpec>& strongs);

AugmentedSubsystem build_augmented_subsystem(const SystemModel& sys, const EnhancedSensor& enh,
                                             std::size_t k);

/// [Q, O; O, O] of shape (n+p_i) x (n+p_j).
Matrix cross_process_noise(const SystemModel& sys, Index p_i, Index p_j);

Vector step_truth(const SystemModel& sys, const Vector& x_prev, std::size_t k, Rng& rng);

Vector measure(const SensorSpec& spec, const Vector& x, std::size_t k, Rng& rng);

/// Rank of [C_a; C_a A_a; ...; C_a A_a^(horizon-1)]. A horizon of 0 selects
/// the default n + p.
ObservabilityReport check_observability(const AugmentedSubsystem& aug, int horizon = 0);

}  // namespace secfuse
