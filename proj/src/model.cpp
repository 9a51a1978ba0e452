#include "secfuse/model.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <string>

namespace secfuse {
namespace {

std::string sensor_label(SensorId id) { return "sensor " + std::to_string(id.value); }

Matrix block_diagonal(const std::vector<const Matrix*>& blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const auto* b : blocks) {
    rows += b->rows();
    cols += b->cols();
  }
  Matrix out = Matrix::Zero(rows, cols);
  Index r = 0;
  Index c = 0;
  for (const auto* b : blocks) {
    out.block(r, c, b->rows(), b->cols()) = *b;
    r += b->rows();
    c += b->cols();
  }
  return out;
}

}  // namespace

SystemModel::SystemModel(StepSequence<Matrix> transition, Matrix process_noise)
    : transition_(std::move(transition)) {
  if (transition_.size() == 0) throw ConfigError("system: transition matrix A is missing");
  n_ = transition_.at(0).rows();
  if (n_ == 0) throw ConfigError("system: state dimension must be positive");
  for (std::size_t k = 0; k < transition_.size(); ++k) {
    const Matrix& a = transition_.items()[k];
    if (a.rows() != n_ || a.cols() != n_) {
      throw ConfigError("system: A(" + std::to_string(k) + ") must be " + std::to_string(n_) + "x" +
                        std::to_string(n_));
    }
    if (!a.allFinite()) throw ConfigError("system: A(" + std::to_string(k) + ") has non-finite entries");
  }
  if (process_noise.rows() != n_ || process_noise.cols() != n_) {
    throw ConfigError("system: Q must be " + std::to_string(n_) + "x" + std::to_string(n_));
  }
  q_ = validated_covariance(process_noise, "system.Q");
  q_factor_ = psd_factor(q_);
}

SensorSpec::SensorSpec(SensorId id, StepSequence<Matrix> output, Matrix noise, Defense defense)
    : id_(id), c_(std::move(output)), defense_(defense) {
  const std::string label = sensor_label(id);
  if (id.value < 1) throw ConfigError(label + ": sensor ids start at 1");
  if (c_.size() == 0) throw ConfigError(label + ": measurement matrix C is missing");
  p_ = c_.at(0).rows();
  n_ = c_.at(0).cols();
  if (p_ == 0 || n_ == 0) throw ConfigError(label + ": measurement matrix C is empty");
  for (const auto& c : c_.items()) {
    if (c.rows() != p_ || c.cols() != n_) {
      throw ConfigError(label + ": all C(k) must share the shape of C(0)");
    }
  }
  if (noise.rows() != p_ || noise.cols() != p_) {
    throw ConfigError(label + ": R must be " + std::to_string(p_) + "x" + std::to_string(p_));
  }
  r_ = validated_covariance(noise, label + ".R");
  if (!is_positive_definite(r_)) throw ConfigError(label + ": R must be positive definite");
  r_factor_ = psd_factor(r_);
}

EnhancedSensor build_enhanced_sensor(const SensorSpec& weak, const std::vector<SensorSpec>& strongs) {
  if (weak.defense() != Defense::weak) {
    throw ConfigError(sensor_label(weak.id()) + " is not a weak-defense sensor");
  }
  std::size_t steps = weak.outputs().size();
  for (const auto& s : strongs) {
    if (s.defense() != Defense::strong) {
      throw ConfigError(sensor_label(s.id()) + " is not a strong-defense sensor");
    }
    if (s.state_dim() != weak.state_dim()) {
      throw ConfigError(sensor_label(s.id()) + ": C has " + std::to_string(s.state_dim()) +
                        " columns, expected " + std::to_string(weak.state_dim()));
    }
    if (!s.outputs().is_constant()) {
      if (steps > 1 && s.outputs().size() != steps) {
        throw ConfigError(sensor_label(s.id()) + ": C sequence length differs from other sensors");
      }
      steps = s.outputs().size();
    }
  }
  if (strongs.empty()) {
    spdlog::warn("{}: no strong-defense sensors assigned; attack and state may be unidentifiable",
                 sensor_label(weak.id()));
  }

  EnhancedSensor enh;
  enh.weak_id = weak.id();
  Index m = weak.measurement_dim();
  for (const auto& s : strongs) {
    enh.strong_ids.push_back(s.id());
    m += s.measurement_dim();
  }

  std::vector<Matrix> stacked;
  for (std::size_t k = 0; k < steps; ++k) {
    Matrix c(m, weak.state_dim());
    c.topRows(weak.measurement_dim()) = weak.output(k);
    Index row = weak.measurement_dim();
    for (const auto& s : strongs) {
      c.middleRows(row, s.measurement_dim()) = s.output(k);
      row += s.measurement_dim();
    }
    stacked.push_back(std::move(c));
  }
  enh.C = stacked.size() == 1 ? StepSequence<Matrix>(std::move(stacked.front()))
                              : StepSequence<Matrix>(std::move(stacked));

  enh.Phi = Matrix::Zero(m, weak.measurement_dim());
  enh.Phi.topRows(weak.measurement_dim()).setIdentity();

  std::vector<const Matrix*> blocks{&weak.noise()};
  for (const auto& s : strongs) blocks.push_back(&s.noise());
  enh.R = block_diagonal(blocks);
  return enh;
}

AugmentedSubsystem build_augmented_subsystem(const SystemModel& sys, const EnhancedSensor& enh,
                                             std::size_t k) {
  const Index n = sys.dim();
  const Index p = enh.weak_dim();
  if (p == 0) throw ConfigError("augmented subsystem needs an attack channel (p_i >= 1)");
  const Matrix& c = enh.C.at(k);
  if (c.cols() != n) {
    throw ConfigError("enhanced sensor " + std::to_string(enh.weak_id.value) + ": C has " +
                      std::to_string(c.cols()) + " columns, system has n=" + std::to_string(n));
  }

  AugmentedSubsystem aug;
  aug.n = n;
  aug.p = p;
  aug.A_a = Matrix::Zero(n + p, n + p);
  aug.A_a.topLeftCorner(n, n) = sys.transition(k);
  aug.A_a.bottomRightCorner(p, p).setIdentity();
  aug.Phi_a = Matrix::Zero(n + p, p);
  aug.Phi_a.bottomRows(p).setIdentity();
  aug.C_a.resize(c.rows(), n + p);
  aug.C_a << c, enh.Phi;
  aug.Q_a = Matrix::Zero(n + p, n + p);
  aug.Q_a.topLeftCorner(n, n) = sys.process_noise();
  aug.R = enh.R;
  return aug;
}

Matrix cross_process_noise(const SystemModel& sys, Index p_i, Index p_j) {
  const Index n = sys.dim();
  Matrix q = Matrix::Zero(n + p_i, n + p_j);
  q.topLeftCorner(n, n) = sys.process_noise();
  return q;
}

Vector step_truth(const SystemModel& sys, const Vector& x_prev, std::size_t k, Rng& rng) {
  if (x_prev.size() != sys.dim()) {
    throw InputError("step_truth: state has length " + std::to_string(x_prev.size()) + ", expected " +
                     std::to_string(sys.dim()));
  }
  return sys.transition(k) * x_prev + rng.gaussian(sys.process_noise_factor());
}

Vector measure(const SensorSpec& spec, const Vector& x, std::size_t k, Rng& rng) {
  if (x.size() != spec.state_dim()) {
    throw InputError("measure: state has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(spec.state_dim()));
  }
  return spec.output(k) * x + rng.gaussian(spec.noise_factor());
}

ObservabilityReport check_observability(const AugmentedSubsystem& aug, int horizon) {
  const Index dim = aug.dim();
  if (horizon <= 0) horizon = static_cast<int>(dim);
  const Index m = aug.C_a.rows();
  Matrix obs(m * horizon, dim);
  Matrix block = aug.C_a;
  for (int t = 0; t < horizon; ++t) {
    obs.middleRows(m * t, m) = block;
    block = block * aug.A_a;
  }
  ObservabilityReport report;
  report.dim = dim;
  report.horizon = horizon;
  if (obs.isZero(0.0)) {
    report.rank = 0;
  } else {
    Eigen::JacobiSVD<Matrix> svd(obs);
    report.rank = svd.rank();
  }
  report.full_rank = report.rank == dim;
  return report;
}

}  // namespace secfuse
