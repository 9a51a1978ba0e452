#include "secfuse/attack.hpp"

#include <fstream>
#include <sstream>

namespace secfuse {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string label(SensorId id) { return "attack on sensor " + std::to_string(id.value); }

void require_length(const Vector& v, Index dim, const std::string& what) {
  if (v.size() != dim) {
    throw ConfigError(what + ": value has length " + std::to_string(v.size()) + ", expected " +
                      std::to_string(dim));
  }
}

}  // namespace

AttackSpec::AttackSpec(SensorId sensor, Index dim, AttackKind kind)
    : sensor_(sensor), dim_(dim), kind_(std::move(kind)) {
  const std::string what = label(sensor);
  std::visit(overloaded{
                 [](NoAttack&) {},
                 [&](GaussianAttack& g) {
                   if (g.cov.rows() != dim || g.cov.cols() != dim) {
                     throw ConfigError(what + ": gaussian cov must be " + std::to_string(dim) + "x" +
                                       std::to_string(dim));
                   }
                   g.cov = validated_covariance(g.cov, what);
                   factor_ = psd_factor(g.cov);
                 },
                 [&](PulseAttack& p) {
                   if (p.start > p.end) throw ConfigError(what + ": pulse start must not exceed end");
                   require_length(p.value, dim, what);
                 },
                 [&](ConstantAttack& c) { require_length(c.value, dim, what); },
                 [&](FileAttack& f) {
                   if (f.trace.empty()) f.trace = load_attack_trace(f.path, dim);
                   for (const auto& v : f.trace) require_length(v, dim, what);
                 },
             },
             kind_);
}

std::string AttackSpec::kind_name() const {
  return std::visit(overloaded{
                        [](const NoAttack&) { return std::string("none"); },
                        [](const GaussianAttack&) { return std::string("gaussian"); },
                        [](const PulseAttack&) { return std::string("pulse"); },
                        [](const ConstantAttack&) { return std::string("constant"); },
                        [](const FileAttack&) { return std::string("file"); },
                    },
                    kind_);
}

std::vector<Vector> load_attack_trace(const std::string& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw InputError("attack trace '" + path + "' cannot be opened");
  std::vector<Vector> trace;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<double> values;
    double v = 0.0;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw InputError("attack trace '" + path + "' line " + std::to_string(line_no) + ": not a number");
    }
    if (values.empty()) continue;
    if (static_cast<Index>(values.size()) != dim) {
      throw InputError("attack trace '" + path + "' line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim) + " values, got " + std::to_string(values.size()));
    }
    trace.push_back(Eigen::Map<Vector>(values.data(), dim));
  }
  if (trace.empty()) throw InputError("attack trace '" + path + "' is empty");
  return trace;
}

Vector generate_attack(const AttackSpec& spec, std::size_t k, Rng& rng) {
  const Index dim = spec.dim();
  return std::visit(
      overloaded{
          [&](const NoAttack&) -> Vector { return Vector::Zero(dim); },
          [&](const GaussianAttack&) -> Vector {
            if (k == 0) return Vector::Zero(dim);
            return rng.gaussian(spec.gaussian_factor());
          },
          [&](const PulseAttack& p) -> Vector {
            const auto step = static_cast<long>(k);
            if (k == 0 || step < p.start || step >= p.end) return Vector::Zero(dim);
            return p.value;
          },
          [&](const ConstantAttack& c) -> Vector {
            if (k == 0) return Vector::Zero(dim);
            return c.value;
          },
          [&](const FileAttack& f) -> Vector {
            if (k >= f.trace.size()) {
              throw InputError("attack trace '" + f.path + "' has " + std::to_string(f.trace.size()) +
                               " steps; step " + std::to_string(k) + " requested");
            }
            return f.trace[k];
          },
      },
      spec.kind());
}

AttackTrace generate_trace(const AttackSpec& spec, std::size_t horizon, Rng& rng) {
  AttackTrace trace;
  trace.reserve(horizon + 1);
  for (std::size_t k = 0; k <= horizon; ++k) trace.push_back(generate_attack(spec, k, rng));
  return trace;
}

Vector inject_attack(const Vector& y_o, const Vector& theta) {
  if (y_o.size() != theta.size()) {
    throw InputError("inject_attack: measurement has length " + std::to_string(y_o.size()) +
                     ", attack has length " + std::to_string(theta.size()));
  }
  return y_o + theta;
}

Vector assemble_measurement(const Vector& y_weak_attacked, const std::vector<Vector>& y_strongs) {
  Index m = y_weak_attacked.size();
  for (const auto& y : y_strongs) m += y.size();
  Vector out(m);
  out.head(y_weak_attacked.size()) = y_weak_attacked;
  Index row = y_weak_attacked.size();
  for (const auto& y : y_strongs) {
    out.segment(row, y.size()) = y;
    row += y.size();
  }
  return out;
}

Vector assemble_measurement(const EnhancedSensor& enh, const Vector& y_weak_attacked,
                            const std::vector<Vector>& y_strongs) {
  if (y_strongs.size() != enh.strong_ids.size()) {
    throw InputError("assemble_measurement: " + std::to_string(y_strongs.size()) +
                     " strong measurements for " + std::to_string(enh.strong_ids.size()) + " strong sensors");
  }
  if (y_weak_attacked.size() != enh.weak_dim()) {
    throw InputError("assemble_measurement: weak measurement has length " +
                     std::to_string(y_weak_attacked.size()) + ", expected " + std::to_string(enh.weak_dim()));
  }
  Vector y = assemble_measurement(y_weak_attacked, y_strongs);
  if (y.size() != enh.measurement_dim()) {
    throw InputError("assemble_measurement: enhanced measurement has length " + std::to_string(y.size()) +
                     ", expected " + std::to_string(enh.measurement_dim()));
  }
  return y;
}

}  // namespace secfuse
