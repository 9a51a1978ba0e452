#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "secfuse/attack.hpp"
#include "secfuse/errors.hpp"
#include "secfuse/model.hpp"
#include "secfuse/random.hpp"
#include "secfuse/simulation.hpp"
#include "support.hpp"

using namespace secfuse;
using testing_support::MatrixNear;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(Attack, SingleStepPulse) {
  const AttackSpec pulse(SensorId{2}, 1, PulseAttack{50, 51, vec({3})});
  Rng rng(1);
  EXPECT_EQ(generate_attack(pulse, 49, rng)(0), 0.0);
  EXPECT_EQ(generate_attack(pulse, 50, rng)(0), 3.0);
  EXPECT_EQ(generate_attack(pulse, 51, rng)(0), 0.0);
}

TEST(Attack, EmptyPulseIsNeverActive) {
  const AttackSpec pulse(SensorId{2}, 1, PulseAttack{50, 50, vec({3})});
  Rng rng(1);
  for (std::size_t k = 0; k <= 100; ++k) EXPECT_EQ(generate_attack(pulse, k, rng)(0), 0.0);
}

TEST(Attack, BuiltinPulseMatchesPublishedDefinition) {
  const ScenarioConfig cfg = builtin_ieee4bus();
  const Scenario sc = prepare_scenario(cfg);
  ASSERT_NE(sc.attack[1], nullptr);
  Rng rng(1);
  const AttackTrace trace = generate_trace(*sc.attack[1], 100, rng);
  ASSERT_EQ(trace.size(), 101u);
  for (std::size_t k = 0; k <= 100; ++k) EXPECT_EQ(trace[k](0), k == 50 ? 3.0 : 0.0) << "k=" << k;
}

TEST(Attack, NoneAndConstant) {
  Rng rng(1);
  const AttackSpec none(SensorId{1}, 2, NoAttack{});
  const AttackSpec constant(SensorId{1}, 2, ConstantAttack{vec({1, -2})});
  for (std::size_t k : {0u, 1u, 7u}) EXPECT_TRUE(generate_attack(none, k, rng).isZero());
  EXPECT_TRUE(generate_attack(constant, 0, rng).isZero());
  EXPECT_TRUE(MatrixNear(generate_attack(constant, 3, rng), vec({1, -2}), 0.0));
}

TEST(Attack, GaussianVarianceMatchesCovariance) {
  const AttackSpec g(SensorId{1}, 1, GaussianAttack{Matrix::Constant(1, 1, 5.0)});
  Rng rng(2024);
  EXPECT_TRUE(generate_attack(g, 0, rng).isZero());
  const int draws = 10000;
  double sum = 0.0, sq = 0.0, lag = 0.0, prev = 0.0;
  for (int k = 1; k <= draws; ++k) {
    const double v = generate_attack(g, static_cast<std::size_t>(k), rng)(0);
    sum += v;
    sq += v * v;
    lag += v * prev;
    prev = v;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  EXPECT_NEAR(var, 5.0, 0.5);
  // Independent across k: lag-one correlation within 4 standard errors of 0.
  EXPECT_LT(std::abs(lag / draws / var), 4.0 / std::sqrt(draws));
}

TEST(Attack, RejectsInvalidSpecs) {
  EXPECT_THROW(AttackSpec(SensorId{1}, 1, PulseAttack{5, 4, vec({1})}), ConfigError);
  EXPECT_THROW(AttackSpec(SensorId{1}, 2, PulseAttack{1, 4, vec({1})}), ConfigError);
  EXPECT_THROW(AttackSpec(SensorId{1}, 1, ConstantAttack{vec({1, 2})}), ConfigError);
  EXPECT_THROW(AttackSpec(SensorId{1}, 1, GaussianAttack{Matrix::Identity(2, 2)}), ConfigError);
  EXPECT_THROW(AttackSpec(SensorId{1}, 1, GaussianAttack{Matrix::Constant(1, 1, -1.0)}), ConfigError);
}

TEST(AttackTraceFile, LoadsOneVectorPerLine) {
  const auto path = write_temp("secfuse_trace_ok.txt", "0 0\n1.5 -2\n\n3e-1 4\n");
  const AttackSpec spec(SensorId{1}, 2, FileAttack{path.string(), {}});
  Rng rng(1);
  EXPECT_TRUE(generate_attack(spec, 0, rng).isZero());
  EXPECT_TRUE(MatrixNear(generate_attack(spec, 1, rng), vec({1.5, -2}), 0.0));
  EXPECT_TRUE(MatrixNear(generate_attack(spec, 2, rng), vec({0.3, 4}), 0.0));
  EXPECT_THROW(generate_attack(spec, 3, rng), InputError);
}

TEST(AttackTraceFile, ReportsBadFiles) {
  EXPECT_THROW(load_attack_trace("/nonexistent/secfuse/trace.txt", 1), InputError);
  EXPECT_THROW(load_attack_trace(write_temp("secfuse_trace_nan.txt", "1\nabc\n").string(), 1), InputError);
  EXPECT_THROW(load_attack_trace(write_temp("secfuse_trace_wide.txt", "1 2\n").string(), 1), InputError);
  EXPECT_THROW(load_attack_trace(write_temp("secfuse_trace_empty.txt", "\n\n").string(), 1), InputError);
}

TEST(Injection, AddsTheAttack) {
  EXPECT_TRUE(MatrixNear(inject_attack(vec({1.5}), vec({3})), vec({4.5}), 0.0));
  EXPECT_TRUE(MatrixNear(inject_attack(vec({1.5}), vec({0})), vec({1.5}), 0.0));
  EXPECT_TRUE(MatrixNear(inject_attack(vec({1, 2}), vec({-1, 1})), vec({0, 3}), 0.0));
  EXPECT_THROW(inject_attack(vec({1, 2}), vec({1})), InputError);
}

TEST(Injection, AssemblesEnhancedMeasurement) {
  EXPECT_TRUE(MatrixNear(assemble_measurement(vec({4.5}), {vec({2.0}), vec({1.0})}), vec({4.5, 2.0, 1.0}), 0.0));
  EXPECT_TRUE(MatrixNear(assemble_measurement(vec({4.5}), {}), vec({4.5}), 0.0));
  const Scenario sc = prepare_scenario(builtin_ieee4bus());
  EXPECT_THROW(assemble_measurement(sc.enhanced[0], vec({1}), {vec({1})}), InputError);
  EXPECT_THROW(assemble_measurement(sc.enhanced[0], vec({1, 2}), {vec({1}), vec({1})}), InputError);
}

TEST(Injection, EnhancedMeasurementDecomposesIntoModelAndNoise) {
  // y = C x + Phi theta + v, with the noise recovered from an identical RNG
  // stream; strong rows never see theta.
  const ScenarioConfig cfg = builtin_ieee4bus();
  const Scenario sc = prepare_scenario(cfg);
  const Vector x = (Vector(4) << 0.3, -1.2, 2.0, 0.7).finished();
  const Vector theta = vec({3.0});
  for (std::size_t w = 0; w < 2; ++w) {
    const EnhancedSensor& enh = sc.enhanced[w];
    const SensorSpec& weak = cfg.sensors[sc.weak_index[w]];
    Rng rng(99), replay(99);
    const Vector yw = inject_attack(measure(weak, x, 1, rng), theta);
    std::vector<Vector> ys;
    for (std::size_t s : sc.strong_index[w]) ys.push_back(measure(cfg.sensors[s], x, 1, rng));
    const Vector y = assemble_measurement(enh, yw, ys);

    Vector noise(enh.measurement_dim());
    Index row = 0;
    noise.segment(row, 1) = weak.noise_factor() * replay.standard_normal(1);
    row += 1;
    for (std::size_t s : sc.strong_index[w]) {
      noise.segment(row, 1) = cfg.sensors[s].noise_factor() * replay.standard_normal(1);
      row += 1;
    }
    const Vector residual = y - enh.C.at(1) * x - enh.Phi * theta;
    EXPECT_TRUE(MatrixNear(residual, noise, 1e-12));

    for (Index r = 1; r < y.size(); ++r) EXPECT_EQ(enh.Phi(r, 0), 0.0);
  }
}
