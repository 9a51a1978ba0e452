#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "secfuse/attack.hpp"
#include "secfuse/baseline.hpp"
#include "secfuse/cross_covariance.hpp"
#include "secfuse/local_estimator.hpp"
#include "secfuse/model.hpp"

namespace secfuse {

struct ScenarioConfig {
  std::string name = "custom";

  SystemModel system;
  Vector x0_mean;     // defaults to 0
  Matrix x0_cov;      // defaults to I
  bool noiseless = false;  // truth and sensors evolve without w, v (filters still use Q, R)

  std::vector<SensorSpec> sensors;
  /// Strong sensors stacked under each weak sensor, keyed by weak id. Weak
  /// sensors without an entry use every strong sensor in id order.
  std::map<int, std::vector<SensorId>> strong_assignment;
  std::vector<AttackSpec> attacks;  // weak sensors without an entry are not attacked

  std::map<int, StepSequence<double>> eta;  // default 1
  LocalInit local_init;                     // applied to every weak sensor
  std::map<int, LocalInit> local_init_by_sensor;
  std::map<std::pair<int, int>, CrossInit> cross_init;
  double q_theta = 1.0;
  std::map<int, AkfInit> akf_init;  // default: the proposed estimator's X_hat(0), P_X(0)

  int horizon = 100;
  int runs = 500;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Validated, ready-to-run view of a ScenarioConfig.
struct Scenario {
  const ScenarioConfig* config = nullptr;
  std::vector<SensorId> weak_ids;  // ascending
  std::vector<EnhancedSensor> enhanced;
  std::vector<std::vector<std::size_t>> strong_index;  // positions into config->sensors
  std::vector<std::size_t> weak_index;                 // positions into config->sensors
  std::vector<const AttackSpec*> attack;               // per weak sensor, may be null
  std::vector<StepSequence<double>> eta;
  std::vector<std::string> notes;  // diagnostics gathered during validation

  std::size_t weak_count() const { return weak_ids.size(); }
  Index dim() const { return config->system.dim(); }
  AugmentedSubsystem augmented(std::size_t w, std::size_t k) const;
  LocalInit local_init(std::size_t w) const;
};

/// Throws ConfigError naming the offending field or sensor id.
Scenario prepare_scenario(const ScenarioConfig& cfg);

struct RunRecord {
  std::vector<SensorId> weak_ids;
  std::vector<Vector> x;                  // truth x(k), k = 0..K
  std::vector<Vector> fused;              // x0_hat(k)
  std::vector<double> weight_residual;    // max |sum_i G_i(k) - I|
  std::vector<double> fused_trace;        // trace P0(k)
  std::vector<std::vector<Vector>> theta;      // [w][k]
  std::vector<std::vector<Vector>> x_hat;      // [w][k]
  std::vector<std::vector<Vector>> theta_hat;  // [w][k]
  std::vector<std::vector<Vector>> akf_x;      // [w][k]
  std::vector<std::vector<Vector>> akf_theta;  // [w][k]
  std::vector<std::vector<Matrix>> P_X;        // [w][k], predicted local covariance

  std::size_t steps() const { return x.size(); }
};

/// Runs secure fusion over one realization. Errors thrown by
/// estimator or fusion are rethrown with the failing step index attached.
RunRecord run_scenario(const ScenarioConfig& cfg, std::uint64_t seed);

struct MseReport {
  int runs = 0;
  std::uint64_t seed = 0;
  bool partial = false;
  std::vector<std::uint64_t> failed_seeds;
  std::vector<std::string> failures;
  std::vector<SensorId> weak_ids;

  std::vector<double> fused;                    // [k]
  std::vector<std::vector<double>> local;       // [w][k]
  std::vector<std::vector<double>> theta;       // [w][k]
  std::vector<std::vector<double>> akf;         // [w][k]
  std::vector<std::vector<double>> akf_theta;   // [w][k]
  std::vector<Vector> fused_components;         // [k], per-component squared error
  std::vector<std::vector<Vector>> local_components;  // [w][k]
  double max_weight_residual = 0.0;             // over every step of every run

  std::size_t steps() const { return fused.size(); }
};

/// Mean squared error curves over `runs` realizations with seeds
/// run_seed(cfg.seed, r). Results do not depend on `threads`.
MseReport run_monte_carlo(const ScenarioConfig& cfg, int runs, int threads = 1);

/// Mean of curve[first..last] inclusive, clipped to the curve length.
double time_average(const std::vector<double>& curve, std::size_t first, std::size_t last);

/// IEEE 4-bus distribution line example: five sensors, sensors 1 and 2 weak.
ScenarioConfig builtin_ieee4bus();

/// n = 1 random walk with one weak and one strong unit sensor, R = Q = 1,
/// theta ~ N(0, 1) iid, eta = 1.
ScenarioConfig builtin_scalar();

/// Names accepted by builtin_scenario().
std::vector<std::string> builtin_names();
ScenarioConfig builtin_scenario(const std::string& name);

// Probes ---------------------------------------------------------------

struct OptimalityReport {
  int step = 0;
  int trials = 0;
  double min_margin_K = 0.0;      // min over trials of tr P_X(K+A_r) - tr P_X(K)
  double min_margin_Gamma = 0.0;  // min over trials of tr P_phi(Gamma+B_r) - tr P_phi(Gamma)
  bool passed = false;
};

/// tr P_X(K + A_r) - tr P_X(K).
double state_gain_margin(const XiTriple& xi, const AugmentedSubsystem& aug, const Matrix& K, const Matrix& A_r);
/// tr P_phi(Gamma + B_r) - tr P_phi(Gamma).
double attack_gain_margin(const XiTriple& xi, const AugmentedSubsystem& aug, const Matrix& Gamma, const Matrix& B_r);

/// Runs the covariance recursions to step k, then perturbs the step-k gains
/// of every weak sensor with random nonzero matrices.
OptimalityReport gain_optimality_probe(const ScenarioConfig& cfg, int step, int trials, std::uint64_t seed = 1);

/// Passing threshold for probe margins.
inline constexpr double kMarginTolerance = -1e-9;

struct ConsistencyEntry {
  SensorId sensor;
  int step = 0;
  double relative_error = 0.0;  // ||Emp - P||_F / ||P||_F
  double trace_relative_error = 0.0;
  double empirical_trace = 0.0;
  double predicted_trace = 0.0;
};

struct ConsistencyReport {
  int runs = 0;
  std::vector<ConsistencyEntry> entries;
  double max_relative_error() const;
};

/// Empirical second moment of X~_i(k) over runs versus the predicted P_X(k).
/// Requires iid Gaussian attacks with covariance eta_i I and disjoint strong
/// assignments (ConfigError otherwise).
ConsistencyReport covariance_consistency_probe(const ScenarioConfig& cfg, int runs, const std::vector<int>& checkpoints,
                                               int threads = 1);

}  // namespace secfuse
