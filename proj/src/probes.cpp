#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "secfuse/parallel.hpp"
#include "secfuse/simulation.hpp"

namespace secfuse {

double state_gain_margin(const XiTriple& xi, const AugmentedSubsystem& aug, const Matrix& K, const Matrix& A_r) {
  return state_error_covariance(xi, K + A_r, aug).trace() - state_error_covariance(xi, K, aug).trace();
}

double attack_gain_margin(const XiTriple& xi, const AugmentedSubsystem& aug, const Matrix& Gamma, const Matrix& B_r) {
  return attack_error_covariance(xi, Gamma + B_r, aug).trace() - attack_error_covariance(xi, Gamma, aug).trace();
}

OptimalityReport gain_optimality_probe(const ScenarioConfig& cfg, int step, int trials, std::uint64_t seed) {
  if (step < 1) throw ConfigError("optimality probe step must be >= 1");
  if (trials < 1) throw ConfigError("optimality probe needs at least one trial");
  const Scenario sc = prepare_scenario(cfg);
  Rng rng(seed);

  OptimalityReport rep;
  rep.step = step;
  rep.trials = trials;
  rep.min_margin_K = std::numeric_limits<double>::infinity();
  rep.min_margin_Gamma = std::numeric_limits<double>::infinity();

  auto random_nonzero = [&rng](Index rows, Index cols) {
    Matrix m(rows, cols);
    do {
      for (Index i = 0; i < m.size(); ++i) m.data()[i] = rng.standard_normal();
    } while (m.isZero(0.0));
    return m;
  };

  for (std::size_t w = 0; w < sc.weak_count(); ++w) {
    // Gains and covariances do not depend on the data, so no measurements are needed.
    LocalEstimatorState state = init_local(sc.augmented(w, 0), sc.local_init(w), sc.eta[w].at(0));
    for (int k = 1; k < step; ++k) {
      const AugmentedSubsystem aug = sc.augmented(w, static_cast<std::size_t>(k));
      state.eta = sc.eta[w].at(static_cast<std::size_t>(k));
      const XiTriple xi = compute_xi(state, aug);
      const GainPair gains = compute_gains(state, xi, aug);
      state = propagate_covariances(std::move(state), gains, xi, aug);
    }
    const AugmentedSubsystem aug = sc.augmented(w, static_cast<std::size_t>(step));
    state.eta = sc.eta[w].at(static_cast<std::size_t>(step));
    const XiTriple xi = compute_xi(state, aug);
    const GainPair gains = compute_gains(state, xi, aug);
    for (int t = 0; t < trials; ++t) {
      const Matrix a_r = random_nonzero(gains.K.rows(), gains.K.cols());
      const Matrix b_r = random_nonzero(gains.Gamma.rows(), gains.Gamma.cols());
      rep.min_margin_K = std::min(rep.min_margin_K, state_gain_margin(xi, aug, gains.K, a_r));
      rep.min_margin_Gamma = std::min(rep.min_margin_Gamma, attack_gain_margin(xi, aug, gains.Gamma, b_r));
    }
  }
  rep.passed = rep.min_margin_K >= kMarginTolerance && rep.min_margin_Gamma >= kMarginTolerance;
  return rep;
}

double ConsistencyReport::max_relative_error() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.relative_error);
  return worst;
}

namespace {

void require_consistency_preconditions(const Scenario& sc) {
  std::vector<int> used;
  for (std::size_t w = 0; w < sc.weak_count(); ++w) {
    const std::string who = "consistency probe: sensor " + std::to_string(sc.weak_ids[w].value);
    if (!sc.eta[w].is_constant()) throw ConfigError(who + " needs a constant eta");
    const double eta = sc.eta[w].at(0);
    const AttackSpec* attack = sc.attack[w];
    const Index p = sc.enhanced[w].weak_dim();
    bool matches = false;
    if (attack == nullptr || std::holds_alternative<NoAttack>(attack->kind())) {
      matches = eta == 0.0;
    } else if (const auto* g = std::get_if<GaussianAttack>(&attack->kind())) {
      matches = (g->cov - eta * Matrix::Identity(p, p)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, eta);
    }
    if (!matches) throw ConfigError(who + ": attack must be iid Gaussian with covariance eta*I");
    for (SensorId s : sc.enhanced[w].strong_ids) {
      if (std::find(used.begin(), used.end(), s.value) != used.end()) {
        throw ConfigError(who + ": strong sensor " + std::to_string(s.value) + " is shared; assignments must be disjoint");
      }
      used.push_back(s.value);
    }
  }
}

}  // namespace

ConsistencyReport covariance_consistency_probe(const ScenarioConfig& cfg, int runs, const std::vector<int>& checkpoints,
                                               int threads) {
  if (runs < 2) throw ConfigError("consistency probe needs at least two runs");
  const Scenario sc = prepare_scenario(cfg);
  require_consistency_preconditions(sc);
  for (int k : checkpoints) {
    if (k < 0 || k > cfg.horizon) throw ConfigError("consistency checkpoint " + std::to_string(k) + " outside horizon");
  }
  const std::size_t r = sc.weak_count();
  const Index n = sc.dim();

  // moments[i][w][c] = X~ X~^T of run i
  using Moments = std::vector<std::vector<Matrix>>;
  std::vector<std::optional<Moments>> per_run(static_cast<std::size_t>(runs));
  std::vector<std::vector<Matrix>> predicted;
  const RunRecord first = run_scenario(cfg, run_seed(cfg.seed, 0));
  for (std::size_t w = 0; w < r; ++w) {
    predicted.emplace_back();
    for (int k : checkpoints) predicted[w].push_back(first.P_X[w][static_cast<std::size_t>(k)]);
  }

  parallel_for(per_run.size(), threads, [&](std::size_t i) {
    try {
      const RunRecord rec = run_scenario(cfg, run_seed(cfg.seed, i));
      Moments m(r);
      for (std::size_t w = 0; w < r; ++w) {
        for (int k : checkpoints) {
          const auto ks = static_cast<std::size_t>(k);
          Vector err(rec.P_X[w][ks].rows());
          err.head(n) = rec.x[ks] - rec.x_hat[w][ks];
          err.tail(err.size() - n) = rec.theta[w][ks] - rec.theta_hat[w][ks];
          m[w].push_back(err * err.transpose());
        }
      }
      per_run[i] = std::move(m);
    } catch (const std::exception&) {
    }
  });

  ConsistencyReport rep;
  std::vector<std::vector<Matrix>> sum;
  for (const auto& m : per_run) {
    if (!m) continue;
    ++rep.runs;
    if (sum.empty()) {
      sum = *m;
      continue;
    }
    for (std::size_t w = 0; w < r; ++w) {
      for (std::size_t c = 0; c < checkpoints.size(); ++c) sum[w][c] += (*m)[w][c];
    }
  }
  if (rep.runs == 0) throw EstimatorError("consistency probe: every run failed", 0.0);
  for (std::size_t w = 0; w < r; ++w) {
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      const Matrix empirical = sum[w][c] / rep.runs;
      const Matrix& p = predicted[w][c];
      ConsistencyEntry e;
      e.sensor = sc.weak_ids[w];
      e.step = checkpoints[c];
      e.empirical_trace = empirical.trace();
      e.predicted_trace = p.trace();
      const double p_norm = p.norm();
      e.relative_error = p_norm > 0.0 ? (empirical - p).norm() / p_norm : (empirical - p).norm();
      e.trace_relative_error = e.predicted_trace != 0.0
                                   ? std::abs(e.empirical_trace - e.predicted_trace) / std::abs(e.predicted_trace)
                                   : std::abs(e.empirical_trace);
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace secfuse
