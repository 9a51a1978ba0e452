#include "secfuse/simulation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <optional>
#include <set>
#include <string>

#include "secfuse/fusion.hpp"
#include "secfuse/parallel.hpp"

namespace secfuse {
namespace {

std::string id_str(SensorId id) { return std::to_string(id.value); }

const SensorSpec* find_sensor(const ScenarioConfig& cfg, SensorId id, std::size_t* pos = nullptr) {
  for (std::size_t s = 0; s < cfg.sensors.size(); ++s) {
    if (cfg.sensors[s].id() == id) {
      if (pos) *pos = s;
      return &cfg.sensors[s];
    }
  }
  return nullptr;
}

// Per-run filter bank: local estimators, baselines and cross states.
struct FilterBank {
  std::vector<LocalEstimatorState> local;
  std::vector<AkfState> akf;
  std::vector<std::vector<CrossState>> cross;  // [a][b], a != b
};

FilterBank init_bank(const Scenario& sc) {
  const ScenarioConfig& cfg = *sc.config;
  const std::size_t r = sc.weak_count();
  FilterBank bank;
  for (std::size_t w = 0; w < r; ++w) {
    const AugmentedSubsystem aug = sc.augmented(w, 0);
    const LocalInit li = sc.local_init(w);
    bank.local.push_back(init_local(aug, li, sc.eta[w].at(0)));
    AkfInit ai;
    if (auto it = cfg.akf_init.find(sc.weak_ids[w].value); it != cfg.akf_init.end()) ai = it->second;
    if (!ai.X_hat) ai.X_hat = bank.local.back().X_hat;
    if (!ai.P) ai.P = bank.local.back().P_X;
    bank.akf.push_back(init_akf(aug, cfg.q_theta, ai));
  }
  bank.cross.assign(r, std::vector<CrossState>(r));
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      if (a == b) continue;
      CrossInit ci;
      if (auto it = cfg.cross_init.find({sc.weak_ids[a].value, sc.weak_ids[b].value}); it != cfg.cross_init.end()) {
        ci = it->second;
      } else if (auto jt = cfg.cross_init.find({sc.weak_ids[b].value, sc.weak_ids[a].value});
                 jt != cfg.cross_init.end()) {
        // Only (b, a) given: use its transpose so the pair stays coherent.
        const CrossInit& o = jt->second;
        if (o.P_X) ci.P_X = o.P_X->transpose();
        if (o.P_phi) ci.P_phi = o.P_phi->transpose();
      }
      bank.cross[a][b] = init_cross(sc.weak_ids[a], sc.weak_ids[b], cfg.system, sc.enhanced[a].weak_dim(),
                                    sc.enhanced[b].weak_dim(), ci);
    }
  }
  return bank;
}

FusionWeights fusion_weights(const Scenario& sc, const FilterBank& bank) {
  const std::size_t r = sc.weak_count();
  const Index n = sc.dim();
  std::vector<std::vector<Matrix>> grid(r, std::vector<Matrix>(r));
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = 0; b < r; ++b) {
      grid[a][b] = state_block(a == b ? bank.local[a].P_X : bank.cross[a][b].P_X, n);
    }
  }
  return compute_weights(assemble_sigma(grid), n);
}

double weight_residual(const FusionWeights& w) {
  Matrix sum = Matrix::Zero(w.G.front().rows(), w.G.front().cols());
  for (const auto& g : w.G) sum += g;
  return (sum - Matrix::Identity(sum.rows(), sum.cols())).cwiseAbs().maxCoeff();
}

template <typename Fn>
auto at_step(std::size_t k, Fn&& fn) {
  const std::string where = "step " + std::to_string(k) + ": ";
  try {
    return fn();
  } catch (const EstimatorError& e) {
    throw EstimatorError(where + e.what(), e.condition());
  } catch (const FusionError& e) {
    throw FusionError(where + e.what(), e.condition());
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  }
}

}  // namespace

AugmentedSubsystem Scenario::augmented(std::size_t w, std::size_t k) const {
  return build_augmented_subsystem(config->system, enhanced[w], k);
}

LocalInit Scenario::local_init(std::size_t w) const {
  LocalInit li = config->local_init;
  if (auto it = config->local_init_by_sensor.find(weak_ids[w].value); it != config->local_init_by_sensor.end()) {
    const LocalInit& o = it->second;
    if (o.X_hat) li.X_hat = o.X_hat;
    if (o.phi_hat) li.phi_hat = o.phi_hat;
    if (o.P_X) li.P_X = o.P_X;
    if (o.P_phi) li.P_phi = o.P_phi;
    if (o.U) li.U = o.U;
    if (o.V) li.V = o.V;
  }
  return li;
}

Scenario prepare_scenario(const ScenarioConfig& cfg) {
  Scenario sc;
  sc.config = &cfg;
  const Index n = cfg.system.dim();
  if (n <= 0) throw ConfigError("system: state dimension must be positive");
  if (cfg.horizon < 1) throw ConfigError("montecarlo.horizon must be >= 1");
  if (cfg.runs < 1) throw ConfigError("montecarlo.runs must be >= 1");
  if (cfg.threads < 1) throw ConfigError("montecarlo.threads must be >= 1");
  if (!(cfg.q_theta >= 0.0)) throw ConfigError("estimator.q_theta must be >= 0");
  if (cfg.x0_mean.size() != 0 && cfg.x0_mean.size() != n) throw ConfigError("system.x0_mean must have length n");
  if (cfg.x0_cov.size() != 0 && (cfg.x0_cov.rows() != n || cfg.x0_cov.cols() != n)) {
    throw ConfigError("system.x0_cov must be n x n");
  }
  if (!cfg.system.transitions().is_constant() &&
      cfg.system.transitions().size() < static_cast<std::size_t>(cfg.horizon) + 1) {
    throw ConfigError("system: A sequence covers " + std::to_string(cfg.system.transitions().size()) +
                      " steps, horizon needs " + std::to_string(cfg.horizon + 1));
  }

  std::set<int> seen;
  std::vector<SensorId> strong_ids;
  for (const auto& s : cfg.sensors) {
    if (!seen.insert(s.id().value).second) throw ConfigError("sensors: duplicate sensor id " + id_str(s.id()));
    if (s.state_dim() != n) {
      throw ConfigError("sensor " + id_str(s.id()) + ": C has " + std::to_string(s.state_dim()) +
                        " columns, system has n=" + std::to_string(n));
    }
    if (!s.outputs().is_constant() && s.outputs().size() < static_cast<std::size_t>(cfg.horizon) + 1) {
      throw ConfigError("sensor " + id_str(s.id()) + ": C sequence shorter than the horizon");
    }
    if (s.defense() == Defense::weak) {
      sc.weak_ids.push_back(s.id());
    } else {
      strong_ids.push_back(s.id());
    }
  }
  std::sort(sc.weak_ids.begin(), sc.weak_ids.end());
  std::sort(strong_ids.begin(), strong_ids.end());
  if (sc.weak_ids.empty()) throw ConfigError("sensors: at least one weak-defense sensor is required");

  for (const auto& [weak, _] : cfg.strong_assignment) {
    const SensorSpec* s = find_sensor(cfg, SensorId(weak));
    if (!s) throw ConfigError("strong assignment: sensor " + std::to_string(weak) + " does not exist");
    if (s->defense() != Defense::weak) {
      throw ConfigError("strong assignment: sensor " + std::to_string(weak) + " is not weak-defense");
    }
  }

  std::map<int, std::vector<int>> users;  // strong id -> weak ids using it
  for (SensorId weak : sc.weak_ids) {
    std::size_t weak_pos = 0;
    const SensorSpec* ws = find_sensor(cfg, weak, &weak_pos);
    std::vector<SensorId> assigned = strong_ids;
    if (auto it = cfg.strong_assignment.find(weak.value); it != cfg.strong_assignment.end()) assigned = it->second;
    std::vector<SensorSpec> strongs;
    std::vector<std::size_t> positions;
    for (SensorId sid : assigned) {
      std::size_t pos = 0;
      const SensorSpec* s = find_sensor(cfg, sid, &pos);
      if (!s) {
        throw ConfigError("sensor " + id_str(weak) + ": assigned strong sensor " + id_str(sid) + " does not exist");
      }
      if (s->defense() != Defense::strong) {
        throw ConfigError("sensor " + id_str(weak) + ": assigned sensor " + id_str(sid) + " is not strong-defense");
      }
      strongs.push_back(*s);
      positions.push_back(pos);
      users[sid.value].push_back(weak.value);
    }
    sc.enhanced.push_back(build_enhanced_sensor(*ws, strongs));
    sc.strong_index.push_back(std::move(positions));
    sc.weak_index.push_back(weak_pos);

    const AttackSpec* attack = nullptr;
    for (const auto& a : cfg.attacks) {
      if (a.sensor() != weak) continue;
      if (attack) throw ConfigError("attacks: sensor " + id_str(weak) + " has more than one attack");
      if (a.dim() != ws->measurement_dim()) {
        throw ConfigError("attacks: sensor " + id_str(weak) + " attack has dimension " + std::to_string(a.dim()) +
                          ", sensor measures " + std::to_string(ws->measurement_dim()));
      }
      attack = &a;
    }
    sc.attack.push_back(attack);

    StepSequence<double> eta(1.0);
    if (auto it = cfg.eta.find(weak.value); it != cfg.eta.end()) eta = it->second;
    for (double e : eta.items()) {
      if (!(e >= 0.0)) throw ConfigError("estimator.eta for sensor " + id_str(weak) + " must be >= 0");
    }
    if (!eta.is_constant() && eta.size() < static_cast<std::size_t>(cfg.horizon) + 1) {
      throw ConfigError("estimator.eta for sensor " + id_str(weak) + " is shorter than the horizon");
    }
    sc.eta.push_back(std::move(eta));
  }

  for (const auto& a : cfg.attacks) {
    const SensorSpec* s = find_sensor(cfg, a.sensor());
    if (!s) throw ConfigError("attacks: sensor " + id_str(a.sensor()) + " does not exist");
    if (s->defense() != Defense::weak) {
      throw ConfigError("attacks: sensor " + id_str(a.sensor()) + " is strong-defense and cannot be attacked");
    }
  }
  for (const auto& [id, _] : cfg.eta) {
    if (!std::binary_search(sc.weak_ids.begin(), sc.weak_ids.end(), SensorId(id))) {
      throw ConfigError("estimator.eta: sensor " + std::to_string(id) + " is not a weak-defense sensor");
    }
  }
  for (const auto& [strong, weaks] : users) {
    if (weaks.size() > 1) {
      std::string msg = "strong sensor " + std::to_string(strong) + " is shared by weak sensors";
      for (int w : weaks) msg += " " + std::to_string(w);
      msg += "; cross-covariance recursions ignore the resulting noise correlation";
      sc.notes.push_back(msg);
    }
  }

  // Validates init shapes up front rather than inside every run.
  for (std::size_t w = 0; w < sc.weak_count(); ++w) init_local(sc.augmented(w, 0), sc.local_init(w), sc.eta[w].at(0));
  return sc;
}

RunRecord run_scenario(const ScenarioConfig& cfg, std::uint64_t seed) {
  const Scenario sc = prepare_scenario(cfg);
  const std::size_t r = sc.weak_count();
  const Index n = sc.dim();
  const auto horizon = static_cast<std::size_t>(cfg.horizon);
  Rng rng(seed);

  RunRecord rec;
  rec.weak_ids = sc.weak_ids;
  rec.theta.resize(r);
  rec.x_hat.resize(r);
  rec.theta_hat.resize(r);
  rec.akf_x.resize(r);
  rec.akf_theta.resize(r);
  rec.P_X.resize(r);

  const Vector mean = cfg.x0_mean.size() ? cfg.x0_mean : Vector::Zero(n);
  const Matrix cov = cfg.x0_cov.size() ? cfg.x0_cov : Matrix::Identity(n, n);
  Vector x = cfg.noiseless ? mean : Vector(mean + rng.gaussian(psd_factor(cov)));

  FilterBank bank = init_bank(sc);

  auto record = [&](const FusionWeights& weights) {
    rec.x.push_back(x);
    std::vector<Vector> locals;
    for (std::size_t w = 0; w < r; ++w) {
      const LocalEstimates est = extract_estimates(bank.local[w], n);
      locals.push_back(est.x_hat);
      rec.x_hat[w].push_back(est.x_hat);
      rec.theta_hat[w].push_back(est.theta_hat);
      rec.akf_x[w].push_back(bank.akf[w].X_hat.head(n));
      rec.akf_theta[w].push_back(bank.akf[w].X_hat.tail(bank.akf[w].X_hat.size() - n));
      rec.P_X[w].push_back(bank.local[w].P_X);
    }
    rec.fused.push_back(fuse_states(weights, locals).x0_hat);
    rec.weight_residual.push_back(weight_residual(weights));
    rec.fused_trace.push_back(weights.P0.trace());
  };

  for (std::size_t w = 0; w < r; ++w) {
    rec.theta[w].push_back(sc.attack[w] ? generate_attack(*sc.attack[w], 0, rng)
                                        : Vector(Vector::Zero(sc.enhanced[w].weak_dim())));
  }
  record(at_step(0, [&] { return fusion_weights(sc, bank); }));

  std::vector<Vector> y_raw(cfg.sensors.size());
  std::vector<AugmentedSubsystem> augs(r);
  std::vector<GainPair> gains(r);
  for (std::size_t k = 1; k <= horizon; ++k) {
    x = cfg.noiseless ? Vector(cfg.system.transition(k) * x) : step_truth(cfg.system, x, k, rng);
    for (std::size_t w = 0; w < r; ++w) {
      rec.theta[w].push_back(sc.attack[w] ? generate_attack(*sc.attack[w], k, rng)
                                          : Vector(Vector::Zero(sc.enhanced[w].weak_dim())));
    }
    for (std::size_t s = 0; s < cfg.sensors.size(); ++s) {
      y_raw[s] = cfg.noiseless ? Vector(cfg.sensors[s].output(k) * x) : measure(cfg.sensors[s], x, k, rng);
    }

    at_step(k, [&] {
      for (std::size_t w = 0; w < r; ++w) {
        std::vector<Vector> strong_y;
        for (std::size_t pos : sc.strong_index[w]) strong_y.push_back(y_raw[pos]);
        const Vector y =
            assemble_measurement(sc.enhanced[w], inject_attack(y_raw[sc.weak_index[w]], rec.theta[w][k]), strong_y);
        augs[w] = sc.augmented(w, k);
        bank.local[w].eta = sc.eta[w].at(k);
        LocalStep step = step_local(bank.local[w], y, augs[w]);
        bank.local[w] = std::move(step.state);
        gains[w] = std::move(step.gains);
        bank.akf[w] = akf_step(bank.akf[w], y, augs[w]);
      }
      for (std::size_t a = 0; a < r; ++a) {
        for (std::size_t b = a + 1; b < r; ++b) {
          auto [ab, ba] = propagate_cross(bank.cross[a][b], bank.cross[b][a], gains[a], gains[b], augs[a], augs[b]);
          bank.cross[a][b] = std::move(ab);
          bank.cross[b][a] = std::move(ba);
        }
      }
      record(fusion_weights(sc, bank));
      return 0;
    });
  }
  return rec;
}

namespace {

struct RunErrors {
  std::vector<double> fused;
  std::vector<Vector> fused_components;
  std::vector<std::vector<double>> local, theta, akf, akf_theta;
  std::vector<std::vector<Vector>> local_components;
  double max_weight_residual = 0.0;
};

RunErrors squared_errors(const RunRecord& rec) {
  const std::size_t r = rec.weak_ids.size();
  RunErrors e;
  e.local.resize(r);
  e.theta.resize(r);
  e.akf.resize(r);
  e.akf_theta.resize(r);
  e.local_components.resize(r);
  for (std::size_t k = 0; k < rec.steps(); ++k) {
    const Vector df = rec.x[k] - rec.fused[k];
    e.fused.push_back(df.squaredNorm());
    e.fused_components.push_back(df.array().square().matrix());
    e.max_weight_residual = std::max(e.max_weight_residual, rec.weight_residual[k]);
    for (std::size_t w = 0; w < r; ++w) {
      const Vector dl = rec.x[k] - rec.x_hat[w][k];
      e.local[w].push_back(dl.squaredNorm());
      e.local_components[w].push_back(dl.array().square().matrix());
      e.theta[w].push_back((rec.theta[w][k] - rec.theta_hat[w][k]).squaredNorm());
      e.akf[w].push_back((rec.x[k] - rec.akf_x[w][k]).squaredNorm());
      e.akf_theta[w].push_back((rec.theta[w][k] - rec.akf_theta[w][k]).squaredNorm());
    }
  }
  return e;
}

void accumulate(std::vector<double>& sum, const std::vector<double>& v) {
  if (sum.empty()) sum.assign(v.size(), 0.0);
  for (std::size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
}

void accumulate(std::vector<Vector>& sum, const std::vector<Vector>& v) {
  if (sum.empty()) {
    sum = v;
    return;
  }
  for (std::size_t k = 0; k < v.size(); ++k) sum[k] += v[k];
}

}  // namespace

MseReport run_monte_carlo(const ScenarioConfig& cfg, int runs, int threads) {
  if (runs < 1) throw ConfigError("run count must be >= 1");
  const Scenario sc = prepare_scenario(cfg);
  for (const auto& note : sc.notes) spdlog::info("{}", note);

  std::vector<std::optional<RunErrors>> results(static_cast<std::size_t>(runs));
  std::vector<std::string> errors(static_cast<std::size_t>(runs));
  parallel_for(results.size(), threads, [&](std::size_t i) {
    try {
      results[i] = squared_errors(run_scenario(cfg, run_seed(cfg.seed, i)));
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  MseReport rep;
  rep.seed = cfg.seed;
  rep.weak_ids = sc.weak_ids;
  const std::size_t r = sc.weak_count();
  rep.local.resize(r);
  rep.theta.resize(r);
  rep.akf.resize(r);
  rep.akf_theta.resize(r);
  rep.local_components.resize(r);
  for (std::size_t i = 0; i < results.size(); ++i) {
    if (!results[i]) {
      rep.partial = true;
      rep.failed_seeds.push_back(run_seed(cfg.seed, i));
      rep.failures.push_back(errors[i]);
      continue;
    }
    const RunErrors& e = *results[i];
    ++rep.runs;
    accumulate(rep.fused, e.fused);
    accumulate(rep.fused_components, e.fused_components);
    for (std::size_t w = 0; w < r; ++w) {
      accumulate(rep.local[w], e.local[w]);
      accumulate(rep.theta[w], e.theta[w]);
      accumulate(rep.akf[w], e.akf[w]);
      accumulate(rep.akf_theta[w], e.akf_theta[w]);
      accumulate(rep.local_components[w], e.local_components[w]);
    }
    rep.max_weight_residual = std::max(rep.max_weight_residual, e.max_weight_residual);
  }
  if (rep.runs == 0) return rep;
  const double scale = 1.0 / rep.runs;
  auto normalize = [scale](std::vector<double>& v) {
    for (double& d : v) d *= scale;
  };
  normalize(rep.fused);
  for (auto& v : rep.fused_components) v *= scale;
  for (std::size_t w = 0; w < r; ++w) {
    normalize(rep.local[w]);
    normalize(rep.theta[w]);
    normalize(rep.akf[w]);
    normalize(rep.akf_theta[w]);
    for (auto& v : rep.local_components[w]) v *= scale;
  }
  return rep;
}

double time_average(const std::vector<double>& curve, std::size_t first, std::size_t last) {
  if (curve.empty()) return 0.0;
  last = std::min(last, curve.size() - 1);
  if (first > last) return 0.0;
  double sum = 0.0;
  for (std::size_t k = first; k <= last; ++k) sum += curve[k];
  return sum / static_cast<double>(last - first + 1);
}

ScenarioConfig builtin_ieee4bus() {
  ScenarioConfig cfg;
  cfg.name = "ieee4bus";
  Matrix A(4, 4);
  A << -0.837, 0.5427, 0, 0,
       -0.5427, -0.837, 0, 0,
       0, 0, 0.9851, 0,
       0, 0, 0, 0.9556;
  const Vector q = (Vector(4) << 0.1, 0.2, 0.3, 0.2).finished();
  cfg.system = SystemModel(A, q.asDiagonal());

  const Matrix r = Matrix::Constant(1, 1, 0.1);
  auto row = [](double a, double b, double c, double d) { return Matrix((Matrix(1, 4) << a, b, c, d).finished()); };
  cfg.sensors.emplace_back(SensorId(1), row(1, 0, 0, 0), r, Defense::weak);
  cfg.sensors.emplace_back(SensorId(2), row(0, 0, 1, 0), r, Defense::weak);
  cfg.sensors.emplace_back(SensorId(3), row(1, 0, 0, 1), r, Defense::strong);
  cfg.sensors.emplace_back(SensorId(4), row(0, 0, 1, 1), r, Defense::strong);
  cfg.sensors.emplace_back(SensorId(5), row(0, 1, 1, 0), r, Defense::strong);
  cfg.strong_assignment[1] = {SensorId(3), SensorId(4)};
  cfg.strong_assignment[2] = {SensorId(3), SensorId(5)};

  cfg.attacks.emplace_back(SensorId(1), 1, GaussianAttack{Matrix::Constant(1, 1, 5.0)});
  cfg.attacks.emplace_back(SensorId(2), 1, PulseAttack{50, 51, Vector::Constant(1, 3.0)});
  cfg.eta[1] = 1.0;
  cfg.eta[2] = 1.0;
  cfg.q_theta = 1.0;
  cfg.horizon = 100;
  cfg.runs = 500;
  cfg.seed = 1;
  return cfg;
}

ScenarioConfig builtin_scalar() {
  ScenarioConfig cfg;
  cfg.name = "scalar";
  const Matrix one = Matrix::Identity(1, 1);
  cfg.system = SystemModel(one, one);
  cfg.sensors.emplace_back(SensorId(1), one, one, Defense::weak);
  cfg.sensors.emplace_back(SensorId(2), one, one, Defense::strong);
  cfg.attacks.emplace_back(SensorId(1), 1, GaussianAttack{one});
  cfg.eta[1] = 1.0;
  cfg.horizon = 20;
  cfg.runs = 2000;
  cfg.seed = 1;
  return cfg;
}

std::vector<std::string> builtin_names() { return {"ieee4bus", "scalar"}; }

ScenarioConfig builtin_scenario(const std::string& name) {
  if (name == "ieee4bus") return builtin_ieee4bus();
  if (name == "scalar") return builtin_scalar();
  throw ConfigError("unknown built-in scenario '" + name + "'");
}

}  // namespace secfuse
