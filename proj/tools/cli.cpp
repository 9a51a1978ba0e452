#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "secfuse/config.hpp"
#include "secfuse/csv.hpp"
#include "secfuse/errors.hpp"
#include "secfuse/simulation.hpp"

namespace secfuse::cli {
namespace {

struct Options {
  std::string scenario = "ieee4bus";
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  std::optional<int> horizon;
  std::optional<int> threads;
  std::optional<double> q_theta;
  std::vector<std::string> eta;
  std::string out_path;
  bool components = false;
  int window = 0;
  int step = 10;
  int trials = 1000;
  std::uint64_t probe_seed = 1;
  std::vector<int> checkpoints{10, 50, 100};
  double tolerance = 0.15;
};

void apply_eta_override(ScenarioConfig& cfg, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) throw ConfigError("--eta expects i=v, got '" + spec + "'");
  int id = 0;
  double value = 0.0;
  try {
    std::size_t used = 0;
    id = std::stoi(spec.substr(0, eq), &used);
    if (used != eq) throw std::invalid_argument("id");
    const std::string v = spec.substr(eq + 1);
    value = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("value");
  } catch (const std::exception&) {
    throw ConfigError("--eta expects i=v with an integer sensor id and a number, got '" + spec + "'");
  }
  cfg.eta.insert_or_assign(id, StepSequence<double>(value));
}

ScenarioConfig build_config(const Options& opt) {
  ScenarioConfig cfg = load_scenario(opt.scenario);
  if (opt.runs) cfg.runs = *opt.runs;
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.horizon) cfg.horizon = *opt.horizon;
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.q_theta) cfg.q_theta = *opt.q_theta;
  for (const auto& e : opt.eta) apply_eta_override(cfg, e);
  prepare_scenario(cfg);
  return cfg;
}

/// Writes through `fn` to --out if given, otherwise to `out`.
void emit(const Options& opt, std::ostream& out, const std::function<void(std::ostream&)>& fn) {
  if (opt.out_path.empty()) {
    fn(out);
    return;
  }
  std::ofstream file(opt.out_path, std::ios::binary);
  if (!file) throw InputError("cannot write '" + opt.out_path + "'");
  fn(file);
  if (!file) throw InputError("error while writing '" + opt.out_path + "'");
}

void report_partial(const MseReport& rep, std::ostream& err) {
  if (!rep.partial) return;
  err << fmt::format("warning: {} run(s) failed and were excluded; {} run(s) averaged\n", rep.failed_seeds.size(),
                     rep.runs);
  for (std::size_t i = 0; i < rep.failed_seeds.size(); ++i) {
    err << fmt::format("  seed {}: {}\n", rep.failed_seeds[i], rep.failures[i]);
  }
}

MseReport monte_carlo(const ScenarioConfig& cfg, std::ostream& err) {
  MseReport rep = run_monte_carlo(cfg, cfg.runs, cfg.threads);
  report_partial(rep, err);
  if (rep.runs == 0) throw EstimatorError("every Monte Carlo run failed", 0.0);
  return rep;
}

int cmd_run(const Options& opt, std::ostream& out) {
  const ScenarioConfig cfg = build_config(opt);
  const RunRecord rec = run_scenario(cfg, cfg.seed);
  emit(opt, out, [&](std::ostream& os) { write_run_csv(os, rec); });
  return kSuccess;
}

int cmd_mc(const Options& opt, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = build_config(opt);
  const MseReport rep = monte_carlo(cfg, err);
  emit(opt, out, [&](std::ostream& os) { write_mse_csv(os, rep, opt.components); });
  return kSuccess;
}

int cmd_compare(const Options& opt, std::ostream& out, std::ostream& err) {
  const ScenarioConfig cfg = build_config(opt);
  const MseReport rep = monte_carlo(cfg, err);
  emit(opt, out, [&](std::ostream& os) { write_compare_csv(os, rep); });
  return kSuccess;
}

int cmd_check(const Options& opt, std::ostream& out) {
  const ScenarioConfig cfg = build_config(opt);
  const Scenario sc = prepare_scenario(cfg);
  emit(opt, out, [&](std::ostream& os) {
    os << fmt::format("scenario {}: {} weak-defense sensor(s)\n", cfg.name, sc.weak_count());
    for (const auto& note : sc.notes) os << "note: " << note << '\n';
    for (std::size_t w = 0; w < sc.weak_count(); ++w) {
      std::string strong;
      for (const auto& s : sc.enhanced[w].strong_ids) strong += (strong.empty() ? "" : ",") + std::to_string(s.value);
      const ObservabilityReport r = check_observability(sc.augmented(w, 0), opt.window);
      os << fmt::format("sensor {}: strong {{{}}} rank {}/{} horizon {} {}\n", sc.weak_ids[w].value, strong, r.rank,
                        r.dim, r.horizon, r.full_rank ? "observable" : "NOT observable");
    }
  });
  return kSuccess;
}

int cmd_config(const Options& opt, std::ostream& out) {
  const ScenarioConfig cfg = build_config(opt);
  emit(opt, out, [&](std::ostream& os) { os << effective_config(cfg).dump(2) << '\n'; });
  return kSuccess;
}

int cmd_probe_optimality(const Options& opt, std::ostream& out) {
  const ScenarioConfig cfg = build_config(opt);
  const OptimalityReport rep = gain_optimality_probe(cfg, opt.step, opt.trials, opt.probe_seed);
  emit(opt, out, [&](std::ostream& os) {
    os << fmt::format("step {} trials {}\n", rep.step, rep.trials);
    os << fmt::format("min trace margin K     {:.6e}\n", rep.min_margin_K);
    os << fmt::format("min trace margin Gamma {:.6e}\n", rep.min_margin_Gamma);
    os << (rep.passed ? "PASS" : "FAIL") << '\n';
  });
  return rep.passed ? kSuccess : kProbeFailure;
}

int cmd_probe_consistency(const Options& opt, std::ostream& out) {
  const ScenarioConfig cfg = build_config(opt);
  const int runs = opt.runs.value_or(cfg.runs);
  const ConsistencyReport rep = covariance_consistency_probe(cfg, runs, opt.checkpoints, cfg.threads);
  const bool passed = rep.max_relative_error() <= opt.tolerance;
  emit(opt, out, [&](std::ostream& os) {
    os << fmt::format("runs {} tolerance {}\n", rep.runs, opt.tolerance);
    for (const auto& e : rep.entries) {
      os << fmt::format("sensor {} k {}: relative error {:.4f} (trace {:.6g} vs predicted {:.6g})\n", e.sensor.value,
                        e.step, e.relative_error, e.empirical_trace, e.predicted_trace);
    }
    os << (passed ? "PASS" : "FAIL") << '\n';
  });
  return passed ? kSuccess : kProbeFailure;
}

void add_scenario_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--scenario", opt.scenario, "Built-in scenario name or path to a TOML/JSON scenario file")
      ->capture_default_str();
  cmd->add_option("--seed", opt.seed, "Base seed (run r uses seed + r)");
  cmd->add_option("--horizon", opt.horizon, "Last time step K")->check(CLI::PositiveNumber);
  cmd->add_option("--eta", opt.eta, "Attack-increment weight override for one weak sensor, as i=v (repeatable)");
  cmd->add_option("--q-theta", opt.q_theta, "Baseline pseudo-noise on the attack channel")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opt.out_path, "Output file (default: standard output)");
}

void add_mc_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--runs", opt.runs, "Monte Carlo runs")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", opt.threads, "Worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Secure multi-sensor fusion simulator"};
  app.name("secfuse");
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Simulate one realization and write per-step truth and estimates");
  add_scenario_options(run, opt);

  auto* mc = app.add_subcommand("mc", "Monte Carlo mean squared error curves");
  add_scenario_options(mc, opt);
  add_mc_options(mc, opt);
  mc->add_flag("--components", opt.components, "Also write per-component squared errors");

  auto* compare = app.add_subcommand("compare", "Monte Carlo MSE of the proposed estimator against the baseline");
  add_scenario_options(compare, opt);
  add_mc_options(compare, opt);

  auto* check = app.add_subcommand("check", "Validate a scenario and report subsystem observability");
  add_scenario_options(check, opt);
  check->add_option("--window", opt.window, "Observability window (default n + p)")->check(CLI::NonNegativeNumber);

  auto* config = app.add_subcommand("config", "Print every effective configuration value as JSON");
  add_scenario_options(config, opt);

  auto* probe_opt = app.add_subcommand("probe-optimality", "Perturb the gains at one step and check the trace increases");
  add_scenario_options(probe_opt, opt);
  probe_opt->add_option("--step", opt.step, "Time step to probe")->capture_default_str()->check(CLI::PositiveNumber);
  probe_opt->add_option("--trials", opt.trials, "Random perturbations per sensor")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  probe_opt->add_option("--probe-seed", opt.probe_seed, "Seed for the perturbations")->capture_default_str();

  auto* probe_cons = app.add_subcommand("probe-consistency", "Compare predicted P_X with the empirical error moment");
  add_scenario_options(probe_cons, opt);
  add_mc_options(probe_cons, opt);
  probe_cons->add_option("--checkpoints", opt.checkpoints, "Time steps to compare")
      ->delimiter(',')
      ->capture_default_str();
  probe_cons->add_option("--tolerance", opt.tolerance, "Maximum relative Frobenius error")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (run->parsed()) return cmd_run(opt, out);
    if (mc->parsed()) return cmd_mc(opt, out, err);
    if (compare->parsed()) return cmd_compare(opt, out, err);
    if (check->parsed()) return cmd_check(opt, out);
    if (config->parsed()) return cmd_config(opt, out);
    if (probe_opt->parsed()) return cmd_probe_optimality(opt, out);
    if (probe_cons->parsed()) return cmd_probe_consistency(opt, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kUsageError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kUsageError;
}

}  // namespace secfuse::cli
