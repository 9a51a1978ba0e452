#include "secfuse/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "secfuse/errors.hpp"
#include "secfuse/toml_reader.hpp"

namespace secfuse {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

double to_number(const json& v, const std::string& path) {
  if (!v.is_number()) bad(path, "expected a number");
  return v.get<double>();
}

int to_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) bad(path, "expected an integer");
  return v.get<int>();
}

/// Number -> 1x1, flat array -> one row, array of arrays -> rows,
/// {"diag": [...]} -> diagonal matrix.
Matrix to_matrix(const json& v, const std::string& path) {
  if (v.is_number()) return Matrix::Constant(1, 1, v.get<double>());
  if (v.is_object()) {
    if (!v.contains("diag") || v.size() != 1) bad(path, "matrix object must have exactly one key 'diag'");
    const json& d = v.at("diag");
    if (!d.is_array() || d.empty()) bad(path + ".diag", "expected a non-empty array of numbers");
    Vector diag(static_cast<Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) diag(static_cast<Index>(i)) = to_number(d[i], path + ".diag");
    return diag.asDiagonal();
  }
  if (!v.is_array() || v.empty()) bad(path, "expected a number, a matrix or {diag = [...]}");
  if (v.front().is_number()) {
    Matrix row(1, static_cast<Index>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) row(0, static_cast<Index>(j)) = to_number(v[j], path);
    return row;
  }
  const std::size_t cols = v.front().is_array() ? v.front().size() : 0;
  if (cols == 0) bad(path, "matrix rows must be non-empty arrays");
  Matrix m(static_cast<Index>(v.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& row = v[i];
    if (!row.is_array() || row.size() != cols) bad(path, "row " + std::to_string(i) + " has the wrong length");
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = to_number(row[j], path);
  }
  return m;
}

Vector to_vector(const json& v, const std::string& path) {
  if (v.is_number()) return Vector::Constant(1, v.get<double>());
  if (!v.is_array()) bad(path, "expected a number or an array of numbers");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = to_number(v[i], path);
  return out;
}

/// Like to_vector, but a bare number is broadcast to `dim` entries.
Vector to_vector_dim(const json& v, Index dim, const std::string& path) {
  if (v.is_number()) return Vector::Constant(dim, v.get<double>());
  return to_vector(v, path);
}

StepSequence<Matrix> to_matrix_sequence(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) bad(path, "expected a non-empty array of matrices");
  std::vector<Matrix> items;
  for (std::size_t k = 0; k < v.size(); ++k) items.push_back(to_matrix(v[k], path + "[" + std::to_string(k) + "]"));
  return StepSequence<Matrix>(std::move(items));
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(path, "expected a table");
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      bad(path + "." + key, "unknown field");
    }
  }
}

int parse_sensor_key(const std::string& key, const std::string& path) {
  try {
    std::size_t used = 0;
    const int id = std::stoi(key, &used);
    if (used == key.size()) return id;
  } catch (const std::exception&) {
  }
  bad(path + "." + key, "expected a sensor id");
}

template <typename Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<int> weak_sensor_ids(const ScenarioConfig& cfg) {
  std::vector<int> ids;
  for (const auto& s : cfg.sensors) {
    if (s.defense() == Defense::weak) ids.push_back(s.id().value);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

const SensorSpec* find_sensor(const ScenarioConfig& cfg, int id) {
  for (const auto& s : cfg.sensors) {
    if (s.id().value == id) return &s;
  }
  return nullptr;
}

void apply_system(ScenarioConfig& cfg, const json& sys) {
  check_keys(sys, "system", {"A", "A_sequence", "Q", "x0_mean", "x0_cov", "noiseless"});
  if (sys.contains("A") && sys.contains("A_sequence")) bad("system", "give either A or A_sequence, not both");
  StepSequence<Matrix> A = cfg.system.transitions();
  Matrix Q = cfg.system.process_noise();
  if (sys.contains("A")) A = StepSequence<Matrix>(to_matrix(sys.at("A"), "system.A"));
  if (sys.contains("A_sequence")) A = to_matrix_sequence(sys.at("A_sequence"), "system.A_sequence");
  if (sys.contains("Q")) Q = to_matrix(sys.at("Q"), "system.Q");
  if (A.size() == 0) bad("system.A", "missing");
  if (Q.size() == 0) bad("system.Q", "missing");
  cfg.system = SystemModel(std::move(A), std::move(Q));
  if (sys.contains("x0_mean")) cfg.x0_mean = to_vector(sys.at("x0_mean"), "system.x0_mean");
  if (sys.contains("x0_cov")) cfg.x0_cov = to_matrix(sys.at("x0_cov"), "system.x0_cov");
  if (sys.contains("noiseless")) {
    if (!sys.at("noiseless").is_boolean()) bad("system.noiseless", "expected true or false");
    cfg.noiseless = sys.at("noiseless").get<bool>();
  }
}

Defense parse_defense(const json& v, const std::string& path) {
  if (!v.is_string()) bad(path, "expected \"weak\" or \"strong\"");
  const auto s = v.get<std::string>();
  if (s == "weak") return Defense::weak;
  if (s == "strong") return Defense::strong;
  bad(path, "expected \"weak\" or \"strong\", got \"" + s + "\"");
}

void apply_sensors(ScenarioConfig& cfg, const json& list) {
  if (!list.is_array() || list.empty()) bad("sensors", "expected a non-empty list of sensors");
  cfg.sensors.clear();
  cfg.strong_assignment.clear();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "sensors[" + std::to_string(i) + "]";
    const json& s = list[i];
    check_keys(s, path, {"id", "C", "C_sequence", "R", "defense", "strong"});
    for (const char* key : {"id", "R", "defense"}) {
      if (!s.contains(key)) bad(path + "." + key, "missing");
    }
    if (s.contains("C") == s.contains("C_sequence")) bad(path, "give exactly one of C or C_sequence");
    const int id = to_int(s.at("id"), path + ".id");
    StepSequence<Matrix> C = s.contains("C") ? StepSequence<Matrix>(to_matrix(s.at("C"), path + ".C"))
                                              : to_matrix_sequence(s.at("C_sequence"), path + ".C_sequence");
    const Defense defense = parse_defense(s.at("defense"), path + ".defense");
    Matrix R = to_matrix(s.at("R"), path + ".R");
    with_path(path, [&] {
      cfg.sensors.emplace_back(SensorId{id}, std::move(C), std::move(R), defense);
      return 0;
    });
    if (s.contains("strong")) {
      if (defense != Defense::weak) bad(path + ".strong", "only weak-defense sensors take a strong list");
      const json& st = s.at("strong");
      if (!st.is_array()) bad(path + ".strong", "expected a list of sensor ids");
      auto& ids = cfg.strong_assignment[id];
      for (const auto& e : st) ids.push_back(SensorId{to_int(e, path + ".strong")});
    }
  }
}

void apply_strong_assignment(ScenarioConfig& cfg, const json& table) {
  if (!table.is_object()) bad("strong_assignment", "expected a table of sensor id -> list of ids");
  for (const auto& [key, st] : table.items()) {
    const int id = parse_sensor_key(key, "strong_assignment");
    if (!st.is_array()) bad("strong_assignment." + key, "expected a list of sensor ids");
    std::vector<SensorId> ids;
    for (const auto& e : st) ids.push_back(SensorId{to_int(e, "strong_assignment." + key)});
    cfg.strong_assignment[id] = std::move(ids);
  }
}

AttackKind parse_attack_kind(const json& a, Index dim, const std::string& path, const fs::path& base_dir) {
  if (!a.contains("kind") || !a.at("kind").is_string()) bad(path + ".kind", "expected a string");
  const auto kind = a.at("kind").get<std::string>();
  auto need = [&](const char* key) -> const json& {
    if (!a.contains(key)) bad(path + "." + key, "missing for kind \"" + kind + "\"");
    return a.at(key);
  };
  if (kind == "none") {
    check_keys(a, path, {"sensor", "kind"});
    return NoAttack{};
  }
  if (kind == "gaussian") {
    check_keys(a, path, {"sensor", "kind", "cov"});
    const json& cov = need("cov");
    if (cov.is_number()) return GaussianAttack{cov.get<double>() * Matrix::Identity(dim, dim)};
    return GaussianAttack{to_matrix(cov, path + ".cov")};
  }
  if (kind == "pulse") {
    check_keys(a, path, {"sensor", "kind", "start", "end", "value"});
    return PulseAttack{to_int(need("start"), path + ".start"), to_int(need("end"), path + ".end"),
                       to_vector_dim(need("value"), dim, path + ".value")};
  }
  if (kind == "constant") {
    check_keys(a, path, {"sensor", "kind", "value"});
    return ConstantAttack{to_vector_dim(need("value"), dim, path + ".value")};
  }
  if (kind == "file") {
    check_keys(a, path, {"sensor", "kind", "path"});
    const json& p = need("path");
    if (!p.is_string()) bad(path + ".path", "expected a string");
    fs::path file = p.get<std::string>();
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    try {
      return FileAttack{file.string(), load_attack_trace(file.string(), dim)};
    } catch (const InputError& e) {
      bad(path + ".path", e.what());
    }
  }
  bad(path + ".kind", "unknown attack kind \"" + kind + "\" (none, gaussian, pulse, constant, file)");
}

void apply_attacks(ScenarioConfig& cfg, const json& list, const fs::path& base_dir) {
  if (!list.is_array()) bad("attacks", "expected a list of attacks");
  cfg.attacks.clear();
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "attacks[" + std::to_string(i) + "]";
    const json& a = list[i];
    if (!a.is_object()) bad(path, "expected a table");
    if (!a.contains("sensor")) bad(path + ".sensor", "missing");
    const int id = to_int(a.at("sensor"), path + ".sensor");
    const SensorSpec* s = find_sensor(cfg, id);
    if (!s) bad(path + ".sensor", "sensor " + std::to_string(id) + " does not exist");
    AttackKind kind = parse_attack_kind(a, s->measurement_dim(), path, base_dir);
    with_path(path, [&] {
      cfg.attacks.emplace_back(SensorId{id}, s->measurement_dim(), std::move(kind));
      return 0;
    });
  }
}

StepSequence<double> to_eta(const json& v, const std::string& path) {
  if (v.is_number()) return StepSequence<double>(v.get<double>());
  if (!v.is_array() || v.empty()) bad(path, "expected a number or a non-empty per-step list");
  std::vector<double> seq;
  for (const auto& e : v) seq.push_back(to_number(e, path));
  return StepSequence<double>(std::move(seq));
}

LocalInit to_local_init(const json& v, const std::string& path) {
  check_keys(v, path, {"X_hat", "phi_hat", "P_X", "P_phi", "U", "V"});
  LocalInit init;
  if (v.contains("X_hat")) init.X_hat = to_vector(v.at("X_hat"), path + ".X_hat");
  if (v.contains("phi_hat")) init.phi_hat = to_vector(v.at("phi_hat"), path + ".phi_hat");
  if (v.contains("P_X")) init.P_X = to_matrix(v.at("P_X"), path + ".P_X");
  if (v.contains("P_phi")) init.P_phi = to_matrix(v.at("P_phi"), path + ".P_phi");
  if (v.contains("U")) init.U = to_matrix(v.at("U"), path + ".U");
  if (v.contains("V")) init.V = to_matrix(v.at("V"), path + ".V");
  return init;
}

void apply_estimator(ScenarioConfig& cfg, const json& est) {
  check_keys(est, "estimator", {"eta", "q_theta", "init", "sensor_init", "cross_init", "akf_init"});
  if (est.contains("eta")) {
    const json& eta = est.at("eta");
    if (eta.is_object()) {
      for (const auto& [key, v] : eta.items()) {
        cfg.eta.insert_or_assign(parse_sensor_key(key, "estimator.eta"), to_eta(v, "estimator.eta." + key));
      }
    } else if (eta.is_array()) {
      const auto weak = weak_sensor_ids(cfg);
      if (eta.size() != weak.size()) {
        bad("estimator.eta", "list has " + std::to_string(eta.size()) + " entries for " +
                                 std::to_string(weak.size()) + " weak-defense sensors");
      }
      for (std::size_t w = 0; w < weak.size(); ++w) {
        cfg.eta.insert_or_assign(weak[w], to_eta(eta[w], "estimator.eta[" + std::to_string(w) + "]"));
      }
    } else if (eta.is_number()) {
      for (int id : weak_sensor_ids(cfg)) cfg.eta.insert_or_assign(id, StepSequence<double>(eta.get<double>()));
    } else {
      bad("estimator.eta", "expected a number, a list in weak-sensor order or a table keyed by sensor id");
    }
  }
  if (est.contains("q_theta")) cfg.q_theta = to_number(est.at("q_theta"), "estimator.q_theta");
  if (est.contains("init")) cfg.local_init = to_local_init(est.at("init"), "estimator.init");
  if (est.contains("sensor_init")) {
    const json& t = est.at("sensor_init");
    if (!t.is_object()) bad("estimator.sensor_init", "expected a table keyed by sensor id");
    for (const auto& [key, v] : t.items()) {
      cfg.local_init_by_sensor[parse_sensor_key(key, "estimator.sensor_init")] =
          to_local_init(v, "estimator.sensor_init." + key);
    }
  }
  if (est.contains("cross_init")) {
    const json& list = est.at("cross_init");
    if (!list.is_array()) bad("estimator.cross_init", "expected a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "estimator.cross_init[" + std::to_string(i) + "]";
      const json& c = list[i];
      check_keys(c, path, {"pair", "P_X", "P_phi", "U", "Y", "V"});
      if (!c.contains("pair") || !c.at("pair").is_array() || c.at("pair").size() != 2) {
        bad(path + ".pair", "expected two sensor ids");
      }
      const int a = to_int(c.at("pair")[0], path + ".pair");
      const int b = to_int(c.at("pair")[1], path + ".pair");
      CrossInit init;
      if (c.contains("P_X")) init.P_X = to_matrix(c.at("P_X"), path + ".P_X");
      if (c.contains("P_phi")) init.P_phi = to_matrix(c.at("P_phi"), path + ".P_phi");
      if (c.contains("U")) init.U = to_matrix(c.at("U"), path + ".U");
      if (c.contains("Y")) init.Y = to_matrix(c.at("Y"), path + ".Y");
      if (c.contains("V")) init.V = to_matrix(c.at("V"), path + ".V");
      cfg.cross_init[{a, b}] = std::move(init);
    }
  }
  if (est.contains("akf_init")) {
    const json& t = est.at("akf_init");
    if (!t.is_object()) bad("estimator.akf_init", "expected a table keyed by sensor id");
    for (const auto& [key, v] : t.items()) {
      const std::string path = "estimator.akf_init." + key;
      check_keys(v, path, {"X_hat", "P"});
      AkfInit init;
      if (v.contains("X_hat")) init.X_hat = to_vector(v.at("X_hat"), path + ".X_hat");
      if (v.contains("P")) init.P = to_matrix(v.at("P"), path + ".P");
      cfg.akf_init[parse_sensor_key(key, "estimator.akf_init")] = std::move(init);
    }
  }
}

void apply_montecarlo(ScenarioConfig& cfg, const json& mc) {
  check_keys(mc, "montecarlo", {"horizon", "runs", "seed", "threads"});
  if (mc.contains("horizon")) cfg.horizon = to_int(mc.at("horizon"), "montecarlo.horizon");
  if (mc.contains("runs")) cfg.runs = to_int(mc.at("runs"), "montecarlo.runs");
  if (mc.contains("threads")) cfg.threads = to_int(mc.at("threads"), "montecarlo.threads");
  if (mc.contains("seed")) {
    const json& s = mc.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0)) {
      bad("montecarlo.seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json attack_json(const AttackSpec& a) {
  json out = {{"sensor", a.sensor().value}, {"kind", a.kind_name()}};
  std::visit(
      [&](const auto& k) {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianAttack>) {
          out["cov"] = matrix_json(k.cov);
        } else if constexpr (std::is_same_v<T, PulseAttack>) {
          out["start"] = k.start;
          out["end"] = k.end;
          out["value"] = vector_json(k.value);
        } else if constexpr (std::is_same_v<T, ConstantAttack>) {
          out["value"] = vector_json(k.value);
        } else if constexpr (std::is_same_v<T, FileAttack>) {
          out["path"] = k.path;
        }
      },
      a.kind());
  return out;
}

}  // namespace

ScenarioConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: expected a table at the top level");
  check_keys(doc, "config",
             {"scenario", "name", "system", "sensors", "strong_assignment", "attacks", "estimator", "montecarlo"});
  ScenarioConfig cfg;
  if (doc.contains("scenario")) {
    if (!doc.at("scenario").is_string()) bad("scenario", "expected a built-in scenario name");
    cfg = builtin_scenario(doc.at("scenario").get<std::string>());
  } else {
    for (const char* key : {"system", "sensors"}) {
      if (!doc.contains(key)) bad(key, "missing (or name a built-in `scenario` to start from)");
    }
  }
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) bad("name", "expected a string");
    cfg.name = doc.at("name").get<std::string>();
  }
  if (doc.contains("system")) apply_system(cfg, doc.at("system"));
  if (doc.contains("sensors")) apply_sensors(cfg, doc.at("sensors"));
  if (doc.contains("strong_assignment")) apply_strong_assignment(cfg, doc.at("strong_assignment"));
  if (doc.contains("attacks")) apply_attacks(cfg, doc.at("attacks"), base_dir);
  if (doc.contains("estimator")) apply_estimator(cfg, doc.at("estimator"));
  if (doc.contains("montecarlo")) apply_montecarlo(cfg, doc.at("montecarlo"));
  prepare_scenario(cfg);
  return cfg;
}

ScenarioConfig parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  const auto first = std::find_if(text.begin(), text.end(), [](char c) { return !std::isspace(static_cast<unsigned char>(c)); });
  const bool as_json = path.extension() == ".json" || (path.extension() != ".toml" && first != text.end() && *first == '{');
  json doc;
  if (as_json) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  } else {
    try {
      doc = parse_toml(text);
    } catch (const ConfigError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return config_from_json(doc, path.parent_path());
}

ScenarioConfig load_scenario(const std::string& name_or_path) {
  const auto names = builtin_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    ScenarioConfig cfg = builtin_scenario(name_or_path);
    prepare_scenario(cfg);
    return cfg;
  }
  if (!fs::exists(name_or_path)) {
    std::string known;
    for (const auto& n : names) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("'" + name_or_path + "' is neither a built-in scenario (" + known + ") nor a file");
  }
  return parse_config(name_or_path);
}

json effective_config(const ScenarioConfig& cfg) {
  const Scenario sc = prepare_scenario(cfg);
  const Index n = cfg.system.dim();
  json doc;
  doc["name"] = cfg.name;

  json sys;
  if (cfg.system.transitions().is_constant()) {
    sys["A"] = matrix_json(cfg.system.transition(0));
  } else {
    json seq = json::array();
    for (const auto& a : cfg.system.transitions().items()) seq.push_back(matrix_json(a));
    sys["A_sequence"] = std::move(seq);
  }
  sys["Q"] = matrix_json(cfg.system.process_noise());
  sys["x0_mean"] = vector_json(cfg.x0_mean.size() ? cfg.x0_mean : Vector::Zero(n));
  sys["x0_cov"] = matrix_json(cfg.x0_cov.size() ? cfg.x0_cov : Matrix::Identity(n, n));
  sys["noiseless"] = cfg.noiseless;
  doc["system"] = std::move(sys);

  json sensors = json::array();
  for (const auto& s : cfg.sensors) {
    json e = {{"id", s.id().value}, {"defense", s.defense() == Defense::weak ? "weak" : "strong"}};
    if (s.outputs().is_constant()) {
      e["C"] = matrix_json(s.output(0));
    } else {
      json seq = json::array();
      for (const auto& c : s.outputs().items()) seq.push_back(matrix_json(c));
      e["C_sequence"] = std::move(seq);
    }
    e["R"] = matrix_json(s.noise());
    for (std::size_t w = 0; w < sc.weak_count(); ++w) {
      if (sc.weak_ids[w] != s.id()) continue;
      json st = json::array();
      for (const auto& id : sc.enhanced[w].strong_ids) st.push_back(id.value);
      e["strong"] = std::move(st);
    }
    sensors.push_back(std::move(e));
  }
  doc["sensors"] = std::move(sensors);

  json attacks = json::array();
  for (const auto& a : cfg.attacks) attacks.push_back(attack_json(a));
  doc["attacks"] = std::move(attacks);

  json est;
  json eta = json::array();
  for (const auto& e : sc.eta) {
    if (e.is_constant()) {
      eta.push_back(e.at(0));
    } else {
      eta.push_back(e.items());
    }
  }
  est["eta"] = std::move(eta);
  est["q_theta"] = cfg.q_theta;
  json sensor_init = json::object();
  json akf_init = json::object();
  for (std::size_t w = 0; w < sc.weak_count(); ++w) {
    const auto aug = sc.augmented(w, 0);
    const auto st = init_local(aug, sc.local_init(w), sc.eta[w].at(0));
    const std::string key = std::to_string(sc.weak_ids[w].value);
    sensor_init[key] = {{"X_hat", vector_json(st.X_hat)}, {"phi_hat", vector_json(st.phi_hat)},
                        {"P_X", matrix_json(st.P_X)},     {"P_phi", matrix_json(st.P_phi)},
                        {"U", matrix_json(st.U)},         {"V", matrix_json(st.V)}};
    AkfInit ai;
    if (auto it = cfg.akf_init.find(sc.weak_ids[w].value); it != cfg.akf_init.end()) ai = it->second;
    const auto akf = init_akf(aug, cfg.q_theta, {ai.X_hat ? ai.X_hat : st.X_hat, ai.P ? ai.P : st.P_X});
    akf_init[key] = {{"X_hat", vector_json(akf.X_hat)}, {"P", matrix_json(akf.P)}};
  }
  est["sensor_init"] = std::move(sensor_init);
  est["akf_init"] = std::move(akf_init);
  if (!cfg.cross_init.empty()) {
    json cross = json::array();
    for (const auto& [pair, init] : cfg.cross_init) {
      json c = {{"pair", {pair.first, pair.second}}};
      if (init.P_X) c["P_X"] = matrix_json(*init.P_X);
      if (init.P_phi) c["P_phi"] = matrix_json(*init.P_phi);
      if (init.U) c["U"] = matrix_json(*init.U);
      if (init.Y) c["Y"] = matrix_json(*init.Y);
      if (init.V) c["V"] = matrix_json(*init.V);
      cross.push_back(std::move(c));
    }
    est["cross_init"] = std::move(cross);
  }
  doc["estimator"] = std::move(est);

  doc["montecarlo"] = {{"horizon", cfg.horizon}, {"runs", cfg.runs}, {"seed", cfg.seed}, {"threads", cfg.threads}};
  return doc;
}

}  // namespace secfuse
