#include "rampc/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace rampc {

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = seed;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

QuadrotorParams ScenarioConfig::quad() const {
  QuadrotorParams q;
  q.mass = true_mass;
  return q;
}

void ScenarioConfig::validate() const {
  if (model != "altitude-2" && model != "direct-12") {
    throw ConfigError("config: model must be altitude-2 or direct-12");
  }
  if (!(mass_lo > 0.0 && mass_hi > mass_lo)) {
    throw ConfigError("config: mass interval must satisfy 0 < mass_lo < mass_hi");
  }
  if (!(theta0_lo_scale > 0.0 && theta0_lo_scale <= 1.0)) {
    throw ConfigError("config: theta0_lo_scale must lie in (0, 1]");
  }
  if (theta_star() < theta0_lo() - 1e-12 || theta_star() > theta0_hi() + 1e-12) {
    throw ConfigError("config: true parameter outside the initial set");
  }
  if (!(lambda > 0.0 && lambda < 1.0)) {
    throw ConfigError("config: lambda must lie in (0, 1)");
  }
  if (N < 1) throw ConfigError("config: horizon must be at least 1");
  if (run_length < 1) throw ConfigError("config: run length must be at least 1");
  if (mode != "adaptive" && mode != "robust-baseline") {
    throw ConfigError("config: mode must be adaptive or robust-baseline");
  }
  if (wind.profile != "off" && wind.profile != "constant" && wind.profile != "uniform") {
    throw ConfigError("config: wind profile must be off, constant or uniform");
  }
  if (wind.fraction < 0.0 || wind.fraction > 1.0) {
    throw ConfigError("config: wind fraction must lie in [0, 1]");
  }
  if (failure.enabled && !(failure.gamma >= 0.7 && failure.gamma <= 1.0)) {
    throw ConfigError("config: rotor efficiency after failure must lie in [0.7, 1]");
  }
  if (failure.dilate && !(failure.factor > 0.0 && failure.factor <= 1.0)) {
    throw ConfigError("config: dilation factor must lie in (0, 1]");
  }
  if (on_falsified != "abort" && on_falsified != "continue") {
    throw ConfigError("config: on_falsified must be abort or continue");
  }
  if (on_infeasible != "abort" && on_infeasible != "continue") {
    throw ConfigError("config: on_infeasible must be abort or continue");
  }
  const int pos_dims = model == "direct-12" ? 3 : 1;
  for (const auto& r : references) {
    if (static_cast<int>(r.value.size()) != pos_dims || r.step < 0) {
      throw ConfigError("config: reference entries need one value per position axis");
    }
  }
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["model"] = model;
  j["true_mass"] = true_mass;
  j["mass_lo"] = mass_lo;
  j["mass_hi"] = mass_hi;
  j["theta0_lo_scale"] = theta0_lo_scale;
  j["wind_speed"] = wind_speed;
  j["drag_coeff"] = drag_coeff;
  j["wind"] = {{"profile", wind.profile}, {"fraction", wind.fraction},
               {"direction", wind.direction}};
  j["noise"] = {{"enabled", noise.enabled}, {"pos", noise.pos}, {"vel", noise.vel},
                {"dilation", noise.dilation}};
  j["Q_diag"] = std::vector<double>(Q_diag.data(), Q_diag.data() + Q_diag.size());
  j["R_diag"] = std::vector<double>(R_diag.data(), R_diag.data() + R_diag.size());
  j["N"] = N;
  j["lambda"] = lambda;
  j["max_rows"] = max_rows;
  j["mode"] = mode;
  j["ss_update"] = ss_update;
  j["robustify_ss"] = robustify_ss;
  j["baseline_mass"] = baseline_mass;
  j["failure"] = {{"enabled", failure.enabled}, {"t_fail", failure.t_fail},
                  {"gamma", failure.gamma},     {"dilate", failure.dilate},
                  {"factor", failure.factor},
                  {"use_printed_min", failure.use_printed_min}};
  j["references"] = nlohmann::json::array();
  for (const auto& r : references) {
    j["references"].push_back({{"step", r.step}, {"value", r.value}});
  }
  j["run_length"] = run_length;
  j["seed"] = seed;
  j["on_falsified"] = on_falsified;
  j["on_infeasible"] = on_infeasible;
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.name = j.value("name", c.name);
  c.model = j.value("model", c.model);
  c.true_mass = j.value("true_mass", c.true_mass);
  c.mass_lo = j.value("mass_lo", c.mass_lo);
  c.mass_hi = j.value("mass_hi", c.mass_hi);
  c.theta0_lo_scale = j.value("theta0_lo_scale", c.theta0_lo_scale);
  c.wind_speed = j.value("wind_speed", c.wind_speed);
  c.drag_coeff = j.value("drag_coeff", c.drag_coeff);
  if (j.contains("wind")) {
    const auto& w = j.at("wind");
    c.wind.profile = w.value("profile", c.wind.profile);
    c.wind.fraction = w.value("fraction", c.wind.fraction);
    c.wind.direction = w.value("direction", c.wind.direction);
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    c.noise.enabled = n.value("enabled", c.noise.enabled);
    c.noise.pos = n.value("pos", c.noise.pos);
    c.noise.vel = n.value("vel", c.noise.vel);
    c.noise.dilation = n.value("dilation", c.noise.dilation);
  }
  if (j.contains("Q_diag")) {
    const auto v = j.at("Q_diag").get<std::vector<double>>();
    c.Q_diag = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
  }
  if (j.contains("R_diag")) {
    const auto v = j.at("R_diag").get<std::vector<double>>();
    c.R_diag = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<int>(v.size()));
  }
  c.N = j.value("N", c.N);
  c.lambda = j.value("lambda", c.lambda);
  c.max_rows = j.value("max_rows", c.max_rows);
  c.mode = j.value("mode", c.mode);
  c.ss_update = j.value("ss_update", c.ss_update);
  c.robustify_ss = j.value("robustify_ss", c.robustify_ss);
  c.baseline_mass = j.value("baseline_mass", c.baseline_mass);
  if (j.contains("failure")) {
    const auto& f = j.at("failure");
    c.failure.enabled = f.value("enabled", c.failure.enabled);
    c.failure.t_fail = f.value("t_fail", c.failure.t_fail);
    c.failure.gamma = f.value("gamma", c.failure.gamma);
    c.failure.dilate = f.value("dilate", c.failure.dilate);
    c.failure.factor = f.value("factor", c.failure.factor);
    c.failure.use_printed_min = f.value("use_printed_min", c.failure.use_printed_min);
  }
  if (j.contains("references")) {
    for (const auto& r : j.at("references")) {
      RefStep rs;
      rs.step = r.value("step", 0);
      rs.value = r.value("value", std::vector<double>{});
      c.references.push_back(rs);
    }
  }
  c.run_length = j.value("run_length", c.run_length);
  c.seed = j.value("seed", c.seed);
  c.on_falsified = j.value("on_falsified", c.on_falsified);
  c.on_infeasible = j.value("on_infeasible", c.on_infeasible);
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config: parse failure in " + path + ": " + e.what());
  }
  ScenarioConfig c = from_json(j);
  c.validate();
  return c;
}

std::string ScenarioConfig::content_hash() const {
  const std::string dump = to_json().dump();
  const std::uint64_t h = fnv1a(dump.data(), dump.size());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

std::string ScenarioConfig::synthesis_hash() const {
  nlohmann::json j;
  j["model"] = model;
  j["mass_lo"] = mass_lo;
  j["mass_hi"] = mass_hi;
  j["theta0_lo_scale"] = theta0_lo_scale;
  j["wind_speed"] = wind_speed;
  j["drag_coeff"] = drag_coeff;
  j["Q_diag"] = std::vector<double>(Q_diag.data(), Q_diag.data() + Q_diag.size());
  j["R_diag"] = std::vector<double>(R_diag.data(), R_diag.data() + R_diag.size());
  j["N"] = N;
  j["lambda"] = lambda;
  j["max_rows"] = max_rows;
  j["robustify_ss"] = robustify_ss;
  const std::string dump = j.dump();
  const std::uint64_t h = fnv1a(dump.data(), dump.size());
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace rampc
