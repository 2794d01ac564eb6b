#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyclf/certify.hpp"
#include "hyclf/disturbance.hpp"
#include "hyclf/pendulum.hpp"
#include "hyclf/sim.hpp"

namespace hyclf {

/// Configuration or usage defects map to process exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj,
                                const std::set<std::string>& allowed,
                                const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key))
      throw ConfigError("config: unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("config: bad value for \"" + key + "\"");
  }
}

inline Vec get_vec(const nlohmann::json& obj, const std::string& key,
                   const Vec& fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& arr = obj.at(key);
  if (!arr.is_array()) throw ConfigError("config: \"" + key + "\" must be an array");
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number())
      throw ConfigError("config: \"" + key + "\" must hold numbers");
    v[i] = arr[i].get<double>();
  }
  return v;
}

}  // namespace detail

enum class ModelKind { Pendulum, LinearSafety };
enum class ControllerKind { MinNorm, ClosedForm, Zero };

struct RclfOptions {
  double gamma_fraction = 1.0;
  double v_zero_tol = 1e-12;
  std::optional<double> u_sat;
};

struct DisturbanceConfig {
  DisturbanceKind kind = DisturbanceKind::Constant;
  Vec wc{Vec::Zero(2)};
  Vec wd{Vec::Zero(1)};
  double rate = 0.0;
  std::uint64_t seed = 1;
  bool stress = false;
};

struct SweepConfig {
  std::vector<Vec> wc_values;
  std::vector<Vec> wd_values;
};

struct VerifyConfig {
  Eigen::VectorXd state_lower, state_upper;
  std::vector<int> state_counts;
  int input_samples = 41;
  int dist_samples = 9;
  double tolerance = 1e-9;
  // safety-specific sampling budgets
  int candidate_samples = 1000;
  int boundary_samples = 2000;
  int perturbed_starts = 50;
  double horizon = 20.0;
  double sim_dt = 1e-3;
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

/// Parsed and validated run configuration (schema_version 1). Unknown keys
/// are rejected everywhere.
struct RunConfig {
  ModelKind model = ModelKind::Pendulum;
  PendulumParams params = PendulumParams::defaults();
  RclfOptions rclf;
  ControllerKind controller = ControllerKind::ClosedForm;
  SimLimits sim;
  Vec x0{(Vec(2) << 1.5707, 0.0).finished()};
  DisturbanceConfig disturbance;
  std::optional<SweepConfig> sweep;
  std::optional<VerifyConfig> verify;
  OutputConfig output;
};

inline RunConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  detail::reject_unknown_keys(j,
                              {"schema_version", "model", "params", "rclf",
                               "controller", "sim", "disturbance", "sweep",
                               "verify", "output"},
                              "top level");
  if (!j.contains("schema_version") || !j.at("schema_version").is_number_integer() ||
      j.at("schema_version").get<int>() != 1)
    throw ConfigError("config: schema_version must be 1");

  RunConfig cfg;

  const std::string model = detail::get_or<std::string>(j, "model", "pendulum");
  if (model == "pendulum") cfg.model = ModelKind::Pendulum;
  else if (model == "linear_safety") cfg.model = ModelKind::LinearSafety;
  else throw ConfigError("config: unknown model \"" + model + "\"");

  if (j.contains("params")) {
    const auto& p = j.at("params");
    detail::reject_unknown_keys(
        p, {"a", "b", "e0", "e1", "rho_tilde", "wbar1", "wbar2", "wd_max"},
        "params");
    cfg.params.a = detail::get_or(p, "a", cfg.params.a);
    cfg.params.b = detail::get_or(p, "b", cfg.params.b);
    cfg.params.e0 = detail::get_or(p, "e0", cfg.params.e0);
    cfg.params.e1 = detail::get_or(p, "e1", cfg.params.e1);
    cfg.params.rho_tilde = detail::get_or(p, "rho_tilde", cfg.params.rho_tilde);
    cfg.params.wbar1 = detail::get_or(p, "wbar1", cfg.params.wbar1);
    cfg.params.wbar2 = detail::get_or(p, "wbar2", cfg.params.wbar2);
    cfg.params.wd_max = detail::get_or(p, "wd_max", cfg.params.e1 - cfg.params.e0);
    if (!p.contains("wd_max")) cfg.params.wd_max = cfg.params.e1 - cfg.params.e0;
    try {
      cfg.params.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (j.contains("rclf")) {
    const auto& r = j.at("rclf");
    detail::reject_unknown_keys(r, {"gamma_fraction", "v_zero_tol", "u_sat"}, "rclf");
    cfg.rclf.gamma_fraction = detail::get_or(r, "gamma_fraction", 1.0);
    cfg.rclf.v_zero_tol = detail::get_or(r, "v_zero_tol", 1e-12);
    if (r.contains("u_sat") && !r.at("u_sat").is_null())
      cfg.rclf.u_sat = detail::get_or(r, "u_sat", 0.0);
  }

  const std::string ctrl = detail::get_or<std::string>(j, "controller", "closed_form");
  if (ctrl == "min_norm") cfg.controller = ControllerKind::MinNorm;
  else if (ctrl == "closed_form") cfg.controller = ControllerKind::ClosedForm;
  else if (ctrl == "zero") cfg.controller = ControllerKind::Zero;
  else throw ConfigError("config: unknown controller \"" + ctrl + "\"");

  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    detail::reject_unknown_keys(
        s, {"x0", "dt", "t_max", "j_max", "event_tol", "zeno_guard"}, "sim");
    cfg.x0 = detail::get_vec(s, "x0", cfg.x0);
    cfg.sim.dt = detail::get_or(s, "dt", cfg.sim.dt);
    cfg.sim.t_max = detail::get_or(s, "t_max", cfg.sim.t_max);
    cfg.sim.j_max = detail::get_or<std::int64_t>(s, "j_max", cfg.sim.j_max);
    cfg.sim.event_tol = detail::get_or(s, "event_tol", cfg.sim.event_tol);
    cfg.sim.zeno_guard = detail::get_or(s, "zeno_guard", cfg.sim.zeno_guard);
    try {
      cfg.sim.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (j.contains("disturbance")) {
    const auto& d = j.at("disturbance");
    detail::reject_unknown_keys(d, {"kind", "wc", "wd", "rate", "seed", "stress"},
                                "disturbance");
    const std::string kind = detail::get_or<std::string>(d, "kind", "constant");
    if (kind == "constant") cfg.disturbance.kind = DisturbanceKind::Constant;
    else if (kind == "rate_limited") cfg.disturbance.kind = DisturbanceKind::RateLimited;
    else if (kind == "adversarial") cfg.disturbance.kind = DisturbanceKind::Adversarial;
    else throw ConfigError("config: unknown disturbance kind \"" + kind + "\"");
    cfg.disturbance.wc = detail::get_vec(d, "wc", cfg.disturbance.wc);
    cfg.disturbance.wd = detail::get_vec(d, "wd", cfg.disturbance.wd);
    cfg.disturbance.rate = detail::get_or(d, "rate", 0.0);
    cfg.disturbance.seed = detail::get_or<std::uint64_t>(d, "seed", 1);
    cfg.disturbance.stress = detail::get_or(d, "stress", false);
  }

  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    detail::reject_unknown_keys(s, {"wc_values", "wd_values"}, "sweep");
    SweepConfig sw;
    const auto read_list = [](const nlohmann::json& arr, const char* what) {
      std::vector<Vec> out;
      if (!arr.is_array()) throw ConfigError(std::string("config: ") + what);
      for (const auto& e : arr) {
        if (!e.is_array()) throw ConfigError(std::string("config: ") + what);
        Vec v(e.size());
        for (std::size_t i = 0; i < e.size(); ++i) v[i] = e[i].get<double>();
        out.push_back(std::move(v));
      }
      return out;
    };
    if (s.contains("wc_values")) sw.wc_values = read_list(s.at("wc_values"), "sweep.wc_values must be an array of arrays");
    if (s.contains("wd_values")) sw.wd_values = read_list(s.at("wd_values"), "sweep.wd_values must be an array of arrays");
    cfg.sweep = std::move(sw);
  }

  if (j.contains("verify")) {
    const auto& v = j.at("verify");
    detail::reject_unknown_keys(
        v,
        {"state_lower", "state_upper", "state_counts", "input_samples",
         "dist_samples", "tolerance", "candidate_samples", "boundary_samples",
         "perturbed_starts", "horizon", "sim_dt"},
        "verify");
    VerifyConfig vc;
    vc.state_lower = detail::get_vec(v, "state_lower",
                                     (Vec(2) << -kHalfPi, -3.0).finished());
    vc.state_upper =
        detail::get_vec(v, "state_upper", (Vec(2) << kHalfPi, 3.0).finished());
    if (v.contains("state_counts")) {
      vc.state_counts.clear();
      for (const auto& c : v.at("state_counts"))
        vc.state_counts.push_back(c.get<int>());
    } else {
      vc.state_counts = {201, 201};
    }
    vc.input_samples = detail::get_or(v, "input_samples", 41);
    vc.dist_samples = detail::get_or(v, "dist_samples", 9);
    vc.tolerance = detail::get_or(v, "tolerance", 1e-9);
    vc.candidate_samples = detail::get_or(v, "candidate_samples", 1000);
    vc.boundary_samples = detail::get_or(v, "boundary_samples", 2000);
    vc.perturbed_starts = detail::get_or(v, "perturbed_starts", 50);
    vc.horizon = detail::get_or(v, "horizon", 20.0);
    vc.sim_dt = detail::get_or(v, "sim_dt", 1e-3);
    cfg.verify = std::move(vc);
  }

  if (j.contains("output")) {
    const auto& o = j.at("output");
    detail::reject_unknown_keys(o, {"directory", "formats"}, "output");
    cfg.output.directory = detail::get_or<std::string>(o, "directory", "out");
    if (o.contains("formats")) {
      cfg.output.csv = false;
      cfg.output.json = false;
      for (const auto& f : o.at("formats")) {
        const std::string fs = f.get<std::string>();
        if (fs == "csv") cfg.output.csv = true;
        else if (fs == "json") cfg.output.json = true;
        else throw ConfigError("config: unknown output format \"" + fs + "\"");
      }
    }
  }

  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace hyclf
