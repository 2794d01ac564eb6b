#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyclf/arc.hpp"
#include "hyclf/certify.hpp"
#include "hyclf/config.hpp"
#include "hyclf/model_checks.hpp"
#include "hyclf/pendulum.hpp"
#include "hyclf/safety.hpp"
#include "hyclf/sim.hpp"
#include "hyclf/svg.hpp"

namespace hyclf {

/// Convergence threshold used in sweep summaries: first t with |x| <= 0.05.
/// An artifact bookkeeping choice, recorded in the summary metadata.
inline constexpr double kConvergenceRadius = 0.05;

struct RunContext {
  HybridSystemModel model;
  Rclf rclf;
  Controller controller;
  bool has_rclf = false;
};

namespace detail {

inline double max_coeff_or(const std::vector<Vec>& vs, double fallback) {
  double m = fallback;
  for (const auto& v : vs)
    if (v.size() > 0) m = std::max(m, v.maxCoeff());
  return m;
}

}  // namespace detail

/// Builds the model, RCLF, and controller for a config. The stress flag
/// enlarges the admissible jump-disturbance interval to cover the applied
/// values; certification always keeps the declared bound.
inline RunContext make_context(const RunConfig& cfg) {
  RunContext ctx;
  if (cfg.model == ModelKind::Pendulum) {
    std::optional<double> wd_admit;
    if (cfg.disturbance.stress) {
      double hi = cfg.disturbance.wd.size() ? cfg.disturbance.wd.maxCoeff() : 0.0;
      if (cfg.sweep) hi = std::max(hi, detail::max_coeff_or(cfg.sweep->wd_values, hi));
      wd_admit = hi;
    }
    ctx.model = make_pendulum(cfg.params, wd_admit);
    ctx.rclf = pendulum_rclf(cfg.params);
    ctx.rclf.gamma_fraction = cfg.rclf.gamma_fraction;
    ctx.rclf.v_zero_tol = cfg.rclf.v_zero_tol;
    ctx.rclf.u_sat = cfg.rclf.u_sat;
    ctx.has_rclf = true;
    switch (cfg.controller) {
      case ControllerKind::ClosedForm:
        ctx.controller = make_closed_form_controller(cfg.params);
        break;
      case ControllerKind::Zero:
        ctx.controller = make_zero_controller(ctx.model);
        break;
      case ControllerKind::MinNorm:
        // bound to the context's model/rclf; the context owns them
        ctx.controller.name = "min_norm";
        break;
    }
  } else {
    // the safety fixture as a pure-flow hybrid model (empty jump set)
    const BarrierProblem p = make_linear_safety_problem();
    ctx.model.name = "linear_safety";
    ctx.model.n = 2;
    ctx.model.m_c = 0;
    ctx.model.m_d = 0;
    ctx.model.d_c = 0;
    ctx.model.d_d = 0;
    ctx.model.flow_set = [](const Vec&, const Vec&, const Vec&) { return true; };
    ctx.model.jump_set = [](const Vec&, const Vec&, const Vec&) { return false; };
    ctx.model.flow_map = [F = p.F](const Vec& x, const Vec&, const Vec&) {
      return F(x);
    };
    ctx.model.jump_map = [](const Vec& x, const Vec&, const Vec&) { return x; };
    ctx.model.input_box_flow = [](const Vec&) {
      return InputBox::bounds(Vec(0), Vec(0));
    };
    ctx.model.input_box_jump = [](const Vec&) { return InputBox::empty_box(0); };
    ctx.model.dist_box_flow = [](const Vec&) {
      return InputBox::bounds(Vec(0), Vec(0));
    };
    ctx.model.dist_box_jump = [](const Vec&) { return InputBox::empty_box(0); };
    ctx.rclf.V = [B = p.B](const Vec& x) { return B(x) + 12.0; };  // W itself
    ctx.controller = make_zero_controller(ctx.model);
  }
  return ctx;
}

inline DisturbanceGenerator make_generator(const RunConfig& cfg, const RunContext& ctx,
                                           std::optional<std::uint64_t> seed_override,
                                           std::optional<Vec> wc = {},
                                           std::optional<Vec> wd = {}) {
  const std::uint64_t seed = seed_override.value_or(cfg.disturbance.seed);
  switch (cfg.disturbance.kind) {
    case DisturbanceKind::Constant:
      return DisturbanceGenerator::constant(wc.value_or(cfg.disturbance.wc),
                                            wd.value_or(cfg.disturbance.wd));
    case DisturbanceKind::RateLimited: {
      auto g = DisturbanceGenerator::rate_limited(cfg.disturbance.rate, seed);
      return g;
    }
    case DisturbanceKind::Adversarial:
      if (!ctx.has_rclf)
        throw ConfigError("config: adversarial disturbance needs an RCLF model");
      return DisturbanceGenerator::adversarial(ctx.rclf.V, ctx.rclf.gradV);
  }
  throw ConfigError("config: bad disturbance kind");
}

struct RunArtifacts {
  HybridArc arc;
  TerminationStatus status;
  LyapunovTrace lyapunov;
  double convergence_time = -1.0;  // first t with |x| <= kConvergenceRadius
  std::int64_t jumps = 0;
};

inline RunArtifacts execute_run(const RunConfig& cfg, const RunContext& ctx,
                                const Controller& controller,
                                const DisturbanceGenerator& gen) {
  RunArtifacts out;
  const auto V = ctx.has_rclf || ctx.model.name == "linear_safety"
                     ? ctx.rclf.V
                     : std::function<double(const Vec&)>{};
  SimResult res = simulate(ctx.model, controller, gen, cfg.x0, cfg.sim, V);
  out.arc = std::move(res.arc);
  out.status = res.status;
  out.jumps = out.status.final_time.j;
  if (V) out.lyapunov = lyapunov_trace(out.arc, V);
  for (const auto& s : out.arc.samples) {
    if (s.x.norm() <= kConvergenceRadius) {
      out.convergence_time = s.t;
      break;
    }
  }
  return out;
}

inline nlohmann::json run_summary_json(const RunConfig& cfg, const RunArtifacts& run) {
  nlohmann::json final_state = nlohmann::json::array();
  if (!run.arc.empty())
    for (Eigen::Index i = 0; i < run.arc.back().x.size(); ++i)
      final_state.push_back(run.arc.back().x[i]);
  return {
      {"schema_version", 1},
      {"model", cfg.model == ModelKind::Pendulum ? "pendulum" : "linear_safety"},
      {"termination",
       {{"reason", to_string(run.status.reason)},
        {"t", run.status.final_time.t},
        {"j", run.status.final_time.j}}},
      {"jumps", run.jumps},
      {"final_state", final_state},
      {"v_monotone",
       {{"flow_violations", run.lyapunov.flow_violations},
        {"jump_violations", run.lyapunov.jump_violations},
        {"worst_flow_increase", run.lyapunov.worst_flow_increase},
        {"worst_jump_increase", run.lyapunov.worst_jump_increase},
        {"verdict", run.lyapunov.monotone() ? "monotone" : "violations"}}},
      {"convergence",
       {{"radius", kConvergenceRadius},
        {"time", run.convergence_time},
        {"reached", run.convergence_time >= 0.0}}},
  };
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  f << text;
}

/// simulate subcommand: one arc CSV plus a summary JSON.
inline int run_simulate(const RunConfig& cfg, const std::string& out_dir,
                        std::optional<std::uint64_t> seed_override) {
  const RunContext ctx = make_context(cfg);
  Controller controller = ctx.controller;
  if (cfg.model == ModelKind::Pendulum && cfg.controller == ControllerKind::MinNorm)
    controller = make_min_norm_controller(ctx.model, ctx.rclf);
  const DisturbanceGenerator gen = make_generator(cfg, ctx, seed_override);
  const RunArtifacts run = execute_run(cfg, ctx, controller, gen);

  std::filesystem::create_directories(out_dir);
  if (cfg.output.csv)
    write_arc_csv(run.arc, out_dir + "/arc.csv");
  if (cfg.output.json)
    write_text(out_dir + "/summary.json", run_summary_json(cfg, run).dump(2) + "\n");
  return 0;
}

/// sweep subcommand: one run per configured disturbance value pair, CSVs
/// plus a sweep summary with convergence times and a soft monotonicity
/// trend (reported, never asserted).
inline int run_sweep(const RunConfig& cfg, const std::string& out_dir,
                     std::optional<std::uint64_t> seed_override) {
  if (!cfg.sweep || (cfg.sweep->wc_values.empty() && cfg.sweep->wd_values.empty()))
    throw ConfigError("config: sweep block with values is required");
  if (cfg.disturbance.kind != DisturbanceKind::Constant)
    throw ConfigError("config: sweeps use constant disturbances");

  std::vector<Vec> wcs = cfg.sweep->wc_values;
  std::vector<Vec> wds = cfg.sweep->wd_values;
  if (wcs.empty()) wcs.push_back(cfg.disturbance.wc);
  if (wds.empty()) wds.push_back(cfg.disturbance.wd);

  const RunContext ctx = make_context(cfg);
  Controller controller = ctx.controller;
  if (cfg.model == ModelKind::Pendulum && cfg.controller == ControllerKind::MinNorm)
    controller = make_min_norm_controller(ctx.model, ctx.rclf);

  std::filesystem::create_directories(out_dir);
  nlohmann::json runs = nlohmann::json::array();
  std::vector<double> conv_times;
  int idx = 0;
  for (const auto& wc : wcs) {
    for (const auto& wd : wds) {
      const DisturbanceGenerator gen =
          make_generator(cfg, ctx, seed_override, wc, wd);
      const RunArtifacts run = execute_run(cfg, ctx, controller, gen);
      char name[32];
      std::snprintf(name, sizeof(name), "run_%03d", idx);
      if (cfg.output.csv)
        write_arc_csv(run.arc, out_dir + "/" + name + ".csv");
      nlohmann::json entry = run_summary_json(cfg, run);
      entry["run"] = name;
      nlohmann::json jwc = nlohmann::json::array(), jwd = nlohmann::json::array();
      for (Eigen::Index i = 0; i < wc.size(); ++i) jwc.push_back(wc[i]);
      for (Eigen::Index i = 0; i < wd.size(); ++i) jwd.push_back(wd[i]);
      entry["wc"] = jwc;
      entry["wd"] = jwd;
      runs.push_back(std::move(entry));
      conv_times.push_back(run.convergence_time);
      ++idx;
    }
  }

  bool trend_nondecreasing = true;
  for (std::size_t i = 1; i < conv_times.size(); ++i) {
    if (conv_times[i] >= 0 && conv_times[i - 1] >= 0 &&
        conv_times[i] < conv_times[i - 1])
      trend_nondecreasing = false;
  }
  const nlohmann::json summary = {
      {"schema_version", 1},
      {"convergence_radius", kConvergenceRadius},
      {"runs", runs},
      {"convergence_trend_nondecreasing", trend_nondecreasing},
  };
  if (cfg.output.json)
    write_text(out_dir + "/sweep_summary.json", summary.dump(2) + "\n");
  return 0;
}

/// verify-rclf subcommand. Exit 0 when certified (a degenerate decrease
/// rate is a flagged pass), 1 on violations.
inline int run_verify_rclf(const RunConfig& cfg, const std::string& out_dir) {
  if (cfg.model != ModelKind::Pendulum)
    throw ConfigError("config: verify-rclf needs the pendulum model");
  if (!cfg.verify) throw ConfigError("config: verify block is required");
  const RunContext ctx = make_context(cfg);
  GridSpec grid;
  grid.state_lower = cfg.verify->state_lower;
  grid.state_upper = cfg.verify->state_upper;
  grid.state_counts = cfg.verify->state_counts;
  grid.input_samples = cfg.verify->input_samples;
  grid.dist_samples = cfg.verify->dist_samples;
  grid.tol = cfg.verify->tolerance;
  const VerificationReport rep = certify_rclf(ctx.model, ctx.rclf, grid);

  std::filesystem::create_directories(out_dir);
  nlohmann::json j = to_json(rep);
  j["model"] = "pendulum";
  j["lambda"] = lambda_const(cfg.params).value;
  write_text(out_dir + "/verify_rclf.json", j.dump(2) + "\n");
  std::printf("verify-rclf: %s\n", rep.all_passed() ? "pass" : "fail");
  return rep.all_passed() ? 0 : 1;
}

/// verify-safety subcommand over the linear fixture.
inline int run_verify_safety(const RunConfig& cfg, const std::string& out_dir,
                             std::optional<std::uint64_t> seed_override) {
  if (cfg.model != ModelKind::LinearSafety)
    throw ConfigError("config: verify-safety needs model \"linear_safety\"");
  if (!cfg.verify) throw ConfigError("config: verify block is required");
  const VerifyConfig& v = *cfg.verify;
  const std::uint64_t seed = seed_override.value_or(cfg.disturbance.seed);

  const BarrierProblem problem = make_linear_safety_problem();
  VerificationReport rep = barrier_candidate_check(problem, v.candidate_samples, seed);
  const VerificationReport dec =
      strict_decrease_boundary(problem, v.boundary_samples, seed + 1);
  rep.conditions.insert(rep.conditions.end(), dec.conditions.begin(),
                        dec.conditions.end());

  const double eps = uniform_margin(problem, v.boundary_samples, seed + 2);

  std::vector<Vec> starts;
  Rng rng(seed + 3);
  for (int k = 0; k < v.perturbed_starts; ++k)
    starts.push_back(0.995 * problem.sampler_boundary(rng));
  const ContainmentReport cont =
      simulate_perturbed(problem, eps, starts, v.horizon, v.sim_dt);

  ConditionReport margin_cond;
  margin_cond.condition = "uniform_margin_positive";
  margin_cond.points_checked = v.boundary_samples;
  margin_cond.worst_margin = eps;
  if (eps <= 0.0)
    margin_cond.violations.push_back({Vec::Zero(2), "boundary", eps});
  rep.conditions.push_back(margin_cond);

  ConditionReport cont_cond;
  cont_cond.condition = "perturbed_containment";
  cont_cond.points_checked = cont.trajectories;
  cont_cond.worst_margin = -cont.worst_B;
  if (!cont.all_contained())
    cont_cond.violations.push_back({cont.worst_x, "trajectory", -cont.worst_B});
  if (cont.gradient_fallback) cont_cond.flags.push_back("gradient_fallback");
  rep.conditions.push_back(cont_cond);

  std::filesystem::create_directories(out_dir);
  nlohmann::json j = to_json(rep);
  j["model"] = "linear_safety";
  j["uniform_margin"] = eps;
  write_text(out_dir + "/verify_safety.json", j.dump(2) + "\n");
  std::printf("verify-safety: %s (margin %.6g)\n",
              rep.all_passed() ? "pass" : "fail", eps);
  return rep.all_passed() ? 0 : 1;
}

/// plot subcommand over emitted arc CSVs.
inline int run_plot(const std::vector<std::string>& arc_paths, PlotView view,
                    const std::string& out_path) {
  std::vector<HybridArc> arcs;
  arcs.reserve(arc_paths.size());
  for (const auto& p : arc_paths) {
    try {
      arcs.push_back(read_arc_csv(p));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("plot: ") + e.what());
    }
  }
  emit_plot(arcs, view, out_path);
  return 0;
}

}  // namespace hyclf
