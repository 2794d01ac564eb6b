#pragma once

#include <Eigen/Core>
#include <cmath>
#include <future>
#include <thread>
#include <vector>

#include "hyclf/extended_real.hpp"
#include "hyclf/model.hpp"
#include "hyclf/rclf.hpp"
#include "hyclf/report.hpp"

namespace hyclf {

/// Rectangular state grid plus sampling resolutions for the inner input and
/// disturbance problems, and the inequality tolerance.
struct GridSpec {
  Eigen::VectorXd state_lower, state_upper;
  std::vector<int> state_counts;
  int input_samples = 41;   // inner minimization over u (bounded coordinates)
  int dist_samples = 9;     // disturbance grid per coordinate
  double tol = 1e-9;
  double input_span = 50.0;  // truncation for unbounded input coordinates

  void validate() const {
    if (state_lower.size() != state_upper.size() ||
        static_cast<std::size_t>(state_lower.size()) != state_counts.size())
      throw std::invalid_argument("GridSpec: inconsistent dimensions");
    for (int c : state_counts)
      if (c < 2) throw std::invalid_argument("GridSpec: counts must be >= 2");
  }

  std::size_t total_points() const {
    std::size_t n = 1;
    for (int c : state_counts) n *= c;
    return n;
  }

  Eigen::VectorXd point(std::size_t flat) const {
    Eigen::VectorXd x(state_lower.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const int c = state_counts[i];
      const std::size_t k = flat % c;
      flat /= c;
      x[i] = state_lower[i] +
             (state_upper[i] - state_lower[i]) * static_cast<double>(k) / (c - 1);
    }
    return x;
  }
};

/// inf over u_c in Psi^u_c(x) of sup over w of <gradV, F(x,u_c,w)>.
/// Affine dependence on u (probed) makes the inf exact: -inf along any
/// unbounded coordinate with nonzero slope, corner value otherwise; the
/// fallback minimizes over a sampled input grid.
inline ExtendedReal flow_condition_value(const HybridSystemModel& model,
                                         const Rclf& rclf, const Vec& x,
                                         int input_samples = 41,
                                         int dist_samples = 9,
                                         double input_span = 50.0) {
  const InputBox ubox = model.input_box_flow(x);
  const InputBox wbox = model.dist_box_flow(x);
  if (ubox.empty() || wbox.empty())
    throw std::domain_error("flow_condition_value: x outside Pi_c(C)");
  const Vec g = rclf.gradV(x);
  const auto phi = [&](const Vec& u) {
    return detail::sup_over_box(
        [&](const Vec& w) { return g.dot(model.flow_map(x, u, w)); }, wbox,
        dist_samples);
  };

  const auto probe = detail::probe_affine(phi, ubox);
  if (probe.affine) {
    const Vec u0 = ubox.min_norm_point();
    double value = probe.a;
    for (Eigen::Index i = 0; i < ubox.dim(); ++i) {
      const double b = probe.b[i];
      if (std::abs(b) < 1e-12) {
        value += b * u0[i];
        continue;
      }
      const double edge = b > 0 ? ubox.lower()[i] : ubox.upper()[i];
      if (!std::isfinite(edge)) return ExtendedReal::neg_infinity();
      value += b * edge;
    }
    return ExtendedReal(value);
  }

  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : detail::truncated(ubox, input_span).grid(input_samples))
    best = std::min(best, phi(u));
  return ExtendedReal(best);
}

/// inf over u_d in Psi^u_d(x) of sup over w of V(G(x,u_d,w)) - V(x), by
/// scanning a u_d grid that always contains the box endpoints.
inline ExtendedReal jump_condition_value(const HybridSystemModel& model,
                                         const Rclf& rclf, const Vec& x,
                                         int input_samples = 41,
                                         int dist_samples = 9,
                                         double input_span = 50.0,
                                         Vec* arg_min = nullptr) {
  const InputBox ubox = model.input_box_jump(x);
  const InputBox wbox = model.dist_box_jump(x);
  if (ubox.empty() || wbox.empty())
    throw std::domain_error("jump_condition_value: x outside Pi_d(D)");
  const double vx = rclf.V(x);
  const auto phi = [&](const Vec& u) {
    return detail::sup_over_box(
        [&](const Vec& w) { return rclf.V(model.jump_map(x, u, w)) - vx; }, wbox,
        dist_samples);
  };
  double best = std::numeric_limits<double>::infinity();
  Vec best_u;
  for (const auto& u : detail::truncated(ubox, input_span).grid(input_samples)) {
    const double v = phi(u);
    if (v < best) {
      best = v;
      best_u = u;
    }
  }
  if (arg_min) *arg_min = best_u;
  return ExtendedReal(best);
}

/// Grid certification of the RCLF inequalities:
///  (i)   alpha1(|x|_A) <= V(x) <= alpha2(|x|_A) on the sampled
///        Pi_c(C) u Pi_d(D) u G(D);
///  (ii)  inf_u sup_w <gradV, F> <= -alpha3(|x|_A) + tol on the sampled flow
///        projection;
///  (iii) inf_u sup_w V(G) - V(x) <= -alpha3(|x|_A) + tol on the sampled
///        jump projection.
/// Grid points are evaluated concurrently; findings reduce in grid order.
inline VerificationReport certify_rclf(const HybridSystemModel& model,
                                       const Rclf& rclf, const GridSpec& grid) {
  grid.validate();
  VerificationReport rep;
  ConditionReport bounds;
  bounds.condition = "bounds";
  ConditionReport flow;
  flow.condition = "flow_decrease";
  ConditionReport jump;
  jump.condition = "jump_decrease";
  if (rclf.degenerate_rate) {
    rep.flags.push_back("degenerate_rate");
    flow.flags.push_back("degenerate_rate");
    jump.flags.push_back("degenerate_rate");
  }

  struct PointFinding {
    bool in_c = false, in_d = false;
    double bound_margin = std::numeric_limits<double>::infinity();
    Vec bound_worst_x;
    bool has_flow = false, has_jump = false;
    double flow_margin = 0.0, jump_margin = 0.0;
  };

  const std::size_t total = grid.total_points();
  std::vector<PointFinding> findings(total);

  const auto eval_point = [&](std::size_t k) {
    PointFinding f;
    const Vec x = grid.point(k);
    f.in_c = in_flow_projection(model, x);
    f.in_d = in_jump_projection(model, x);
    const auto bound_check = [&](const Vec& xq) {
      const double d = rclf.dist_A(xq);
      const double v = rclf.V(xq);
      const double m = std::min(v - rclf.alpha1(d), rclf.alpha2(d) - v);
      if (m < f.bound_margin) {
        f.bound_margin = m;
        f.bound_worst_x = xq;
      }
    };
    if (f.in_c || f.in_d) bound_check(x);
    if (f.in_c && rclf.V(x) >= rclf.r_star) {
      const ExtendedReal val = flow_condition_value(
          model, rclf, x, grid.input_samples, grid.dist_samples, grid.input_span);
      f.has_flow = true;
      f.flow_margin = val.is_neg_inf()
                          ? std::numeric_limits<double>::infinity()
                          : -rclf.alpha3(rclf.dist_A(x)) - val.value();
    }
    if (f.in_d && rclf.V(x) >= rclf.r_star) {
      const InputBox wb = model.dist_box_jump(x);
      const ExtendedReal val = jump_condition_value(
          model, rclf, x, grid.input_samples, grid.dist_samples, grid.input_span);
      f.has_jump = true;
      f.jump_margin = -rclf.alpha3(rclf.dist_A(x)) - val.value();
      // images of the sampled jumps also belong to the bound check
      for (const auto& u : model.input_box_jump(x).grid(grid.input_samples)) {
        for (const auto& w : wb.vertices()) bound_check(model.jump_map(x, u, w));
      }
    }
    return f;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (hw > 1 && total > 1024) {
    const std::size_t chunk = (total + hw - 1) / hw;
    std::vector<std::future<void>> futs;
    for (unsigned c = 0; c < hw; ++c) {
      const std::size_t lo = c * chunk, hi = std::min(total, lo + chunk);
      futs.push_back(std::async(std::launch::async, [&, lo, hi] {
        for (std::size_t k = lo; k < hi; ++k) findings[k] = eval_point(k);
      }));
    }
    for (auto& fu : futs) fu.get();
  } else {
    for (std::size_t k = 0; k < total; ++k) findings[k] = eval_point(k);
  }

  for (std::size_t k = 0; k < total; ++k) {
    const auto& f = findings[k];
    if (f.in_c || f.in_d)
      bounds.record(f.bound_worst_x, "bounds", f.bound_margin, grid.tol);
    if (f.has_flow) flow.record(grid.point(k), "flow", f.flow_margin, grid.tol);
    if (f.has_jump) jump.record(grid.point(k), "jump", f.jump_margin, grid.tol);
  }

  rep.conditions = {bounds, flow, jump};
  return rep;
}

}  // namespace hyclf
