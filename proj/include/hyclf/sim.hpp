#pragma once

#include <Eigen/Core>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hyclf/arc.hpp"
#include "hyclf/disturbance.hpp"
#include "hyclf/model.hpp"

namespace hyclf {

struct SimLimits {
  double t_max = 10.0;
  std::int64_t j_max = 1000;
  double dt = 1e-3;
  double event_tol = 1e-8;
  double zeno_guard = 50.0;  // max jumps per second of flow time

  void validate() const {
    if (dt <= 0) throw std::invalid_argument("SimLimits: dt must be > 0");
    if (event_tol <= 0) throw std::invalid_argument("SimLimits: event_tol must be > 0");
    if (t_max <= 0) throw std::invalid_argument("SimLimits: t_max must be > 0");
    if (j_max < 0) throw std::invalid_argument("SimLimits: j_max must be >= 0");
    if (zeno_guard <= 0) throw std::invalid_argument("SimLimits: zeno_guard must be > 0");
  }
};

enum class StopReason { HorizonT, HorizonJ, LeftCAndD, ZenoGuard, NumericalFailure };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::HorizonT: return "horizon_t";
    case StopReason::HorizonJ: return "horizon_j";
    case StopReason::LeftCAndD: return "left_C_and_D";
    case StopReason::ZenoGuard: return "zeno_guard";
    case StopReason::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct TerminationStatus {
  StopReason reason = StopReason::HorizonT;
  HybridTime final_time;
  std::string detail;
};

/// Classical RK4 step of xdot = flow_fn(x, u_c, w_c) with the inputs held
/// constant over the step.
inline Vec rk4_step(const SystemMap& flow_fn, const Vec& x, const Vec& u_c,
                    const Vec& w_c, double dt) {
  if (dt <= 0) throw std::invalid_argument("rk4_step: dt must be > 0");
  const Vec k1 = flow_fn(x, u_c, w_c);
  const Vec k2 = flow_fn(x + 0.5 * dt * k1, u_c, w_c);
  const Vec k3 = flow_fn(x + 0.5 * dt * k2, u_c, w_c);
  const Vec k4 = flow_fn(x + dt * k3, u_c, w_c);
  Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NumericalError("rk4_step: non-finite state", x);
  return out;
}

/// RK4 step of an autonomous field x -> f(x).
inline Vec rk4_field_step(const std::function<Vec(const Vec&)>& f, const Vec& x,
                          double dt) {
  const Vec k1 = f(x);
  const Vec k2 = f(x + 0.5 * dt * k1);
  const Vec k3 = f(x + 0.5 * dt * k2);
  const Vec k4 = f(x + dt * k3);
  Vec out = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!out.allFinite()) throw NumericalError("rk4_field_step: non-finite state", x);
  return out;
}

namespace detail {

struct EventBracket {
  double t_lo, t_hi;
  Vec x_lo, x_hi;  // guard false at lo, true at hi, |x_hi - x_lo| <= tol
};

/// Bisection on the step fraction; states probed by integrating partial
/// steps from (t_lo, x_lo).
inline EventBracket locate_bracket(const std::function<Vec(const Vec&)>& field,
                                   const std::function<bool(const Vec&)>& guard,
                                   double t_lo, const Vec& x_lo, double t_hi,
                                   const Vec& x_hi, double event_tol) {
  if (guard(x_lo))
    throw std::logic_error("locate_event: guard already true at t_lo");
  if (!guard(x_hi))
    throw std::logic_error("locate_event: guard not true at t_hi");
  EventBracket br{t_lo, t_hi, x_lo, x_hi};
  const double t0 = t_lo;
  const Vec x0 = x_lo;
  for (int iter = 0; iter < 200 && (br.x_hi - br.x_lo).norm() > event_tol; ++iter) {
    const double m = 0.5 * (br.t_lo + br.t_hi);
    Vec xm = m > t0 ? rk4_field_step(field, x0, m - t0) : x0;
    if (guard(xm)) {
      br.t_hi = m;
      br.x_hi = std::move(xm);
    } else {
      br.t_lo = m;
      br.x_lo = std::move(xm);
    }
  }
  return br;
}

}  // namespace detail

/// Locates the first guard crossing inside one integration step and returns
/// the first post-crossing point (t*, x*); the located state lies within
/// event_tol (Euclidean) of the guard boundary. Preconditions: guard is
/// false at (t_lo, x_lo) and true at (t_hi, x_hi).
inline std::pair<double, Vec> locate_event(
    const std::function<Vec(const Vec&)>& field,
    const std::function<bool(const Vec&)>& guard, double t_lo, const Vec& x_lo,
    double t_hi, const Vec& x_hi, double event_tol) {
  const auto br =
      detail::locate_bracket(field, guard, t_lo, x_lo, t_hi, x_hi, event_tol);
  return {br.t_hi, br.x_hi};
}

struct SimResult {
  HybridArc arc;
  TerminationStatus status;
};

/// Integrates the closed-loop hybrid system from x0.
///
/// Semantics:
///  - Jump priority: whenever the closed-loop state satisfies the jump
///    condition (for some admissible w_d), the jump is taken.
///  - Flow intervals use fixed-step RK4 of the closed-loop field; the
///    feedback is re-evaluated at RK4 stage states, the disturbance is
///    sampled at step start and held across the step.
///  - Entries into the jump set inside a step are located by bisection; the
///    boundary residual of every located event is <= event_tol.
///  - Set membership is granted up to event_tol via axis probes, so
///    post-jump states a hair outside the closed flow set still flow.
///  - x0 outside both sets terminates immediately (left_C_and_D, empty arc).
inline SimResult simulate(const HybridSystemModel& model, const Controller& ctrl,
                          DisturbanceGenerator gen, const Vec& x0,
                          const SimLimits& limits,
                          const std::function<double(const Vec&)>& V = {}) {
  limits.validate();
  if (x0.size() != model.n) throw std::invalid_argument("simulate: bad x0 dimension");

  SimResult res;
  HybridArc& arc = res.arc;
  arc.n = model.n;
  arc.m_c = model.m_c;
  arc.m_d = model.m_d;
  arc.d_c = model.d_c;
  arc.d_d = model.d_d;

  gen.reset(model, x0);

  const auto vee = [&V](const Vec& x) { return V ? V(x) : 0.0; };
  const Vec zc = Vec::Zero(model.m_c), zd = Vec::Zero(model.m_d);
  const Vec zwc = Vec::Zero(model.d_c), zwd = Vec::Zero(model.d_d);

  double t = 0.0;
  std::int64_t j = 0;
  Vec x = x0;
  std::deque<double> recent_jump_times;

  // jump possible at xq for the closed-loop input and some admissible w_d
  const auto jump_ready = [&](const Vec& xq) {
    const InputBox wb = model.dist_box_jump(xq);
    if (wb.empty()) return false;
    return jump_allowed(model, xq, ctrl.jump_law(xq), wb.min_norm_point());
  };

  // flow-set membership, inflated by event_tol axis probes
  const auto flow_ok_tol = [&](const Vec& xq, const Vec& u, const Vec& w) {
    if (flow_allowed(model, xq, u, w)) return true;
    for (int i = 0; i < model.n; ++i) {
      for (double sgn : {1.0, -1.0}) {
        Vec xp = xq;
        xp[i] += sgn * limits.event_tol;
        if (flow_allowed(model, xp, u, w)) return true;
      }
    }
    return false;
  };

  // membership variant probing the min-norm disturbance (no generator draw)
  const auto flow_memb_tol = [&](const Vec& xq) {
    const InputBox wb = model.dist_box_flow(xq);
    if (wb.empty()) return false;
    return flow_ok_tol(xq, ctrl.flow_law(xq), wb.min_norm_point());
  };

  // jump priority, except that a jump whose image equals the state exactly
  // (an equilibrium of G, e.g. the target set) defers to flow when flowing
  // is possible; otherwise such points would jump in place forever
  const auto jump_effective = [&](const Vec& xq) {
    if (!jump_ready(xq)) return false;
    const Vec probe = model.jump_map(xq, ctrl.jump_law(xq),
                                     model.dist_box_jump(xq).min_norm_point());
    const bool noop = (probe.array() == xq.array()).all();
    return !(noop && flow_memb_tol(xq));
  };

  arc.domain.start(0.0, 0);
  bool recorded_any = false;

  // --- switching-surface support (Filippov sliding) ---
  // A flow law discontinuous across a declared surface makes plain RK4
  // chatter; crossings are located like events, and while the surface
  // attracts from both sides the convex-combination sliding field is
  // integrated instead, with a Newton projection holding the state on the
  // surface.
  int sliding_on = -1;
  const auto grad_fd = [](const std::function<double(const Vec&)>& f, const Vec& xq) {
    const double hh = 1e-7 * std::max(1.0, xq.norm());
    Vec g(xq.size());
    for (Eigen::Index i = 0; i < xq.size(); ++i) {
      Vec a = xq, b = xq;
      a[i] += hh;
      b[i] -= hh;
      g[i] = (f(a) - f(b)) / (2.0 * hh);
    }
    return g;
  };
  const auto probe_dist = [&](const Vec& xq) {
    return std::min(1e-3, std::max(100.0 * limits.event_tol, 2.0 * xq.squaredNorm()));
  };
  // one-sided normal derivatives of the surface along the closed-loop field
  struct SideRates {
    double gp, gm;
    Vec fp, fm;
  };
  const auto side_rates = [&](const std::function<Vec(const Vec&)>& fld,
                              const std::function<double(const Vec&)>& sigma,
                              const Vec& xq) {
    const Vec n = grad_fd(sigma, xq);
    const double nn = n.norm();
    Vec nh = nn > 1e-14 ? Vec(n / nn) : Vec(Vec::Unit(xq.size(), 0));
    // probes always straddle the surface, also for states sitting off it
    const double off = nn > 1e-14 ? std::abs(sigma(xq)) / nn : 0.0;
    const double d = std::max(probe_dist(xq), 2.0 * off);
    SideRates r;
    r.fp = fld(xq + d * nh);
    r.fm = fld(xq - d * nh);
    r.gp = nh.dot(r.fp);
    r.gm = nh.dot(r.fm);
    return r;
  };
  const auto attracting = [](const SideRates& r) { return r.gp < 0.0 && r.gm > 0.0; };

  try {
    while (true) {
      if (jump_effective(x)) {
        if (j >= limits.j_max) {
          res.status = {StopReason::HorizonJ, {t, j}, ""};
          if (!recorded_any)
            arc.samples.push_back({t, j, SampleKind::Flow, x, zc, zd, zwc, zwd, vee(x)});
          break;
        }
        recent_jump_times.push_back(t);
        while (!recent_jump_times.empty() && recent_jump_times.front() < t - 1.0)
          recent_jump_times.pop_front();
        if (static_cast<double>(recent_jump_times.size()) > limits.zeno_guard) {
          res.status = {StopReason::ZenoGuard, {t, j},
                        "jump density exceeded zeno_guard"};
          break;
        }
        const Vec u_d = ctrl.jump_law(x);
        const Vec w_d = gen.jump_value(model, x, u_d);
        const Vec xp = evaluate_jump(model, x, u_d, w_d);
        arc.samples.push_back({t, j, SampleKind::JumpPre, x, zc, u_d, zwc, w_d, vee(x)});
        arc.samples.push_back(
            {t, j + 1, SampleKind::JumpPost, xp, zc, u_d, zwc, w_d, vee(xp)});
        arc.domain.append_jump();
        x = xp;
        ++j;
        sliding_on = -1;
        recorded_any = true;
        continue;
      }

      const Vec u_c = ctrl.flow_law(x);
      if (t >= limits.t_max) {
        res.status = {StopReason::HorizonT, {t, j}, ""};
        break;
      }
      const double h = std::min(limits.dt, limits.t_max - t);
      const Vec w_c = gen.flow_value(model, x, u_c, h);

      if (!flow_ok_tol(x, u_c, w_c)) {
        res.status = {StopReason::LeftCAndD, {t, j}, "state left C and D"};
        break;
      }
      if (!recorded_any) {
        arc.samples.push_back({t, j, SampleKind::Flow, x, u_c, zd, w_c, zwd, vee(x)});
        recorded_any = true;
      }

      const auto base_field = [&](const Vec& xq) {
        return model.flow_map(xq, ctrl.flow_law(xq), w_c);
      };

      std::function<Vec(const Vec&)> field = base_field;
      if (sliding_on >= 0) {
        const auto& sigma = ctrl.switching_surfaces[sliding_on];
        const SideRates r = side_rates(base_field, sigma, x);
        if (!attracting(r)) {
          sliding_on = -1;  // surface released the state
        } else {
          // Filippov combination plus a mild stabilizer pulling sigma to 0
          // along the flow (time constant 10 steps), so engagement never
          // teleports the state onto the surface
          const double kappa = 1.0 / (10.0 * h);
          field = [&base_field, &sigma, &side_rates, &attracting, &grad_fd,
                   kappa](const Vec& xq) {
            const SideRates rq = side_rates(base_field, sigma, xq);
            double alpha = 0.5;
            if (rq.gm != rq.gp) alpha = rq.gm / (rq.gm - rq.gp);
            alpha = std::min(1.0, std::max(0.0, alpha));
            const Vec n = grad_fd(sigma, xq);
            const double n2 = n.squaredNorm();
            Vec f = alpha * rq.fp + (1.0 - alpha) * rq.fm;
            if (n2 > 1e-18) f -= (kappa * sigma(xq) / n2) * n;
            return f;
          };
        }
      }

      const auto guard = [&](const Vec& xq) {
        if (jump_effective(xq)) return true;
        return !flow_ok_tol(xq, ctrl.flow_law(xq), w_c);
      };

      Vec x_try = rk4_field_step(field, x, h);
      double t_next = t + h;
      bool exited_flow_set = false;
      if (guard(x_try)) {
        const auto br =
            detail::locate_bracket(field, guard, t, x, t + h, x_try, limits.event_tol);
        if (jump_effective(br.x_hi)) {
          t_next = br.t_hi;
          x_try = br.x_hi;
        } else {
          // left C without entering D: stop on the feasible side
          t_next = br.t_lo;
          x_try = br.x_lo;
          exited_flow_set = true;
        }
        sliding_on = -1;
      } else if (sliding_on < 0 && !ctrl.switching_surfaces.empty()) {
        // locate the earliest declared-surface crossing within the step; the
        // Euler probe catches paths whose RK4 endpoint chatters back to the
        // starting side
        const Vec x_euler = x + h * field(x);
        int hit = -1;
        detail::EventBracket best{};
        for (int si = 0; si < static_cast<int>(ctrl.switching_surfaces.size()); ++si) {
          const auto& sigma = ctrl.switching_surfaces[si];
          const double s0 = sigma(x);
          const bool flip_end = s0 * sigma(x_try) < 0.0;
          const bool flip_euler = s0 * sigma(x_euler) < 0.0;
          if (!flip_end && !flip_euler) continue;
          double t_hi = t + h;
          Vec hi = x_try;
          if (!flip_end) {
            bool found = false;
            for (double frac : {0.5, 0.25, 0.75}) {
              Vec xm = rk4_field_step(field, x, frac * h);
              if (s0 * sigma(xm) < 0.0) {
                t_hi = t + frac * h;
                hi = std::move(xm);
                found = true;
                break;
              }
            }
            if (!found) continue;  // the RK4 path dodges the surface
          }
          const auto cross = [&sigma, s0](const Vec& xq) { return sigma(xq) * s0 <= 0.0; };
          const auto br =
              detail::locate_bracket(field, cross, t, x, t_hi, hi, limits.event_tol);
          if (hit < 0 || br.t_hi < best.t_hi) {
            hit = si;
            best = br;
          }
        }
        if (hit >= 0) {
          const auto& sigma = ctrl.switching_surfaces[hit];
          // decide at the located crossing: slide if the law is discontinuous
          // across the surface and both sides push inward, otherwise just
          // split the step here
          Vec xs = best.x_hi;
          const double d = probe_dist(xs);
          const Vec n = grad_fd(sigma, xs);
          const Vec nh = n.norm() > 1e-14 ? Vec(n / n.norm()) : Vec(Vec::Unit(x.size(), 0));
          const Vec up = ctrl.flow_law(xs + d * nh);
          const Vec um = ctrl.flow_law(xs - d * nh);
          const bool discontinuous =
              (up - um).norm() > 1e-3 * (1.0 + ctrl.flow_law(xs).norm());
          if (discontinuous && attracting(side_rates(base_field, sigma, xs))) {
            sliding_on = hit;
          }
          t_next = best.t_hi;
          x_try = std::move(xs);
        }
      }

      gen.commit_flow(model, x_try, t_next - t);
      t = t_next;
      x = x_try;
      arc.domain.extend_flow(t);
      arc.samples.push_back(
          {t, j, SampleKind::Flow, x, ctrl.flow_law(x), zd, w_c, zwd, vee(x)});
      if (exited_flow_set) {
        res.status = {StopReason::LeftCAndD, {t, j}, "state left C and D"};
        break;
      }
    }
  } catch (const NumericalError& e) {
    res.status = {StopReason::NumericalFailure, {t, j}, e.what()};
  }
  res.status.final_time = {t, j};
  return res;
}

/// Lyapunov series along an arc plus per-step/per-jump monotonicity flags.
struct LyapunovTrace {
  struct Point {
    double t;
    std::int64_t j;
    double V;
  };
  std::vector<Point> series;
  std::int64_t flow_violations = 0;
  std::int64_t jump_violations = 0;
  double worst_flow_increase = 0.0;  // max over steps of V_next - V - tol
  double worst_jump_increase = 0.0;

  bool monotone() const { return flow_violations == 0 && jump_violations == 0; }
};

/// Checks V(x_{k+1}) <= V(x_k) + tol(V(x_k)) per flow step and per jump.
inline LyapunovTrace lyapunov_trace(
    const HybridArc& arc, const std::function<double(const Vec&)>& V,
    const std::function<double(double)>& tol = [](double v) {
      return 1e-8 * (1.0 + v);
    }) {
  LyapunovTrace tr;
  tr.series.reserve(arc.samples.size());
  for (std::size_t k = 0; k < arc.samples.size(); ++k) {
    const auto& s = arc.samples[k];
    const double v = V(s.x);
    tr.series.push_back({s.t, s.j, v});
    if (k == 0) continue;
    const double vp = V(arc.samples[k - 1].x);
    const double excess = v - vp - tol(vp);
    if (s.kind == SampleKind::JumpPost) {
      if (excess > 0) {
        ++tr.jump_violations;
        tr.worst_jump_increase = std::max(tr.worst_jump_increase, excess);
      }
    } else if (excess > 0) {
      ++tr.flow_violations;
      tr.worst_flow_increase = std::max(tr.worst_flow_increase, excess);
    }
  }
  return tr;
}

}  // namespace hyclf
