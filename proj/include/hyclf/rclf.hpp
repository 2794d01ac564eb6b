#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hyclf/extended_real.hpp"
#include "hyclf/input_box.hpp"
#include "hyclf/model.hpp"

namespace hyclf {

/// Robust control Lyapunov function data: V with its gradient, the class-K
/// envelopes and decrease rate, the threshold r*, the distance to the target
/// set, and the invariance feedbacks applied on {V = 0}.
///
/// gamma_fraction is the alpha3 multiplier inside the decrease functionals
/// (1/2 in the generic construction; the pendulum fixture uses 1 to match
/// its worked closed form).
struct Rclf {
  std::function<double(const Vec&)> V;
  std::function<Vec(const Vec&)> gradV;
  std::function<double(double)> alpha1, alpha2;  // class-Kinf envelopes
  std::function<double(double)> alpha3;          // decrease rate
  double r_star = 0.0;
  std::function<double(const Vec&)> dist_A;  // |x|_A
  double gamma_fraction = 0.5;
  double v_zero_tol = 1e-12;
  std::optional<double> u_sat;  // optional saturation of the min-norm law
  std::function<Vec(const Vec&)> invariance_flow;  // rho_{c,0}
  std::function<Vec(const Vec&)> invariance_jump;  // rho_{d,0}
  bool degenerate_rate = false;  // alpha3 identically zero (lambda == 0)
};

/// Membership in the residual sublevel set {V <= r}.
inline bool residual_contains(const Rclf& rclf, double r, const Vec& x) {
  if (r < 0) throw std::invalid_argument("residual_contains: r must be >= 0");
  return rclf.V(x) <= r;
}

namespace detail {

/// sup of a scalar function over a bounded box: evaluated on the corners and
/// on a regular grid (grid_per_coord per coordinate) and maximized over the
/// union. Exact for functions affine or coordinatewise convex in w (corner
/// attainment); the grid covers the rest at sampling resolution.
inline double sup_over_box(const std::function<double(const Vec&)>& f,
                           const InputBox& box, int grid_per_coord = 9) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& w : box.vertices()) best = std::max(best, f(w));
  if (box.dim() > 0) {
    for (const auto& w : box.grid(grid_per_coord)) best = std::max(best, f(w));
  }
  return best;
}

/// (x, u) in Delta_*(r, K): V(x) >= r and (x, u, w) in K for admissible w.
inline bool in_delta(const Rclf& rclf, double r, const Vec& x, const Vec& u,
                     const SetPredicate& set, const InputBox& wbox) {
  if (rclf.V(x) < r) return false;
  if (wbox.empty()) return false;
  return set(x, u, wbox.min_norm_point());
}

}  // namespace detail

/// Flow decrease functional
///   Gamma_c(x, u_c, r) = sup_{w in Psi^w_c(x)} <gradV(x), F(x,u_c,w)>
///                        + gamma_fraction * alpha3(|x|_A)
/// on Delta_c(r, C), and -inf elsewhere.
inline ExtendedReal gamma_flow(const HybridSystemModel& model, const Rclf& rclf,
                               const Vec& x, const Vec& u_c, double r,
                               int w_grid = 9) {
  if (r < rclf.r_star) throw std::invalid_argument("gamma_flow: r < r_star");
  const InputBox wbox = model.dist_box_flow(x);
  if (!detail::in_delta(rclf, r, x, u_c, model.flow_set, wbox))
    return ExtendedReal::neg_infinity();
  const Vec g = rclf.gradV(x);
  const double sup = detail::sup_over_box(
      [&](const Vec& w) { return g.dot(model.flow_map(x, u_c, w)); }, wbox, w_grid);
  return ExtendedReal(sup + rclf.gamma_fraction * rclf.alpha3(rclf.dist_A(x)));
}

/// Jump decrease functional
///   Gamma_d(x, u_d, r) = sup_{w in Psi^w_d(x)} V(G(x,u_d,w)) - V(x)
///                        + gamma_fraction * alpha3(|x|_A)
/// on Delta_d(r, D), and -inf elsewhere.
inline ExtendedReal gamma_jump(const HybridSystemModel& model, const Rclf& rclf,
                               const Vec& x, const Vec& u_d, double r,
                               int w_grid = 9) {
  if (r < rclf.r_star) throw std::invalid_argument("gamma_jump: r < r_star");
  const InputBox wbox = model.dist_box_jump(x);
  if (!detail::in_delta(rclf, r, x, u_d, model.jump_set, wbox))
    return ExtendedReal::neg_infinity();
  const double vx = rclf.V(x);
  const double sup = detail::sup_over_box(
      [&](const Vec& w) { return rclf.V(model.jump_map(x, u_d, w)) - vx; }, wbox,
      w_grid);
  return ExtendedReal(sup + rclf.gamma_fraction * rclf.alpha3(rclf.dist_A(x)));
}

enum class Phase { Flow, Jump };

/// Upsilon_*(x, u) = Gamma_*(x, u, V(x)). When V(x) < r_star the functional
/// is evaluated at r = r_star and `clamped` (if given) is set.
inline ExtendedReal upsilon(const HybridSystemModel& model, const Rclf& rclf,
                            Phase phase, const Vec& x, const Vec& u,
                            bool* clamped = nullptr) {
  double r = rclf.V(x);
  if (r < rclf.r_star) {
    r = rclf.r_star;
    if (clamped) *clamped = true;
  } else if (clamped) {
    *clamped = false;
  }
  return phase == Phase::Flow ? gamma_flow(model, rclf, x, u, r)
                              : gamma_jump(model, rclf, x, u, r);
}

/// Raised when the regulation map T_*(x) is empty at grid resolution; this
/// is the falsification signal that the RCLF inequalities fail at x.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, Vec x, double best_upsilon)
      : std::runtime_error(what), x_(std::move(x)), best_upsilon_(best_upsilon) {}
  const Vec& x() const { return x_; }
  double best_upsilon() const { return best_upsilon_; }

 private:
  Vec x_;
  double best_upsilon_;
};

struct MinNormResult {
  Vec u;
  bool affine_path = false;  // closed form used (Upsilon affine in u)
  bool saturated = false;    // u_sat clamp applied
};

namespace detail {

struct AffineProbe {
  bool affine = false;
  double a = 0.0;  // Upsilon(x, u) = a + <b, u>
  Vec b;
};

/// Probe Upsilon(x, .) for affinity: second differences along each
/// coordinate at 3 collinear points, plus one diagonal cross-check.
inline AffineProbe probe_affine(const std::function<double(const Vec&)>& f,
                                const InputBox& box) {
  const Eigen::Index m = box.dim();
  AffineProbe p;
  p.b = Vec::Zero(m);
  const Vec u0 = box.min_norm_point();
  const double f0 = f(u0);
  if (!std::isfinite(f0)) return p;
  const double scale = std::max(1.0, u0.norm());
  Vec h = Vec::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    // probe inward where the box is one-sided; degenerate coordinates are fixed
    double room_up = box.upper()[i] - u0[i];
    double room_dn = u0[i] - box.lower()[i];
    if (!std::isfinite(room_up)) room_up = std::numeric_limits<double>::infinity();
    if (!std::isfinite(room_dn)) room_dn = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    if (room_up >= room_dn && room_up > 0)
      hi = std::min(0.5 * scale, 0.45 * room_up);
    else if (room_dn > 0)
      hi = -std::min(0.5 * scale, 0.45 * room_dn);
    if (hi == 0.0) continue;  // box coordinate is a single point
    h[i] = hi;
    const double f1 = f(u0 + hi * Vec::Unit(m, i));
    const double f2 = f(u0 + 2 * hi * Vec::Unit(m, i));
    if (!std::isfinite(f1) || !std::isfinite(f2)) return p;
    const double second = f2 - 2 * f1 + f0;
    const double mag = std::max({1.0, std::abs(f0), std::abs(f1), std::abs(f2)});
    if (std::abs(second) > 1e-7 * mag) return p;
    p.b[i] = (f1 - f0) / hi;
  }
  if (m > 1) {
    const double fd = f(u0 + h);
    const double lin = f0 + p.b.dot(h);
    const double mag = std::max({1.0, std::abs(f0), std::abs(fd)});
    if (!std::isfinite(fd) || std::abs(fd - lin) > 1e-7 * mag) return p;
  }
  p.affine = true;
  p.a = f0 - p.b.dot(u0);
  return p;
}

/// Grid over the box for search paths; unbounded coordinates are truncated
/// to [-span, span].
inline InputBox truncated(const InputBox& box, double span) {
  Vec lo = box.lower(), hi = box.upper();
  for (Eigen::Index i = 0; i < box.dim(); ++i) {
    if (!std::isfinite(lo[i])) lo[i] = -span;
    if (!std::isfinite(hi[i])) hi[i] = span;
  }
  return InputBox::bounds(lo, hi);
}

}  // namespace detail

/// Brute-force reference: the minimum-norm point of u_grid with
/// Upsilon_phase(x, u) <= 0, or nullopt when none qualifies.
inline std::optional<Vec> minimality_oracle(const HybridSystemModel& model,
                                            const Rclf& rclf, Phase phase,
                                            const Vec& x,
                                            const std::vector<Vec>& u_grid) {
  std::optional<Vec> best;
  double best_norm = std::numeric_limits<double>::infinity();
  for (const auto& u : u_grid) {
    const ExtendedReal val = upsilon(model, rclf, phase, x, u);
    if (!val.leq(0.0)) continue;
    const double nn = u.norm();
    if (nn < best_norm) {
      best_norm = nn;
      best = u;
    }
  }
  return best;
}

namespace detail {

/// Shared search path: coordinate-refined grid search for the minimum-norm
/// feasible point of phi(u) <= tol over the box.
inline std::optional<Vec> refined_grid_search(
    const std::function<double(const Vec&)>& phi, const InputBox& box0,
    double tol, double span, double* best_phi_seen) {
  InputBox box = truncated(box0, span);
  std::optional<Vec> best;
  double best_norm = std::numeric_limits<double>::infinity();
  const int pts = box.dim() <= 1 ? 201 : 41;
  for (int round = 0; round < 4; ++round) {
    for (const auto& u : box.grid(pts)) {
      const double v = phi(u);
      if (best_phi_seen) *best_phi_seen = std::min(*best_phi_seen, v);
      if (v <= tol && u.norm() < best_norm) {
        best_norm = u.norm();
        best = u;
      }
    }
    if (!best) break;
    // shrink around the incumbent
    Vec lo = box.lower(), hi = box.upper();
    const Vec cell = (hi - lo) / (pts - 1);
    for (Eigen::Index i = 0; i < box.dim(); ++i) {
      lo[i] = std::max(lo[i], (*best)[i] - 2 * cell[i]);
      hi[i] = std::min(hi[i], (*best)[i] + 2 * cell[i]);
    }
    box = InputBox::bounds(lo, hi);
  }
  return best;
}

}  // namespace detail

/// Pointwise minimum-norm flow feedback rho_c(x): the smallest-norm element
/// of T_c(x) = Psi^u_c(x) intersected with {Upsilon_c(x, .) <= 0}. On
/// {V <= v_zero_tol} the invariance feedback rho_{c,0} is returned.
///
/// Solution path: if Upsilon is affine in u (3-collinear-point probe), the
/// closed form u = -max(0, a) b / |b|^2 followed by box projection and a
/// feasibility re-check; otherwise coordinate-refined grid search.
inline MinNormResult min_norm_flow(const HybridSystemModel& model, const Rclf& rclf,
                                   const Vec& x, double feas_tol = 1e-9,
                                   double span = 50.0) {
  if (!in_flow_projection(model, x))
    throw std::domain_error("min_norm_flow: x outside Pi_c(C)");
  MinNormResult res;
  if (rclf.V(x) <= rclf.v_zero_tol && rclf.invariance_flow) {
    res.u = rclf.invariance_flow(x);
    return res;
  }
  const InputBox box = model.input_box_flow(x);
  const auto phi = [&](const Vec& u) {
    return upsilon(model, rclf, Phase::Flow, x, u).value();
  };

  const auto probe = detail::probe_affine(phi, box);
  double best_seen = std::numeric_limits<double>::infinity();
  if (probe.affine) {
    const double bn2 = probe.b.squaredNorm();
    Vec u;
    if (bn2 > 1e-14) {
      u = -(std::max(0.0, probe.a) / bn2) * probe.b;
    } else {
      if (probe.a > feas_tol)
        throw InfeasibleError("min_norm_flow: constant positive Upsilon", x, probe.a);
      u = Vec::Zero(box.dim());
    }
    u = box.clamp(u);
    const double chk = phi(u);
    if (chk <= feas_tol) {
      res.u = u;
      res.affine_path = true;
      if (rclf.u_sat && res.u.norm() > *rclf.u_sat) {
        res.u *= *rclf.u_sat / res.u.norm();
        res.saturated = true;
      }
      return res;
    }
    best_seen = chk;
  }

  auto found = detail::refined_grid_search(phi, box, feas_tol, span, &best_seen);
  if (!found)
    throw InfeasibleError("min_norm_flow: T_c(x) empty at grid resolution", x,
                          best_seen);
  res.u = *found;
  if (rclf.u_sat && res.u.norm() > *rclf.u_sat) {
    res.u *= *rclf.u_sat / res.u.norm();
    res.saturated = true;
  }
  return res;
}

/// Pointwise minimum-norm jump feedback rho_d(x). One-dimensional inputs are
/// solved by scanning the feasible interval outward from 0 with a bisection
/// polish on the feasibility boundary.
inline MinNormResult min_norm_jump(const HybridSystemModel& model, const Rclf& rclf,
                                   const Vec& x, double feas_tol = 1e-9,
                                   double span = 50.0) {
  if (!in_jump_projection(model, x))
    throw std::domain_error("min_norm_jump: x outside Pi_d(D)");
  MinNormResult res;
  if (rclf.V(x) <= rclf.v_zero_tol && rclf.invariance_jump) {
    res.u = rclf.invariance_jump(x);
    return res;
  }
  const InputBox box = model.input_box_jump(x);
  const auto phi = [&](const Vec& u) {
    return upsilon(model, rclf, Phase::Jump, x, u).value();
  };

  if (box.dim() == 1) {
    const InputBox tb = detail::truncated(box, span);
    const double lo = tb.lower()[0], hi = tb.upper()[0];
    const int pts = 401;
    double best_seen = std::numeric_limits<double>::infinity();
    std::vector<double> candidates;
    candidates.reserve(pts + 1);
    for (int k = 0; k <= pts; ++k)
      candidates.push_back(lo + (hi - lo) * (static_cast<double>(k) / pts));
    std::sort(candidates.begin(), candidates.end(), [](double a, double b) {
      return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
    });
    const double step = (hi - lo) / pts;
    for (double c : candidates) {
      Vec u = Vec::Constant(1, c);
      const double v = phi(u);
      best_seen = std::min(best_seen, v);
      if (v > feas_tol) continue;
      // c is the first feasible point in |u| order; the adjacent grid value
      // toward zero is known infeasible, so bisect the exact feasibility
      // boundary between them
      double good = c;
      double bad = std::abs(c) < step ? 0.0 : c - (c > 0 ? step : -step);
      const double target = v <= 0.0 ? 0.0 : feas_tol;
      if (bad != good && phi(Vec::Constant(1, bad)) > target) {
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (good + bad);
          if (phi(Vec::Constant(1, mid)) <= target) good = mid;
          else bad = mid;
        }
      }
      res.u = Vec::Constant(1, good);
      return res;
    }
    throw InfeasibleError("min_norm_jump: T_d(x) empty at grid resolution", x,
                          best_seen);
  }

  double best_seen = std::numeric_limits<double>::infinity();
  auto found = detail::refined_grid_search(phi, box, feas_tol, span, &best_seen);
  if (!found)
    throw InfeasibleError("min_norm_jump: T_d(x) empty at grid resolution", x,
                          best_seen);
  res.u = *found;
  return res;
}

/// Total controller wrapper around the min-norm selections: outside the
/// projected sets (where the laws are not defined) it falls back to the
/// box-projected zero input, so closed-loop integration stays total.
/// The model and rclf are captured by reference and must outlive the laws.
inline Controller make_min_norm_controller(const HybridSystemModel& model,
                                           const Rclf& rclf) {
  Controller c;
  c.name = "min_norm";
  c.flow_law = [&model, &rclf](const Vec& x) -> Vec {
    try {
      return min_norm_flow(model, rclf, x).u;
    } catch (const std::exception&) {
      const InputBox b = model.input_box_flow(x);
      return b.empty() ? Vec::Zero(model.m_c) : b.min_norm_point();
    }
  };
  c.jump_law = [&model, &rclf](const Vec& x) -> Vec {
    try {
      return min_norm_jump(model, rclf, x).u;
    } catch (const std::exception&) {
      const InputBox b = model.input_box_jump(x);
      return b.empty() ? Vec::Zero(model.m_d) : b.min_norm_point();
    }
  };
  return c;
}

}  // namespace hyclf
