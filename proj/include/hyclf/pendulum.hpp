#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "hyclf/model.hpp"
#include "hyclf/rclf.hpp"

namespace hyclf {

inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// Controlled pendulum impacting on a slanted surface. State x = (angle,
/// angular velocity); flow input u_c = (torque, surface angle mu); jump
/// input u_d = mu. The surface angle is shared between phases: u_{c,2} and
/// u_d denote the same physical input.
struct PendulumParams {
  double a = 1.0;          // gravity-like coefficient (> 0)
  double b = 0.0;          // damping (>= 0)
  double e0 = 1.0 / 3.0;   // restitution at mu = -pi/2
  double e1 = 2.0 / 3.0;   // restitution at mu = 0
  double rho_tilde = -1.0 / 20.0;  // impact compression, constant in (-1, 0)
  double wbar1 = 1.0;      // flow disturbance bound, torque channel
  double wbar2 = 1.0;      // flow disturbance bound, damping channel
  double wd_max = 1.0 / 3.0;  // jump disturbance bound (default e1 - e0)

  static PendulumParams defaults() {
    PendulumParams p;
    p.wd_max = p.e1 - p.e0;
    return p;
  }

  void validate() const {
    if (!(a > 0)) throw std::invalid_argument("pendulum: a must be > 0");
    if (!(b >= 0)) throw std::invalid_argument("pendulum: b must be >= 0");
    if (!(0 < e0 && e0 < e1 && e1 < 1))
      throw std::invalid_argument("pendulum: need 0 < e0 < e1 < 1");
    if (!(-1 < rho_tilde && rho_tilde < 0))
      throw std::invalid_argument("pendulum: rho_tilde must lie in (-1, 0)");
    if (!(wbar1 >= 0 && wbar2 >= 0 && wd_max >= 0))
      throw std::invalid_argument("pendulum: disturbance bounds must be >= 0");
  }

  /// Restitution e(mu), linear with e(-pi/2) = e0 and e(0) = e1.
  double restitution(double mu) const {
    return e0 + (e1 - e0) * (mu + kHalfPi) / kHalfPi;
  }
};

/// Builds the hybrid model of the pendulum. `wd_admit` optionally enlarges
/// the admissible jump-disturbance interval (stress runs apply w_d beyond
/// the modeled bound; certification always uses the declared wd_max).
inline HybridSystemModel make_pendulum(const PendulumParams& p,
                                       std::optional<double> wd_admit = {}) {
  p.validate();
  const double wd_hi = wd_admit ? std::max(*wd_admit, p.wd_max) : p.wd_max;

  HybridSystemModel m;
  m.name = "pendulum";
  m.n = 2;
  m.m_c = 2;
  m.m_d = 1;
  m.d_c = 2;
  m.d_d = 1;

  m.flow_set = [p](const Vec& x, const Vec& u, const Vec& w) {
    return std::abs(x[0]) <= kHalfPi && u[1] >= -kHalfPi && u[1] <= 0.0 &&
           x[0] >= u[1] && std::abs(w[0]) <= p.wbar1 && std::abs(w[1]) <= p.wbar2;
  };
  m.jump_set = [wd_hi](const Vec& x, const Vec& u, const Vec& w) {
    return std::abs(x[0]) <= kHalfPi && u[0] >= -kHalfPi && u[0] <= 0.0 &&
           x[0] <= u[0] && x[1] <= 0.0 && w[0] >= 0.0 && w[0] <= wd_hi;
  };
  m.flow_map = [p](const Vec& x, const Vec& u, const Vec& w) {
    Vec dx(2);
    dx[0] = x[1];
    dx[1] = -p.a * std::sin(x[0]) - (p.b + w[1]) * x[1] + u[0] + w[0];
    return dx;
  };
  m.jump_map = [p](const Vec& x, const Vec& u, const Vec& w) {
    Vec xp(2);
    xp[0] = x[0] + p.rho_tilde * x[0];
    xp[1] = -(p.restitution(u[0]) + w[0]) * x[1];
    return xp;
  };
  m.input_box_flow = [](const Vec& x) {
    if (std::abs(x[0]) > kHalfPi) return InputBox::empty_box(2);
    const double inf = std::numeric_limits<double>::infinity();
    return InputBox::bounds((Vec(2) << -inf, -kHalfPi).finished(),
                            (Vec(2) << inf, std::min(x[0], 0.0)).finished());
  };
  m.input_box_jump = [](const Vec& x) {
    if (x[0] < -kHalfPi || x[0] > 0.0 || x[1] > 0.0) return InputBox::empty_box(1);
    return InputBox::bounds(Vec::Constant(1, x[0]), Vec::Zero(1));
  };
  m.dist_box_flow = [p](const Vec& x) {
    if (std::abs(x[0]) > kHalfPi) return InputBox::empty_box(2);
    return InputBox::symmetric((Vec(2) << p.wbar1, p.wbar2).finished());
  };
  m.dist_box_jump = [wd_hi](const Vec& x) {
    if (x[0] < -kHalfPi || x[0] > 0.0 || x[1] > 0.0) return InputBox::empty_box(1);
    return InputBox::bounds(Vec::Zero(1), Vec::Constant(1, wd_hi));
  };
  return m;
}

struct LambdaResult {
  double value = 0.0;
  bool degenerate = false;  // the computed minimum was <= 0
};

/// Decrease-rate coefficient
///   lambda = min over eta in [-pi/2, 0] of
///            min{ 2 (1 - (1 + rho_tilde)^2), 1 - (e(eta) + e1 - e0)^2 }
/// computed on a 10001-point grid. With linear e and constant rho_tilde both
/// terms are monotone in eta, so the minimum sits at a grid endpoint and the
/// grid value is exact. A nonpositive minimum is reported as 0, degenerate.
inline LambdaResult lambda_const(const PendulumParams& p) {
  p.validate();
  const int n = 10001;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double eta = -kHalfPi + kHalfPi * k / (n - 1);
    const double s = 1.0 + p.rho_tilde;
    const double q = p.restitution(eta) + (p.e1 - p.e0);
    best = std::min(best, std::min(2.0 * (1.0 - s * s), 1.0 - q * q));
  }
  LambdaResult r;
  r.degenerate = best <= 0.0;
  r.value = std::max(best, 0.0);
  return r;
}

struct PsiTerms {
  double psi0;    // drift + rate part of the flow decrease constraint
  double psi0_w;  // worst-case disturbance contribution
  double psi1;    // input coefficient
};

/// The three scalars of the flow decrease constraint
///   psi0 + psi0_w + psi1 * u_{c,1} <= 0:
///   psi0  = 4 x1 x2 + 2 x2^2 + 2(-a sin x1 - b x2)(x2 + x1) + lambda x'x
///   psi0w = 2 |x2 + x1| (wbar2 |x2| + wbar1)
///   psi1  = 2 (x1 + x2)
inline PsiTerms psi_terms(const PendulumParams& p, const Vec& x, double lambda) {
  const double s = x[0] + x[1];
  PsiTerms t;
  t.psi0 = 4.0 * x[0] * x[1] + 2.0 * x[1] * x[1] +
           2.0 * (-p.a * std::sin(x[0]) - p.b * x[1]) * s +
           lambda * x.squaredNorm();
  t.psi0_w = 2.0 * std::abs(s) * (p.wbar2 * std::abs(x[1]) + p.wbar1);
  t.psi1 = 2.0 * s;
  return t;
}

struct ClosedFormLaw {
  Vec u_c;  // (rho_{c,1}, rho_{c,2} = 0)
  Vec u_d;  // rho_d = 0
  bool inconsistent = false;  // psi1 == 0 with positive psi0 + psi0_w
};

/// The worked pointwise minimum-norm selection:
///   rho_{c,1} = -(psi0 + psi0_w) / psi1 when psi0 + psi0_w > 0, else 0;
///   rho_{c,2} = 0 and rho_d = 0.
/// psi1 cannot vanish where the numerator is positive on the flow set; if it
/// does numerically the law returns 0 and flags the point.
inline ClosedFormLaw closed_form_law(const PendulumParams& p, const Vec& x,
                                     double lambda) {
  const PsiTerms t = psi_terms(p, x, lambda);
  ClosedFormLaw law;
  law.u_c = Vec::Zero(2);
  law.u_d = Vec::Zero(1);
  const double num = t.psi0 + t.psi0_w;
  if (num > 0.0) {
    if (t.psi1 == 0.0) law.inconsistent = true;
    else law.u_c[0] = -num / t.psi1;
  }
  return law;
}

/// RCLF of the pendulum: V = x'Px with P = [2 1; 1 1], alpha3(s) = lambda s^2,
/// eigenvalue envelopes, r* = 0, zero invariance feedbacks, and the full
/// alpha3 multiplier inside Gamma (matching the worked formulas).
inline Rclf pendulum_rclf(const PendulumParams& p) {
  p.validate();
  const LambdaResult lam = lambda_const(p);
  Eigen::Matrix2d P;
  P << 2.0, 1.0, 1.0, 1.0;
  const double lmin = (3.0 - std::sqrt(5.0)) / 2.0;
  const double lmax = (3.0 + std::sqrt(5.0)) / 2.0;

  Rclf r;
  r.V = [P](const Vec& x) { return x.dot(P * x); };
  r.gradV = [P](const Vec& x) -> Vec { return 2.0 * (P * x); };
  r.alpha1 = [lmin](double s) { return lmin * s * s; };
  r.alpha2 = [lmax](double s) { return lmax * s * s; };
  r.alpha3 = [lam](double s) { return lam.value * s * s; };
  r.r_star = 0.0;
  r.dist_A = [](const Vec& x) { return x.norm(); };
  r.gamma_fraction = 1.0;
  r.invariance_flow = [](const Vec&) { return Vec::Zero(2); };
  r.invariance_jump = [](const Vec&) { return Vec::Zero(1); };
  r.degenerate_rate = lam.degenerate;
  return r;
}

/// Controller realizing the closed-form law; the shared surface angle is
/// u_{c,2} = u_d = 0 identically.
inline Controller make_closed_form_controller(const PendulumParams& p) {
  const double lambda = lambda_const(p).value;
  Controller c;
  c.name = "closed_form";
  c.flow_law = [p, lambda](const Vec& x) { return closed_form_law(p, x, lambda).u_c; };
  c.jump_law = [p, lambda](const Vec& x) { return closed_form_law(p, x, lambda).u_d; };
  c.shared_components = {{1, 0}};
  // the law switches sign across the manifold x1 + x2 = 0 near the target
  c.switching_surfaces = {[](const Vec& x) { return x[0] + x[1]; }};
  return c;
}

/// All-zero feedback (u_{c,2} must still sit inside its box off x1 >= 0, so
/// this law is only admissible on the right half of the flow set).
inline Controller make_zero_controller(const HybridSystemModel& m) {
  Controller c;
  c.name = "zero";
  const int mc = m.m_c, md = m.m_d;
  c.flow_law = [mc](const Vec&) { return Vec::Zero(mc); };
  c.jump_law = [md](const Vec&) { return Vec::Zero(md); };
  return c;
}

}  // namespace hyclf
