#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hyclf/model.hpp"
#include "hyclf/report.hpp"
#include "hyclf/rng.hpp"
#include "hyclf/sim.hpp"

namespace hyclf {

/// Barrier-certificate problem for a flow ẋ = F(x): a continuously
/// differentiable candidate B (nonpositive on the initial set X_o, positive
/// on the unsafe set X_u, zero-sublevel safety region K) with seeded point
/// generators for X_o, X_u and the boundary of K.
struct BarrierProblem {
  int n = 0;
  std::function<double(const Vec&)> B;
  std::function<Vec(const Vec&)> gradB;
  std::function<Vec(const Vec&)> F;
  std::function<Vec(Rng&)> sampler_Xo;
  std::function<Vec(Rng&)> sampler_Xu;        // may be null: vacuous X_u
  std::function<Vec(Rng&)> sampler_boundary;  // |B| <= boundary_tol points
  double boundary_tol = 1e-8;
};

class DegenerateGradientError : public std::runtime_error {
 public:
  DegenerateGradientError(const std::string& what, Vec x)
      : std::runtime_error(what), x_(std::move(x)) {}
  const Vec& x() const { return x_; }

 private:
  Vec x_;
};

/// Rejection sampling into |B| <= coarse_tol followed by Newton projection
/// steps along gradB until |B| <= boundary_tol.
inline Vec project_to_boundary(const BarrierProblem& p, Vec x, int max_newton = 30) {
  for (int it = 0; it < max_newton; ++it) {
    const double b = p.B(x);
    if (std::abs(b) <= p.boundary_tol) return x;
    const Vec g = p.gradB(x);
    const double g2 = g.squaredNorm();
    if (g2 < 1e-18)
      throw DegenerateGradientError("project_to_boundary: vanishing gradient", x);
    x -= (b / g2) * g;
  }
  if (std::abs(p.B(x)) > p.boundary_tol)
    throw std::runtime_error("project_to_boundary: no convergence");
  return x;
}

/// Candidate check: B > 0 on X_u samples and B <= 0 on X_o samples. Missing
/// samplers make the corresponding side a vacuous pass, flagged.
inline VerificationReport barrier_candidate_check(const BarrierProblem& p,
                                                  int n_samples,
                                                  std::uint64_t seed = 1) {
  VerificationReport rep;
  ConditionReport unsafe;
  unsafe.condition = "B_positive_on_Xu";
  ConditionReport initial;
  initial.condition = "B_nonpositive_on_Xo";
  Rng rng(seed);
  if (p.sampler_Xu) {
    for (int k = 0; k < n_samples; ++k) {
      const Vec x = p.sampler_Xu(rng);
      unsafe.record(x, "unsafe", p.B(x), 0.0);  // need B > 0
    }
  } else {
    unsafe.flags.push_back("vacuous_no_Xu_sampler");
  }
  if (p.sampler_Xo) {
    for (int k = 0; k < n_samples; ++k) {
      const Vec x = p.sampler_Xo(rng);
      initial.record(x, "initial", -p.B(x), 0.0);  // need B <= 0
    }
  } else {
    initial.flags.push_back("vacuous_no_Xo_sampler");
  }
  rep.conditions = {unsafe, initial};
  return rep;
}

/// Strict decrease on the boundary: <gradB(x), F(x)> < 0 at every boundary
/// sample; the report's worst margin is the largest (least negative) value.
inline VerificationReport strict_decrease_boundary(const BarrierProblem& p,
                                                   int n_samples,
                                                   std::uint64_t seed = 2) {
  VerificationReport rep;
  ConditionReport dec;
  dec.condition = "boundary_strict_decrease";
  Rng rng(seed);
  for (int k = 0; k < n_samples; ++k) {
    const Vec x = p.sampler_boundary(rng);
    const double v = p.gradB(x).dot(p.F(x));
    // strict condition: v = 0 exactly is already a violation
    const double margin =
        v < 0.0 ? -v : std::min(-v, -std::numeric_limits<double>::min());
    dec.record(x, "boundary", margin, 0.0);
  }
  rep.conditions = {dec};
  return rep;
}

/// Constant robustness margin: the sampled infimum over the boundary of
///   <gradB(x), -F(x)> / (2 sqrt(n) |gradB(x)|).
/// A positive value certifies, at sample resolution, that the inflated
/// inclusion ẋ in F(x) + eps*B1 keeps the safety region invariant.
inline double uniform_margin(const BarrierProblem& p, int n_samples,
                             std::uint64_t seed = 3) {
  Rng rng(seed);
  double inf = std::numeric_limits<double>::infinity();
  const double scale = 2.0 * std::sqrt(static_cast<double>(p.n));
  for (int k = 0; k < n_samples; ++k) {
    const Vec x = p.sampler_boundary(rng);
    const Vec g = p.gradB(x);
    const double gn = g.norm();
    if (gn < 1e-12)
      throw DegenerateGradientError("uniform_margin: vanishing gradient at boundary sample", x);
    inf = std::min(inf, g.dot(-p.F(x)) / (scale * gn));
  }
  return inf;
}

struct ContainmentReport {
  int trajectories = 0;
  int contained = 0;
  double worst_B = -std::numeric_limits<double>::infinity();
  Vec worst_x;
  bool gradient_fallback = false;  // random unit perturbation was needed

  bool all_contained() const { return contained == trajectories; }
};

/// Integrates the adversarially inflated flow ẋ = F(x) + eps*gradB/|gradB|
/// (the B-increasing worst direction) from each start for T seconds and
/// checks B <= tol throughout. Vanishing gradients fall back to a seeded
/// random unit perturbation, flagged in the report.
inline ContainmentReport simulate_perturbed(const BarrierProblem& p, double epsilon,
                                            const std::vector<Vec>& x0_set, double T,
                                            double dt, double tol = 1e-8,
                                            std::uint64_t seed = 4) {
  if (epsilon < 0) throw std::invalid_argument("simulate_perturbed: epsilon >= 0");
  if (dt <= 0 || T <= 0)
    throw std::invalid_argument("simulate_perturbed: T and dt must be > 0");
  ContainmentReport rep;
  rep.trajectories = static_cast<int>(x0_set.size());
  Rng rng(seed);

  for (const auto& x0 : x0_set) {
    Vec x = x0;
    bool ok = p.B(x) <= tol;
    const auto note = [&](const Vec& xq) {
      const double b = p.B(xq);
      if (b > rep.worst_B) {
        rep.worst_B = b;
        rep.worst_x = xq;
      }
      if (b > tol) ok = false;
    };
    note(x);
    const std::int64_t steps = static_cast<std::int64_t>(std::ceil(T / dt));
    for (std::int64_t k = 0; k < steps; ++k) {
      const double h = std::min(dt, T - static_cast<double>(k) * dt);
      const auto field = [&](const Vec& xq) -> Vec {
        const Vec g = p.gradB(xq);
        const double gn = g.norm();
        Vec dir;
        if (gn < 1e-12) {
          rep.gradient_fallback = true;
          Vec r(xq.size());
          for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = rng.uniform(-1.0, 1.0);
          dir = r.norm() > 0 ? Vec(r / r.norm()) : Vec::Unit(xq.size(), 0);
        } else {
          dir = g / gn;
        }
        return p.F(xq) + epsilon * dir;
      };
      x = rk4_field_step(field, x, h);
      note(x);
    }
    if (ok) ++rep.contained;
  }
  return rep;
}

/// The linear closed-loop safety fixture: F(x) = (-x1 + x2, -x1) with
/// W(x) = x1^2 + x2^2 - x1 x2, B = W - 12, X_o = {W <= 1}, X_u = {W > 12}.
/// Along the flow <gradW, F> = -W identically.
inline BarrierProblem make_linear_safety_problem(double boundary_tol = 1e-8) {
  BarrierProblem p;
  p.n = 2;
  p.boundary_tol = boundary_tol;
  p.B = [](const Vec& x) {
    return x[0] * x[0] + x[1] * x[1] - x[0] * x[1] - 12.0;
  };
  p.gradB = [](const Vec& x) -> Vec {
    Vec g(2);
    g[0] = 2.0 * x[0] - x[1];
    g[1] = 2.0 * x[1] - x[0];
    return g;
  };
  p.F = [](const Vec& x) -> Vec {
    Vec f(2);
    f[0] = -x[0] + x[1];
    f[1] = -x[0];
    return f;
  };
  const auto W = [](const Vec& x) {
    return x[0] * x[0] + x[1] * x[1] - x[0] * x[1];
  };
  p.sampler_Xo = [W](Rng& rng) {
    for (;;) {
      Vec x(2);
      x[0] = rng.uniform(-1.5, 1.5);
      x[1] = rng.uniform(-1.5, 1.5);
      if (W(x) <= 1.0) return x;
    }
  };
  p.sampler_Xu = [W](Rng& rng) {
    for (;;) {
      Vec x(2);
      x[0] = rng.uniform(-8.0, 8.0);
      x[1] = rng.uniform(-8.0, 8.0);
      if (W(x) > 12.0) return x;
    }
  };
  // the sampler captures a copy carrying B and gradB for the projection
  p.sampler_boundary = [prob = p, W](Rng& rng) mutable {
    for (;;) {
      Vec x(2);
      x[0] = rng.uniform(-8.0, 8.0);
      x[1] = rng.uniform(-8.0, 8.0);
      const double w = W(x);
      if (w < 6.0 || w > 20.0) continue;
      return project_to_boundary(prob, x);
    }
  };
  return p;
}

}  // namespace hyclf
