#include <gtest/gtest.h>

#include <cmath>

#include "hyclf/pendulum.hpp"
#include "hyclf/rclf.hpp"
#include "hyclf/rng.hpp"

namespace hyclf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

TEST(PendulumParamsTest, Validation) {
  PendulumParams p = PendulumParams::defaults();
  EXPECT_NO_THROW(p.validate());
  p.e0 = 0.8;  // violates e0 < e1
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = PendulumParams::defaults();
  p.rho_tilde = 0.1;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(PendulumParamsTest, RestitutionIsLinearInMu) {
  const PendulumParams p = PendulumParams::defaults();
  EXPECT_DOUBLE_EQ(p.restitution(-kHalfPi), p.e0);
  EXPECT_DOUBLE_EQ(p.restitution(0.0), p.e1);
  EXPECT_NEAR(p.restitution(-kHalfPi / 2), (p.e0 + p.e1) / 2, 1e-15);
}

TEST(LambdaConst, FigureParametersAreDegenerate) {
  const LambdaResult r = lambda_const(PendulumParams::defaults());
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(LambdaConst, EndpointExactForSmallerE1) {
  PendulumParams p = PendulumParams::defaults();
  p.e1 = 0.6;
  p.wd_max = p.e1 - p.e0;
  const LambdaResult r = lambda_const(p);
  // first term: 2(1 - (19/20)^2) = 0.195; second term bottoms at eta = 0
  const double term1 = 2.0 * (1.0 - 0.95 * 0.95);
  const double q = p.e1 + (p.e1 - p.e0);
  const double term2 = 1.0 - q * q;
  EXPECT_GT(term2, term1);
  EXPECT_NEAR(r.value, 0.195, 1e-12);
  EXPECT_FALSE(r.degenerate);
}

TEST(LambdaConst, LimitsAndMonotonicity) {
  // rho_tilde -> 0- drives the first term to zero
  PendulumParams p = PendulumParams::defaults();
  p.e0 = 0.1;
  p.e1 = 0.2;
  p.wd_max = p.e1 - p.e0;
  p.rho_tilde = -1e-9;
  EXPECT_LT(lambda_const(p).value, 1e-8);

  // lambda is non-increasing as e1 grows
  double prev = 1.0;
  for (double e1 : {0.4, 0.5, 0.6, 2.0 / 3.0}) {
    PendulumParams q = PendulumParams::defaults();
    q.e1 = e1;
    q.wd_max = q.e1 - q.e0;
    const double lam = lambda_const(q).value;
    EXPECT_LE(lam, prev + 1e-15);
    prev = lam;
  }
}

TEST(RclfFixture, QuadraticFormValues) {
  const Rclf r = pendulum_rclf(PendulumParams::defaults());
  EXPECT_DOUBLE_EQ(r.V(v2(1.0, 0.0)), 2.0);
  EXPECT_DOUBLE_EQ(r.V(v2(0.0, 1.0)), 1.0);
  EXPECT_DOUBLE_EQ(r.V(v2(1.0, 1.0)), 5.0);
  EXPECT_EQ(r.gradV(v2(1.0, 0.0)), v2(4.0, 2.0));
  EXPECT_EQ(r.r_star, 0.0);
  EXPECT_EQ(r.gamma_fraction, 1.0);
  EXPECT_TRUE(r.degenerate_rate);
}

TEST(RclfFixture, EigenvalueEnvelopesSandwichV) {
  const Rclf r = pendulum_rclf(PendulumParams::defaults());
  const double lmin = (3.0 - std::sqrt(5.0)) / 2.0;
  const double lmax = (3.0 + std::sqrt(5.0)) / 2.0;
  Rng rng(21);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = v2(rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0));
    const double d = r.dist_A(x);
    EXPECT_LE(r.alpha1(d), r.V(x) + 1e-12);
    EXPECT_GE(r.alpha2(d), r.V(x) - 1e-12);
    EXPECT_NEAR(r.alpha1(d), lmin * d * d, 1e-12);
    EXPECT_NEAR(r.alpha2(d), lmax * d * d, 1e-12);
  }
}

TEST(RclfFixture, GradientMatchesFiniteDifferences) {
  const Rclf r = pendulum_rclf(PendulumParams::defaults());
  Rng rng(22);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = v2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const Vec g = r.gradV(x);
    const double h = 1e-6 * std::max(1.0, x.norm());
    for (int i = 0; i < 2; ++i) {
      Vec a = x, b = x;
      a[i] += h;
      b[i] -= h;
      const double fd = (r.V(a) - r.V(b)) / (2.0 * h);
      EXPECT_LE(std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])), 1e-6);
    }
  }
}

TEST(PsiTerms, SpecialAndDerivedValues) {
  const PendulumParams p = PendulumParams::defaults();
  const PsiTerms zero = psi_terms(p, v2(0.0, 0.0), 0.0);
  EXPECT_EQ(zero.psi0, 0.0);
  EXPECT_EQ(zero.psi0_w, 0.0);
  EXPECT_EQ(zero.psi1, 0.0);

  EXPECT_EQ(psi_terms(p, v2(1.0, -1.0), 0.0).psi1, 0.0);

  // a=1, b=0, lambda=0, wbar=(1,1), x=(0.5, 0.5)
  const PsiTerms t = psi_terms(p, v2(0.5, 0.5), 0.0);
  EXPECT_NEAR(t.psi0, 1.5 - 2.0 * std::sin(0.5), 1e-15);
  EXPECT_NEAR(t.psi0_w, 3.0, 1e-15);
  EXPECT_NEAR(t.psi1, 2.0, 1e-15);
}

TEST(ClosedFormLawTest, BranchesAndDerivedValue) {
  const PendulumParams p = PendulumParams::defaults();
  // psi0 + psi0w <= 0 -> zero input (x on the manifold, away from origin)
  const ClosedFormLaw l1 = closed_form_law(p, v2(1.0, -1.0), 0.0);
  EXPECT_EQ(l1.u_c, v2(0.0, 0.0));
  EXPECT_EQ(l1.u_d[0], 0.0);
  EXPECT_FALSE(l1.inconsistent);

  const ClosedFormLaw l2 = closed_form_law(p, v2(0.5, 0.5), 0.0);
  EXPECT_NEAR(l2.u_c[0], -(1.5 - 2.0 * std::sin(0.5) + 3.0) / 2.0, 1e-15);
  EXPECT_EQ(l2.u_c[1], 0.0);
}

class PendulumLaw : public ::testing::Test {
 protected:
  PendulumParams p = PendulumParams::defaults();
  HybridSystemModel m = make_pendulum(p);
  Rclf rclf = pendulum_rclf(p);
  double lambda = lambda_const(p).value;
};

TEST_F(PendulumLaw, ClosedFormSatisfiesDecreaseConstraint) {
  Rng rng(23);
  for (int k = 0; k < 500; ++k) {
    const Vec x = v2(rng.uniform(0.0, kHalfPi), rng.uniform(-3.0, 3.0));
    const PsiTerms t = psi_terms(p, x, lambda);
    if (t.psi1 == 0.0) continue;
    const ClosedFormLaw law = closed_form_law(p, x, lambda);
    const ExtendedReal ups = upsilon(m, rclf, Phase::Flow, x, law.u_c);
    ASSERT_TRUE(ups.finite());
    EXPECT_LE(ups.value(), 1e-9);
  }
}

TEST_F(PendulumLaw, MatchesGenericMinNormSolver) {
  Rng rng(24);
  int checked = 0;
  while (checked < 1000) {
    const Vec x = v2(rng.uniform(0.0, kHalfPi), rng.uniform(-3.0, 3.0));
    if (rclf.V(x) <= rclf.v_zero_tol) continue;
    const ClosedFormLaw law = closed_form_law(p, x, lambda);
    const MinNormResult mn = min_norm_flow(m, rclf, x);
    ASSERT_EQ(mn.u.size(), 2);
    EXPECT_NEAR(mn.u[0], law.u_c[0], 1e-9)
        << "x = (" << x[0] << ", " << x[1] << ")";
    EXPECT_NEAR(mn.u[1], law.u_c[1], 1e-9);
    ++checked;
  }
}

TEST_F(PendulumLaw, ZeroDisturbanceSpecializationIsPointwiseSmaller) {
  PendulumParams p0 = p;
  p0.wbar1 = 0.0;
  p0.wbar2 = 0.0;
  Rng rng(25);
  for (int k = 0; k < 500; ++k) {
    const Vec x = v2(rng.uniform(0.0, kHalfPi), rng.uniform(-3.0, 3.0));
    EXPECT_EQ(psi_terms(p0, x, lambda).psi0_w, 0.0);
    const double u_nominal = closed_form_law(p0, x, lambda).u_c[0];
    const double u_robust = closed_form_law(p, x, lambda).u_c[0];
    EXPECT_LE(std::abs(u_nominal), std::abs(u_robust) + 1e-15);
  }
}

TEST_F(PendulumLaw, JumpEnergyIdentityAtZeroInput) {
  // V(G(x,0,w)) - V(x) equals the expanded quadratic display
  Rng rng(26);
  for (int k = 0; k < 500; ++k) {
    const Vec x = v2(rng.uniform(-kHalfPi, 0.0), rng.uniform(-3.0, 0.0));
    const double wd = rng.uniform(0.0, p.wd_max);
    const Vec xp = m.jump_map(x, Vec::Zero(1), Vec::Constant(1, wd));
    const double lhs = rclf.V(xp) - rclf.V(x);
    const double s = 1.0 + p.rho_tilde;
    const double q = p.restitution(0.0) + wd;
    const double rhs = -2.0 * x[0] * x[0] * (1.0 - s * s) -
                       x[1] * x[1] * (1.0 - q * q) -
                       2.0 * x[0] * x[1] * (1.0 + s * q);
    EXPECT_NEAR(lhs, rhs, 1e-9 * (1.0 + std::abs(rhs)));
  }
}

}  // namespace
}  // namespace hyclf
