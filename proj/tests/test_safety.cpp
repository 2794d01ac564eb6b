#include <gtest/gtest.h>

#include <cmath>

#include "hyclf/rng.hpp"
#include "hyclf/safety.hpp"

namespace hyclf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

double W(const Vec& x) { return x[0] * x[0] + x[1] * x[1] - x[0] * x[1]; }

TEST(LinearSafetyFixture, FlowIdentityHoldsEverywhere) {
  // <grad W, F> + W = 0 identically for the closed-loop field
  const BarrierProblem p = make_linear_safety_problem();
  Rng rng(41);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = v2(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0));
    const double lhs = p.gradB(x).dot(p.F(x)) + W(x);
    EXPECT_LE(std::abs(lhs), 1e-9);
  }
}

TEST(LinearSafetyFixture, GradBMatchesFiniteDifferences) {
  const BarrierProblem p = make_linear_safety_problem();
  Rng rng(42);
  for (int k = 0; k < 1000; ++k) {
    const Vec x = v2(rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0));
    const Vec g = p.gradB(x);
    for (int i = 0; i < 2; ++i) {
      Vec a = x, b = x;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      const double fd = (p.B(a) - p.B(b)) / 2e-6;
      EXPECT_LE(std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])), 1e-6);
    }
  }
}

TEST(LinearSafetyFixture, BoundarySamplerHitsTheLevelSet) {
  const BarrierProblem p = make_linear_safety_problem();
  Rng rng(43);
  for (int k = 0; k < 200; ++k) {
    const Vec x = p.sampler_boundary(rng);
    EXPECT_LE(std::abs(p.B(x)), p.boundary_tol);
  }
}

TEST(BarrierCandidate, FixtureSamplersPass) {
  const BarrierProblem p = make_linear_safety_problem();
  const VerificationReport rep = barrier_candidate_check(p, 500);
  for (const auto& c : rep.conditions)
    EXPECT_TRUE(c.passed()) << c.condition;
}

TEST(BarrierCandidate, SignFlipFailsOnUnsafeSamples) {
  BarrierProblem p = make_linear_safety_problem();
  const auto b = p.B;
  p.B = [b](const Vec& x) { return -b(x) - 24.0; };  // negative on X_u
  const VerificationReport rep = barrier_candidate_check(p, 200);
  const auto* unsafe = rep.find("B_positive_on_Xu");
  ASSERT_NE(unsafe, nullptr);
  EXPECT_EQ(unsafe->violations.size(), 200u);
}

TEST(BarrierCandidate, MissingUnsafeSamplerIsVacuousWithFlag) {
  BarrierProblem p = make_linear_safety_problem();
  p.sampler_Xu = nullptr;
  const VerificationReport rep = barrier_candidate_check(p, 100);
  const auto* unsafe = rep.find("B_positive_on_Xu");
  ASSERT_NE(unsafe, nullptr);
  EXPECT_TRUE(unsafe->passed());
  EXPECT_EQ(unsafe->points_checked, 0);
  ASSERT_FALSE(unsafe->flags.empty());
}

TEST(StrictDecrease, FixtureValueIsMinusTwelveOnTheBoundary) {
  const BarrierProblem p = make_linear_safety_problem();
  const VerificationReport rep = strict_decrease_boundary(p, 500);
  const auto* dec = rep.find("boundary_strict_decrease");
  ASSERT_NE(dec, nullptr);
  EXPECT_TRUE(dec->passed());
  // <grad B, F> = -W = -12 on the boundary, so the margin is 12
  EXPECT_NEAR(dec->worst_margin, 12.0, 1e-6);
}

TEST(StrictDecrease, OrbitalFieldViolatesStrictness) {
  BarrierProblem p;
  p.n = 2;
  p.boundary_tol = 1e-8;
  p.B = [](const Vec& x) { return x.squaredNorm() - 1.0; };
  p.gradB = [](const Vec& x) -> Vec { return 2.0 * x; };
  p.F = [](const Vec& x) -> Vec { return v2(x[1], -x[0]); };
  p.sampler_boundary = [](Rng& rng) {
    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return v2(std::cos(th), std::sin(th));
  };
  const VerificationReport rep = strict_decrease_boundary(p, 100);
  const auto* dec = rep.find("boundary_strict_decrease");
  ASSERT_NE(dec, nullptr);
  EXPECT_FALSE(dec->passed());
  EXPECT_NEAR(dec->worst_margin, 0.0, 1e-12);
}

TEST(StrictDecrease, GradientFlowIsStrictAwayFromCriticalPoints) {
  BarrierProblem p;
  p.n = 2;
  p.boundary_tol = 1e-8;
  p.B = [](const Vec& x) { return x.squaredNorm() - 4.0; };
  p.gradB = [](const Vec& x) -> Vec { return 2.0 * x; };
  p.F = [&p](const Vec& x) -> Vec { return -p.gradB(x); };
  p.sampler_boundary = [](Rng& rng) {
    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return v2(2.0 * std::cos(th), 2.0 * std::sin(th));
  };
  const VerificationReport rep = strict_decrease_boundary(p, 100);
  EXPECT_TRUE(rep.all_passed());
}

TEST(UniformMargin, FixtureValueIsOneHalf) {
  // inf over {W = 12} of W / (2 sqrt(2) |grad W|) with max |grad W| = sqrt(72)
  const BarrierProblem p = make_linear_safety_problem();
  const double eps = uniform_margin(p, 2000);
  EXPECT_GT(eps, 0.0);
  EXPECT_GE(eps, 0.5 - 1e-9);
  EXPECT_LE(eps, 0.52);
}

TEST(UniformMargin, HomogeneousInTheField) {
  BarrierProblem p = make_linear_safety_problem();
  const double eps1 = uniform_margin(p, 500, 7);
  const auto f = p.F;
  p.F = [f](const Vec& x) -> Vec { return 2.0 * f(x); };
  const double eps2 = uniform_margin(p, 500, 7);
  EXPECT_NEAR(eps2, 2.0 * eps1, 1e-12);
}

TEST(UniformMargin, OrthogonalFieldGivesZero) {
  BarrierProblem p;
  p.n = 2;
  p.boundary_tol = 1e-8;
  p.B = [](const Vec& x) { return x.squaredNorm() - 1.0; };
  p.gradB = [](const Vec& x) -> Vec { return 2.0 * x; };
  p.F = [](const Vec& x) -> Vec { return v2(x[1], -x[0]); };
  p.sampler_boundary = [](Rng& rng) {
    const double th = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return v2(std::cos(th), std::sin(th));
  };
  EXPECT_NEAR(uniform_margin(p, 300), 0.0, 1e-12);
}

TEST(UniformMargin, MoreSamplesNeverIncreaseTheInfimum) {
  const BarrierProblem p = make_linear_safety_problem();
  const double e500 = uniform_margin(p, 500, 9);
  const double e2000 = uniform_margin(p, 2000, 9);
  EXPECT_LE(e2000, e500 + 1e-15);
}

TEST(UniformMargin, DegenerateGradientRaises) {
  BarrierProblem p = make_linear_safety_problem();
  p.gradB = [](const Vec& x) -> Vec { return Vec(0.0 * x); };
  p.sampler_boundary = [](Rng&) { return v2(2.0, 2.0); };
  EXPECT_THROW(uniform_margin(p, 10), DegenerateGradientError);
}

TEST(UniformMargin, ImpliedByStrictDecreaseBound) {
  // passing strict decrease with worst value <= -delta implies
  // margin >= delta / (2 sqrt(n) max |grad B|) over the same samples
  const BarrierProblem p = make_linear_safety_problem();
  const std::uint64_t seed = 99;
  const int n_samples = 400;
  const VerificationReport dec = strict_decrease_boundary(p, n_samples, seed);
  const double delta = dec.conditions[0].worst_margin;
  ASSERT_GT(delta, 0.0);
  Rng rng(seed);
  double max_grad = 0.0;
  for (int k = 0; k < n_samples; ++k)
    max_grad = std::max(max_grad, p.gradB(p.sampler_boundary(rng)).norm());
  const double eps = uniform_margin(p, n_samples, seed);
  EXPECT_GE(eps, delta / (2.0 * std::sqrt(2.0) * max_grad) - 1e-12);
}

TEST(SimulatePerturbed, CertifiedMarginKeepsTrajectoriesContained) {
  const BarrierProblem p = make_linear_safety_problem();
  const double eps = uniform_margin(p, 2000);
  // starts just inside the boundary
  std::vector<Vec> x0s;
  Rng rng(44);
  for (int k = 0; k < 50; ++k) {
    Vec x = p.sampler_boundary(rng);
    x0s.push_back(0.995 * x);
  }
  const ContainmentReport rep = simulate_perturbed(p, eps, x0s, 20.0, 1e-3);
  EXPECT_TRUE(rep.all_contained()) << "worst B = " << rep.worst_B;
  EXPECT_LE(rep.worst_B, 1e-8);
}

TEST(SimulatePerturbed, ExcessiveInflationEscapes) {
  const BarrierProblem p = make_linear_safety_problem();
  std::vector<Vec> x0s;
  Rng rng(45);
  for (int k = 0; k < 10; ++k) x0s.push_back(0.995 * p.sampler_boundary(rng));
  const ContainmentReport rep = simulate_perturbed(p, 10.0, x0s, 20.0, 1e-3);
  EXPECT_FALSE(rep.all_contained());
}

TEST(SimulatePerturbed, ZeroInflationReducesToNominalSafety) {
  const BarrierProblem p = make_linear_safety_problem();
  std::vector<Vec> x0s;
  Rng rng(46);
  for (int k = 0; k < 20; ++k) x0s.push_back(0.999 * p.sampler_boundary(rng));
  const ContainmentReport rep = simulate_perturbed(p, 0.0, x0s, 20.0, 1e-3);
  EXPECT_TRUE(rep.all_contained());
}

}  // namespace
}  // namespace hyclf
