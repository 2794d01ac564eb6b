#include <gtest/gtest.h>

#include <cmath>

#include <json.hpp>

#include "hyclf/certify.hpp"
#include "hyclf/pendulum.hpp"

namespace hyclf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

GridSpec small_grid(double tol = 1e-9) {
  GridSpec g;
  g.state_lower = v2(-kHalfPi, -3.0);
  g.state_upper = v2(kHalfPi, 3.0);
  g.state_counts = {41, 41};
  g.tol = tol;
  return g;
}

TEST(CertifyRclf, PendulumPassesWithDegenerateRateFlag) {
  const PendulumParams p = PendulumParams::defaults();
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  const VerificationReport rep = certify_rclf(m, r, small_grid());
  for (const auto& c : rep.conditions)
    EXPECT_TRUE(c.passed()) << c.condition << " worst " << c.worst_margin;
  EXPECT_NE(std::find(rep.flags.begin(), rep.flags.end(), "degenerate_rate"),
            rep.flags.end());
}

TEST(CertifyRclf, PendulumPassesWithStrictRate) {
  PendulumParams p = PendulumParams::defaults();
  p.e1 = 0.6;
  p.wd_max = p.e1 - p.e0;
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  ASSERT_FALSE(r.degenerate_rate);
  const VerificationReport rep = certify_rclf(m, r, small_grid());
  for (const auto& c : rep.conditions)
    EXPECT_TRUE(c.passed()) << c.condition << " worst " << c.worst_margin;
}

TEST(CertifyRclf, FlowValueOnManifoldEqualsNegativeSquaredNorm) {
  const PendulumParams p = PendulumParams::defaults();
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  for (double t = -kHalfPi; t <= kHalfPi; t += kHalfPi / 25) {
    const Vec x = v2(t, -t);
    const ExtendedReal v = flow_condition_value(m, r, x);
    ASSERT_TRUE(v.finite());
    EXPECT_NEAR(v.value(), -x.squaredNorm(), 1e-9);
  }
}

TEST(CertifyRclf, FlowValueOffManifoldIsUnbounded) {
  const PendulumParams p = PendulumParams::defaults();
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  EXPECT_TRUE(flow_condition_value(m, r, v2(0.5, 0.2)).is_neg_inf());
  EXPECT_THROW(flow_condition_value(m, r, v2(2.0, 0.0)), std::domain_error);
}

TEST(CertifyRclf, JumpMarginCertifiedAtLowestSurface) {
  // the bound V(G) - V <= -lambda x'x is achieved by evaluating at u_d = x1
  PendulumParams p = PendulumParams::defaults();
  p.e1 = 0.6;
  p.wd_max = p.e1 - p.e0;
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  const double lam = lambda_const(p).value;
  for (double x1 = -kHalfPi; x1 <= 0.0; x1 += kHalfPi / 20) {
    for (double x2 : {-3.0, -1.0, -0.1, 0.0}) {
      const Vec x = v2(x1, x2);
      Vec arg;
      const ExtendedReal inf = jump_condition_value(m, r, x, 41, 9, 50.0, &arg);
      ASSERT_TRUE(inf.finite());
      EXPECT_LE(inf.value(), -lam * x.squaredNorm() + 1e-9) << x1 << "," << x2;
      // direct evaluation at u_d = x1 certifies the same bound
      double at_lowest = -std::numeric_limits<double>::infinity();
      for (double wd : {0.0, p.wd_max}) {
        const Vec xp = m.jump_map(x, Vec::Constant(1, x1), Vec::Constant(1, wd));
        at_lowest = std::max(at_lowest, r.V(xp) - r.V(x));
      }
      EXPECT_LE(at_lowest, -lam * x.squaredNorm() + 1e-9);
      EXPECT_LE(inf.value(), at_lowest + 1e-12);
    }
  }
}

TEST(CertifyRclf, CorruptedVIsFalsified) {
  PendulumParams p = PendulumParams::defaults();
  p.e1 = 0.6;  // strict rate so the defect is visible
  p.wd_max = p.e1 - p.e0;
  const HybridSystemModel m = make_pendulum(p);
  Rclf bad = pendulum_rclf(p);
  bad.V = [](const Vec& x) { return x.squaredNorm(); };
  bad.gradV = [](const Vec& x) -> Vec { return 2.0 * x; };
  const VerificationReport rep = certify_rclf(m, bad, small_grid());
  const auto* flow = rep.find("flow_decrease");
  ASSERT_NE(flow, nullptr);
  EXPECT_FALSE(flow->passed());
  EXPECT_FALSE(rep.all_passed());
}

TEST(CertifyRclf, ReportSerializesToTheDocumentedSchema) {
  const PendulumParams p = PendulumParams::defaults();
  const HybridSystemModel m = make_pendulum(p);
  const Rclf r = pendulum_rclf(p);
  GridSpec g = small_grid();
  g.state_counts = {11, 11};
  const nlohmann::json j = to_json(certify_rclf(m, r, g));
  ASSERT_TRUE(j.contains("conditions"));
  ASSERT_TRUE(j.contains("verdict"));
  for (const auto& c : j["conditions"]) {
    EXPECT_TRUE(c.contains("condition"));
    EXPECT_TRUE(c.contains("points_checked"));
    EXPECT_TRUE(c.contains("violations"));
    EXPECT_TRUE(c.contains("worst_margin"));
    EXPECT_TRUE(c.contains("flags"));
  }
  EXPECT_EQ(j["verdict"], "pass");
}

TEST(GridSpecTest, PointEnumerationCoversBoundsInGridOrder) {
  GridSpec g;
  g.state_lower = v2(0.0, 10.0);
  g.state_upper = v2(1.0, 12.0);
  g.state_counts = {3, 2};
  ASSERT_EQ(g.total_points(), 6u);
  EXPECT_EQ(g.point(0), v2(0.0, 10.0));
  EXPECT_EQ(g.point(1), v2(0.5, 10.0));
  EXPECT_EQ(g.point(2), v2(1.0, 10.0));
  EXPECT_EQ(g.point(5), v2(1.0, 12.0));
  g.state_counts = {1, 2};
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace hyclf
