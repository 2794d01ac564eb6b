#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hyclf/hybrid_time.hpp"
#include "hyclf/input_box.hpp"
#include "hyclf/model.hpp"
#include "hyclf/model_checks.hpp"
#include "hyclf/pendulum.hpp"
#include "hyclf/rng.hpp"

namespace hyclf {
namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v1(double a) { return Vec::Constant(1, a); }

TEST(HybridTimeDomain, InvariantsAcrossJumps) {
  HybridTimeDomain dom;
  dom.start(0.0, 0);
  dom.extend_flow(1.5);
  dom.append_jump();
  dom.extend_flow(2.25);
  dom.append_jump();
  ASSERT_TRUE(dom.well_formed());
  const auto& iv = dom.intervals();
  ASSERT_EQ(iv.size(), 3u);
  EXPECT_EQ(iv[0].t_end, iv[1].t_start);
  EXPECT_EQ(iv[1].j, iv[0].j + 1);
  EXPECT_TRUE(dom.contains(1.5, 0));
  EXPECT_TRUE(dom.contains(1.5, 1));
  EXPECT_FALSE(dom.contains(2.0, 0));
}

TEST(InputBox, BasicGeometry) {
  const InputBox b = InputBox::bounds(v2(-1.0, 0.0), v2(2.0, 3.0));
  EXPECT_TRUE(b.contains(v2(0.0, 1.0)));
  EXPECT_FALSE(b.contains(v2(-1.5, 1.0)));
  EXPECT_EQ(b.clamp(v2(5.0, -1.0))[0], 2.0);
  EXPECT_EQ(b.min_norm_point()[1], 0.0);
  EXPECT_EQ(b.vertices().size(), 4u);
  EXPECT_THROW(InputBox::bounds(v2(1.0, 0.0), v2(0.0, 3.0)), std::invalid_argument);
  EXPECT_TRUE(InputBox::empty_box(2).empty());
}

class PendulumModel : public ::testing::Test {
 protected:
  PendulumParams p = PendulumParams::defaults();
  HybridSystemModel m = make_pendulum(p);
};

TEST_F(PendulumModel, FlowAllowed) {
  EXPECT_TRUE(flow_allowed(m, v2(0.5, 1.0), v2(0.0, -0.2), v2(0.0, 0.0)));
  EXPECT_FALSE(flow_allowed(m, v2(-0.5, 1.0), v2(0.0, 0.0), v2(0.0, 0.0)));
  EXPECT_TRUE(flow_allowed(m, v2(0.0, 0.0), v2(0.0, 0.0), v2(0.0, 0.0)));
  EXPECT_THROW(flow_allowed(m, v1(0.0), v2(0.0, 0.0), v2(0.0, 0.0)),
               std::invalid_argument);
}

TEST_F(PendulumModel, JumpAllowed) {
  EXPECT_TRUE(jump_allowed(m, v2(-0.3, -1.0), v1(0.0), v1(0.0)));
  EXPECT_FALSE(jump_allowed(m, v2(0.3, -1.0), v1(0.0), v1(0.0)));
  EXPECT_TRUE(jump_allowed(m, v2(0.0, 0.0), v1(0.0), v1(0.0)));
}

TEST_F(PendulumModel, EvaluateFlow) {
  EXPECT_EQ(evaluate_flow(m, v2(0.0, 0.0), v2(0.0, 0.0), v2(0.0, 0.0)), v2(0.0, 0.0));
  const Vec dx = evaluate_flow(m, v2(0.0, 1.0), v2(0.0, 0.0), v2(0.0, 0.0));
  EXPECT_DOUBLE_EQ(dx[0], 1.0);
  EXPECT_DOUBLE_EQ(dx[1], 0.0);

  PendulumParams damped = p;
  damped.b = 1.0;
  const HybridSystemModel md = make_pendulum(damped);
  const Vec dx2 = evaluate_flow(md, v2(kHalfPi, 0.0), v2(2.0, 0.0), v2(1.0, 0.0));
  EXPECT_NEAR(dx2[0], 0.0, 1e-15);
  EXPECT_NEAR(dx2[1], 2.0, 1e-12);
}

TEST_F(PendulumModel, EvaluateJump) {
  const Vec xp = evaluate_jump(m, v2(0.0, -1.0), v1(0.0), v1(0.0));
  EXPECT_DOUBLE_EQ(xp[0], 0.0);
  EXPECT_NEAR(xp[1], 2.0 / 3.0, 1e-15);

  EXPECT_EQ(evaluate_jump(m, v2(0.0, 0.0), v1(0.0), v1(0.0)), v2(0.0, 0.0));

  const Vec xq = evaluate_jump(m, v2(-0.2, -1.0), v1(0.0), v1(1.0 / 3.0));
  EXPECT_NEAR(xq[0], -0.19, 1e-15);
  EXPECT_NEAR(xq[1], 1.0, 1e-15);
}

TEST_F(PendulumModel, InputBoxes) {
  const InputBox bf = m.input_box_flow(v2(0.4, 0.0));
  ASSERT_FALSE(bf.empty());
  EXPECT_FALSE(bf.bounded_at(0));
  EXPECT_DOUBLE_EQ(bf.lower()[1], -kHalfPi);
  EXPECT_DOUBLE_EQ(bf.upper()[1], 0.0);

  const InputBox bj = m.input_box_jump(v2(-0.4, -1.0));
  ASSERT_FALSE(bj.empty());
  EXPECT_DOUBLE_EQ(bj.lower()[0], -0.4);
  EXPECT_DOUBLE_EQ(bj.upper()[0], 0.0);

  EXPECT_TRUE(m.input_box_jump(v2(1.0, -1.0)).empty());
}

TEST_F(PendulumModel, PostJumpPositionPushedTowardZero) {
  Rng rng(7);
  for (int k = 0; k < 500; ++k) {
    const double x1 = rng.uniform(-kHalfPi, 0.0);
    const double x2 = rng.uniform(-3.0, 0.0);
    const Vec xp = evaluate_jump(m, v2(x1, x2), v1(0.0), v1(0.0));
    EXPECT_GE(xp[0], x1);
    if (x1 < 0.0) {
      EXPECT_GT(xp[0], x1);
    }
  }
  EXPECT_EQ(evaluate_jump(m, v2(0.0, -1.0), v1(0.0), v1(0.0))[0], 0.0);
}

TEST_F(PendulumModel, JumpVelocityContractionFactor) {
  // |x2+| <= (e1 + (e1 - e0)) |x2| over all admissible (u_d, w_d);
  // exactly 1 for the default restitution bounds
  const double factor = p.e1 + (p.e1 - p.e0);
  EXPECT_DOUBLE_EQ(factor, 1.0);
  Rng rng(8);
  for (int k = 0; k < 500; ++k) {
    const double x1 = rng.uniform(-kHalfPi, 0.0);
    const double x2 = rng.uniform(-3.0, 0.0);
    const double ud = rng.uniform(x1, 0.0);
    const double wd = rng.uniform(0.0, p.wd_max);
    const Vec xp = evaluate_jump(m, v2(x1, x2), v1(ud), v1(wd));
    EXPECT_LE(std::abs(xp[1]), factor * std::abs(x2) + 1e-12);
  }
}

TEST_F(PendulumModel, EmptyJumpBoxMatchesInfeasibleJumpSet) {
  Rng rng(9);
  for (int k = 0; k < 500; ++k) {
    const Vec x = v2(rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0));
    const bool empty = m.input_box_jump(x).empty();
    bool any = false;
    for (double ud : {std::min(0.0, std::max(x[0], -kHalfPi)), 0.0, -kHalfPi / 2})
      for (double wd : {0.0, p.wd_max})
        any = any || jump_allowed(m, x, v1(ud), v1(wd));
    EXPECT_EQ(empty, !any) << "x = (" << x[0] << ", " << x[1] << ")";
  }
}

TEST_F(PendulumModel, SharedInputComponentsAgree) {
  const Controller c = make_closed_form_controller(p);
  Rng rng(10);
  for (int k = 0; k < 100; ++k) {
    const Vec x = v2(rng.uniform(-kHalfPi, kHalfPi), rng.uniform(-3.0, 3.0));
    EXPECT_TRUE(c.shared_components_agree(x));
  }
}

TEST(ValidateModel, PendulumPassesCleanly) {
  const HybridSystemModel m = make_pendulum(PendulumParams::defaults());
  SampleSpec spec;
  spec.state_lower = v2(-kHalfPi, -3.0);
  spec.state_upper = v2(kHalfPi, 3.0);
  spec.samples = 200;
  spec.seed = 11;
  const VerificationReport rep = validate_model(m, spec);
  for (const auto& c : rep.conditions)
    EXPECT_TRUE(c.passed()) << c.condition << " worst=" << c.worst_margin;
}

TEST(ValidateModel, OpenFlowSetFlagged) {
  HybridSystemModel m = make_pendulum(PendulumParams::defaults());
  m.flow_set = [](const Vec& x, const Vec&, const Vec&) { return x[0] > 0.0; };
  SampleSpec spec;
  spec.state_lower = v2(-1.0, -1.0);
  spec.state_upper = v2(1.0, 1.0);
  spec.samples = 200;
  spec.seed = 12;
  const VerificationReport rep = validate_model(m, spec);
  const auto* c = rep.find("flow_set_closed");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->passed());
  bool at_zero = false;
  for (const auto& v : c->violations) at_zero = at_zero || std::abs(v.x[0]) < 1e-9;
  EXPECT_TRUE(at_zero);
}

TEST(ValidateModel, SingularFlowMapFlagged) {
  HybridSystemModel m = make_pendulum(PendulumParams::defaults());
  m.flow_map = [](const Vec& x, const Vec&, const Vec&) {
    return v2(x[1], 1.0 / x[0]);
  };
  SampleSpec spec;
  spec.state_lower = v2(-1.0, -1.0);
  spec.state_upper = v2(1.0, 1.0);
  spec.samples = 100;
  spec.seed = 13;
  const VerificationReport rep = validate_model(m, spec);
  const auto* c = rep.find("flow_map_regular");
  ASSERT_NE(c, nullptr);
  EXPECT_FALSE(c->passed());
}

}  // namespace
}  // namespace hyclf
