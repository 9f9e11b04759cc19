#include <gtest/gtest.h>

#include <cmath>

#include "mslab/ms_flow.hpp"

using namespace mslab;

namespace {

double angle_diff(double a, double b) { return std::remainder(a - b, kTwoPi); }

std::vector<RayEvent> reflections(const GeneralizedRay& ray) {
  std::vector<RayEvent> out;
  for (const auto& e : ray.events)
    if (e.kind == EventKind::HyperbolicReflection) out.push_back(e);
  return out;
}

}  // namespace

TEST(MsFlow, NormalChordReachesAntipode) {
  const auto ray = trace(CollarChart::disk(), {0.0, 0.0, 1.0, 0.0}, 1.0);
  // diameter of length 2 at speed 2
  ASSERT_NE(ray.end.region, Region::Cartesian);
  EXPECT_NEAR(ray.end.p.y, 0.0, 1e-9);
  EXPECT_NEAR(std::abs(angle_diff(ray.end.p.x, 0.0)), kPi, 1e-9);
  EXPECT_NEAR(ray.end.p.eta, -1.0, 1e-9);
}

TEST(MsFlow, NormalChordReflects) {
  const auto ray = trace(CollarChart::disk(), {0.0, 0.0, 1.0, 0.0}, 1.5);
  const auto ev = reflections(ray);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_NEAR(ev[0].s, 1.0, 1e-9);
  EXPECT_NEAR(std::abs(angle_diff(ev[0].point.x, 0.0)), kPi, 1e-9);
  EXPECT_NEAR(ev[0].eta_before, -1.0, 1e-9);
  EXPECT_NEAR(ev[0].eta_after, 1.0, 1e-9);
}

TEST(MsFlow, TenBounceBilliardMatchesChordGeometry) {
  const double xi = 0.6, eta = 0.8;
  const auto chart = CollarChart::disk();
  const auto ray = trace(chart, {0.0, 0.3, eta, xi}, 10.5 * std::sqrt(1.0 - xi * xi));
  const auto ev = reflections(ray);
  ASSERT_GE(ev.size(), 10u);
  // central angle per chord 2 arccos(xi), chord time sqrt(1 - xi^2)
  const double step = 2.0 * std::acos(xi);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_NEAR(angle_diff(ev[i].point.x, 0.3 + (i + 1) * step), 0.0, 1e-8) << i;
    EXPECT_NEAR(ev[i].s, (i + 1) * std::sqrt(1.0 - xi * xi), 1e-8) << i;
    EXPECT_NEAR(ev[i].eta_after, eta, 1e-8);
    EXPECT_NEAR(ev[i].point.xi, xi, 1e-12);
  }
}

TEST(MsFlow, QuarterTurnReflections) {
  const double c = std::sqrt(0.5);
  const auto ray = trace(CollarChart::disk(), {0.0, 0.0, c, c}, 3.0);
  const auto ev = reflections(ray);
  ASSERT_GE(ev.size(), 3u);
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_NEAR(angle_diff(ev[i].point.x, ev[i - 1].point.x), kPi / 2, 1e-8);
}

TEST(MsFlow, EnergyDriftAlongCollarSamples) {
  const auto chart = CollarChart::disk();
  const auto ray = trace(chart, {0.0, 0.0, 0.8, 0.6}, 4.0);
  double worst = 0.0;
  for (const auto& seg : ray.segments) {
    if (seg.mode != SegmentMode::Interior) continue;
    for (const auto& smp : seg.samples) {
      if (smp.p.y < 0.0 || smp.p.y > chart.collar_width()) continue;
      const double r = chart.eval_r(smp.p.y, smp.p.x, smp.p.xi).r;
      worst = std::max(worst, std::abs(smp.p.eta * smp.p.eta - r));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

TEST(MsFlow, GlidingHalfTurn) {
  const auto ray = trace(CollarChart::disk(), {0.0, 0.0, 0.0, 1.0}, kPi / 2);
  ASSERT_FALSE(ray.segments.empty());
  EXPECT_EQ(ray.segments.front().mode, SegmentMode::Gliding);
  EXPECT_NEAR(std::abs(angle_diff(ray.end.p.x, 0.0)), kPi, 1e-8);
  EXPECT_NEAR(ray.end.p.y, 0.0, 1e-12);
  EXPECT_NEAR(ray.end.p.xi, 1.0, 1e-12);
}

TEST(MsFlow, ReflectHyperbolic) {
  const auto disk = CollarChart::disk();
  const PhasePoint a = reflect_hyperbolic(disk, {0.0, 0.0, -1.0, 0.0});
  EXPECT_DOUBLE_EQ(a.eta, 1.0);
  EXPECT_DOUBLE_EQ(a.x, 0.0);
  EXPECT_NEAR(reflect_hyperbolic(disk, {0.0, 0.4, -0.8, 0.6}).eta, 0.8, 1e-15);
  const auto ann = CollarChart::annulus(0.5, AnnulusBoundary::Outer);
  EXPECT_DOUBLE_EQ(reflect_hyperbolic(ann, {0.0, 1.0, -1.0, 0.0}).eta, 1.0);
  EXPECT_THROW(reflect_hyperbolic(disk, {0.0, 0.0, 0.0, 1.0}), ClassificationError);
  EXPECT_THROW(reflect_hyperbolic(disk, {0.0, 0.0, -0.5, 0.0}), ValidationError);
}

TEST(MsFlow, StepGliding) {
  const auto disk = CollarChart::disk();
  auto a = step_gliding(disk, {0.0, 0.0, 0.0, 1.0}, 0.1);
  EXPECT_NEAR(a.point.x, 0.2, 1e-10);
  EXPECT_NEAR(a.point.xi, 1.0, 1e-12);
  EXPECT_FALSE(a.left_glancing);
  auto b = step_gliding(disk, {0.0, 1.0, 0.0, -1.0}, 0.1);
  EXPECT_NEAR(b.point.x, 0.8, 1e-10);
  auto c = step_gliding(disk, {0.0, 0.7, 0.0, 1.0}, 0.0);
  EXPECT_EQ(c.point.x, 0.7);
  EXPECT_THROW(step_gliding(disk, {0.0, 0.0, 0.0, 0.5}, 0.1), ValidationError);
}

TEST(MsFlow, CartesianStraightLine) {
  const Tracer tr(CollarChart::disk());
  const CartesianPoint e = flow_cartesian(tr, {0.0, 0.0, 1.0, 0.0}, 0.4);
  EXPECT_NEAR(e.x1, 0.8, 1e-12);
  EXPECT_NEAR(e.x2, 0.0, 1e-12);
  EXPECT_NEAR(e.xi1, 1.0, 1e-12);
  const CartesianPoint id = flow_cartesian(tr, {0.1, 0.2, 0.3, 0.4}, 0.0);
  EXPECT_EQ(id.x1, 0.1);
  EXPECT_EQ(id.xi2, 0.4);
}

TEST(MsFlow, CartesianThroughCollarAndBack) {
  // (0, 0) heading along x1 with |xi| = 1: hits the wall at s = 0.5, back at the origin at s = 1
  const Tracer tr(CollarChart::disk());
  const CartesianPoint e = flow_cartesian(tr, {0.0, 0.0, 1.0, 0.0}, 1.0);
  EXPECT_NEAR(e.x1, 0.0, 1e-9);
  EXPECT_NEAR(e.x2, 0.0, 1e-9);
  EXPECT_NEAR(e.xi1, -1.0, 1e-9);
  // homogeneity: |xi| = 2 covers the same path in half the time
  const CartesianPoint f = flow_cartesian(tr, {0.0, 0.0, 2.0, 0.0}, 0.5);
  EXPECT_NEAR(f.x1, 0.0, 1e-9);
  EXPECT_NEAR(f.xi1, -2.0, 1e-9);
}

TEST(MsFlow, PullbackIdentityAndGlidingAntipode) {
  const auto disk = CollarChart::disk();
  const double eta = std::sqrt(1.0 - 0.25 / 0.81);  // on shell at y = 0.1, xi' = 0.5
  const std::vector<PhasePoint> pts{{0.1, 0.2, eta, 0.5}, {0.0, 0.0, 0.0, 1.0}};
  const auto same = flow_pullback(disk, pts, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    ASSERT_TRUE(same[i].ok);
    EXPECT_NEAR(same[i].point.y, pts[i].y, 1e-14);
    EXPECT_NEAR(same[i].point.xi, pts[i].xi, 1e-14);
  }
  // speed 2 along the unit circle: s = pi / 2 is half a turn
  const auto half = flow_pullback(disk, {pts[1]}, kPi / 2);
  ASSERT_TRUE(half[0].ok);
  EXPECT_NEAR(std::abs(angle_diff(half[0].point.x, 0.0)), kPi, 1e-8);
}

TEST(MsFlow, AnnulusRayCrossesToInnerCircle) {
  // normal incidence from the outer wall: travel 0.5 to the inner circle, reflect, return
  const auto ann = CollarChart::annulus(0.5, AnnulusBoundary::Outer);
  const auto ray = trace(ann, {0.0, 0.0, 1.0, 0.0}, 0.5);
  const auto ev = reflections(ray);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].component, 1);
  EXPECT_NEAR(ev[0].s, 0.25, 1e-9);
  EXPECT_NEAR(ray.end.p.y, 0.0, 1e-9);
  EXPECT_EQ(ray.end.component, 0);
}
