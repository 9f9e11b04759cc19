#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mslab/ms_flow.hpp"
#include "mslab/propagation_verifier.hpp"

using namespace mslab;

namespace {

PropagationReport report(ExperimentKind kind, std::vector<ReportRow> rows) {
  PropagationReport r;
  r.kind = kind;
  r.rows = std::move(rows);
  return r;
}

ReportRow row(double h, double before, double after, double gap = 0.0) {
  ReportRow x;
  x.h = h;
  x.before = before;
  x.after = after;
  x.gap = gap;
  return x;
}

}  // namespace

TEST(DiskBilliard, DiameterAndReverse) {
  int nb = -1;
  const CartesianPoint a = disk_billiard({0.0, 0.0, 1.0, 0.0}, 1.0, &nb);
  EXPECT_EQ(nb, 1);
  EXPECT_NEAR(a.x1, 0.0, 1e-14);
  EXPECT_NEAR(a.xi1, -1.0, 1e-14);
  const CartesianPoint b = disk_billiard({0.0, 0.0, 1.0, 0.0}, -0.25, &nb);
  EXPECT_EQ(nb, 0);
  EXPECT_NEAR(b.x1, -0.5, 1e-14);
  EXPECT_NEAR(b.xi1, 1.0, 1e-14);
}

TEST(DiskBilliard, InscribedTriangleIsPeriodic) {
  // chord between vertices at angles 0 and 2 pi / 3 has length sqrt 3; speed 2 |xi| = 2
  const double d1 = (std::cos(kTwoPi / 3) - 1.0) / std::sqrt(3.0), d2 = std::sin(kTwoPi / 3) / std::sqrt(3.0);
  const double t = 3.0 * std::sqrt(3.0) / 2.0 + 0.1;
  int nb = 0;
  const CartesianPoint e = disk_billiard({1.0, 0.0, d1, d2}, t, &nb);
  EXPECT_EQ(nb, 3);
  EXPECT_NEAR(e.x1, 1.0 + 0.2 * d1, 1e-12);
  EXPECT_NEAR(e.x2, 0.2 * d2, 1e-12);
  EXPECT_NEAR(e.xi1, d1, 1e-12);
  EXPECT_NEAR(e.xi2, d2, 1e-12);
}

TEST(DiskBilliard, AgreesWithCollarTracerAndReverses) {
  const Tracer tr(CollarChart::disk());
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0), t(0.0, 2.0);
  for (int i = 0; i < 20; ++i) {
    double x1 = u(rng), x2 = u(rng);
    if (x1 * x1 + x2 * x2 > 0.6) {
      x1 *= 0.5;
      x2 *= 0.5;
    }
    const double ang = kPi * u(rng), s = t(rng);
    const CartesianPoint q{x1, x2, 0.8 * std::cos(ang), 0.8 * std::sin(ang)};
    const CartesianPoint a = disk_billiard(q, s);
    const CartesianPoint b = flow_cartesian(tr, q, s);
    EXPECT_NEAR(std::hypot(a.x1 - b.x1, a.x2 - b.x2), 0.0, 1e-7) << i;
    EXPECT_NEAR(std::hypot(a.xi1 - b.xi1, a.xi2 - b.xi2), 0.0, 1e-7) << i;
    const CartesianPoint back = disk_billiard(a, -s);
    EXPECT_NEAR(std::hypot(back.x1 - q.x1, back.x2 - q.x2), 0.0, 1e-10);
    EXPECT_NEAR(std::hypot(back.xi1 - q.xi1, back.xi2 - q.xi2), 0.0, 1e-10);
  }
}

TEST(Transport, ComposesWithFlow) {
  const auto a = sym::product(sym::position_bump(0.3, 0.1, 0.3), sym::direction_bump(0.5, 0.8));
  const double s = 0.7;
  const auto b = transport_symbol(a, s);
  for (auto q : {CartesianPoint{0.1, 0.2, 0.6, 0.3}, CartesianPoint{-0.4, 0.0, 0.9, 0.1}}) {
    const CartesianPoint e = disk_billiard(q, s);
    EXPECT_DOUBLE_EQ(b(q.x1, q.x2, q.xi1, q.xi2), a(e.x1, e.x2, e.xi1, e.xi2));
  }
  EXPECT_EQ(b(1.1, 0.0, 1.0, 0.0), 0.0);
  EXPECT_EQ(transport_symbol(a, 0.0).description, a.description);
  TransportOptions opt;
  opt.spatial_cutoff = sym::radial_band(0.0, 0.5, 0.1);
  const auto c = transport_symbol(a, s, opt);
  EXPECT_EQ(c(0.7, 0.0, 0.6, 0.3), 0.0);
}

TEST(Transport, GlidingRotation) {
  const auto a = tsym::arc_bump(0.0, 0.6);
  const auto b = rotate_tangential(a, 0.25);
  for (double x : {-0.4, 0.1, 2.0})
    for (double xi : {0.5, 1.0}) EXPECT_DOUBLE_EQ(b(0.0, x, xi), a(0.0, wrap_angle(x + 0.5 * xi), xi));
}

TEST(Judge, InvarianceGapNeedsMonotoneGaps) {
  auto r = report(ExperimentKind::InvarianceGap, {row(0.1, 0, 0, 0.04), row(0.05, 0, 0, 0.02), row(0.02, 0, 0, 0.01)});
  EXPECT_EQ(judge(r), Verdict::Pass);
  r.rows[1].gap = 0.045;
  EXPECT_EQ(judge(r), Verdict::Fail);
  r.rows = {row(0.1, 0, 0, 0.2), row(0.05, 0, 0, 0.1)};
  EXPECT_EQ(judge(r), Verdict::Fail);
  r.rows[1].ok = false;
  EXPECT_EQ(judge(r), Verdict::Inconclusive);
  EXPECT_EQ(judge(report(ExperimentKind::InvarianceGap, {})), Verdict::Inconclusive);
}

TEST(Judge, SupportEllipticTailGliding) {
  EXPECT_EQ(judge(report(ExperimentKind::SupportGap, {row(0.1, 0.1, 0.2), row(0.05, 0.1, 0.2009)})), Verdict::Pass);
  EXPECT_EQ(judge(report(ExperimentKind::SupportGap, {row(0.1, 0.1, 0.21)})), Verdict::Fail);
  EXPECT_EQ(judge(report(ExperimentKind::EllipticMass, {row(0.1, 0.3, 0), row(0.05, 0.04, 0)})), Verdict::Pass);
  EXPECT_EQ(judge(report(ExperimentKind::EllipticMass, {row(0.1, -0.06, 0)})), Verdict::Fail);
  EXPECT_EQ(judge(report(ExperimentKind::TailMass, {row(0.1, 0, 0.009), row(0.05, 0, 0.001)})), Verdict::Pass);
  EXPECT_EQ(judge(report(ExperimentKind::TailMass, {row(0.1, 0, 0.02), row(0.05, 0, 0.001)})), Verdict::Fail);
  EXPECT_EQ(judge(report(ExperimentKind::GlidingRatio, {row(0.1, 0.2, 0.39)})), Verdict::Pass);
  EXPECT_EQ(judge(report(ExperimentKind::GlidingRatio, {row(0.1, 0.2, 0.41)})), Verdict::Fail);
  EXPECT_EQ(judge(report(ExperimentKind::GlidingRatio, {row(0.1, 0.0, 0.1)})), Verdict::Inconclusive);
}

TEST(Judge, CarMassAgainstFittedConstant) {
  auto r = report(ExperimentKind::CarMass, {row(0.1, 0.01, 0), row(0.05, 0.005, 0), row(0.025, 0.0025, 0)});
  r.fit_constant = 0.1;
  EXPECT_EQ(judge(r), Verdict::Pass);
  r.rows[1].before = 0.011;  // > 2 * 0.1 * 0.05
  EXPECT_EQ(judge(r), Verdict::Fail);
}

TEST(Families, RatioFixedPointAndOrdering) {
  for (int k : {1, 3, 6}) {
    const int m = m_for_ratio(ModeFamily::Stokes, 0.5, k);
    EXPECT_EQ(m, static_cast<int>(std::floor(0.5 * mode_eigenvalue(ModeFamily::Stokes, m, k))));
  }
  FamilySpec fs;
  fs.family = ModeFamily::Laplace;
  fs.ks = {3, 1, 2};
  fs.m = 4;
  const auto specs = family_specs(fs);
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[0].k, 1);
  EXPECT_EQ(specs[2].k, 3);
  fs.ms = {10, 2};
  fs.ks = {1};
  EXPECT_EQ(family_specs(fs)[0].m, 2);
  fs.ks = {1, 2};
  EXPECT_THROW(family_specs(fs), ValidationError);
  FamilySpec both;
  both.ks = {1};
  both.m = 1;
  both.m_ratio = 0.5;
  EXPECT_THROW(family_specs(both), ValidationError);
  EXPECT_THROW(m_for_ratio(ModeFamily::Laplace, 1.2, 1), ValidationError);
}

TEST(Reports, EllipticMassDecaysOnSmallFamily) {
  FamilySpec fs;
  fs.family = ModeFamily::Laplace;
  fs.m_ratio = 0.9;
  fs.ks = {2, 4};
  const auto modes = build_family(fs);
  const auto a = tsym::product(tsym::collar_cutoff(0.2, 0.05), tsym::lambda_band(CollarChart::disk(), 1.1, 4.0, 0.05));
  const auto r = elliptic_mass(modes, a);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_LT(std::abs(r.rows[1].before), std::abs(r.rows[0].before));
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_FALSE(r.rule.empty());
  std::vector<Quasimode> rev{modes[1], modes[0]};
  EXPECT_THROW(elliptic_mass(rev, a), ValidationError);
  EXPECT_THROW(h_oscillation_tail(modes, sym::radial_band(0, 0.5, 0.1), 0.9), ValidationError);
}
