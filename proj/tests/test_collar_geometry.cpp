#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mslab/collar_geometry.hpp"

using namespace mslab;

namespace {

// r(y, xi) = 1 - xi^2 / R(y)^2 written out from the Euclidean metric in polar form.
double disk_r(double y, double xi) { return 1.0 - xi * xi / ((1.0 - y) * (1.0 - y)); }

double fd(const std::function<double(double)>& f, double t, double e = 1e-5) {
  return (f(t + e) - f(t - e)) / (2 * e);
}

}  // namespace

TEST(CollarGeometry, DiskHyperbolicPoint) {
  const auto c = CollarChart::disk();
  const RValues v = c.eval_r(0.0, 0.0, 0.5);
  EXPECT_NEAR(v.r, 0.75, 1e-15);
  EXPECT_NEAR(v.r_y, -0.5, 1e-14);
  EXPECT_NEAR(v.r_y, fd([](double y) { return disk_r(y, 0.5); }, 0.0), 1e-8);
}

TEST(CollarGeometry, DiskNormalDirection) {
  const auto c = CollarChart::disk();
  const RValues v = c.eval_r(0.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(v.r, 1.0);
  EXPECT_DOUBLE_EQ(v.r_xi, 0.0);
}

TEST(CollarGeometry, DiskTangentPoint) {
  const auto c = CollarChart::disk();
  const RValues v = c.eval_r(0.0, 0.0, 1.0);
  EXPECT_NEAR(v.r, 0.0, 1e-15);
  EXPECT_NEAR(v.r_y, -2.0, 1e-14);
}

TEST(CollarGeometry, PartialsMatchFiniteDifferencesInsideCollar) {
  const auto c = CollarChart::disk();
  for (double y : {0.0, 0.05, 0.17, 0.29})
    for (double xi : {-1.3, -0.2, 0.4, 0.9}) {
      const RValues v = c.eval_r(y, 0.7, xi);
      EXPECT_NEAR(v.r, disk_r(y, xi), 1e-14);
      EXPECT_NEAR(v.r_xi, fd([&](double t) { return disk_r(y, t); }, xi), 1e-8);
      if (y > 0.0) {
        EXPECT_NEAR(v.r_y, fd([&](double t) { return disk_r(t, xi); }, y), 1e-7);
      }
      EXPECT_EQ(v.r_x, 0.0);
    }
}

TEST(CollarGeometry, AnnulusInnerBoundaryIsConcave) {
  const auto c = CollarChart::annulus(0.5, AnnulusBoundary::Inner);
  // |xi'|_alpha = 1 at the inner circle
  EXPECT_NEAR(c.r0(0.0, 0.5), 0.0, 1e-15);
  EXPECT_GT(c.r1(0.0, 0.5), 0.0);
  // r = 1 - xi^2 / (0.5 + y)^2
  auto f = [](double y) { return 1.0 - 0.25 / ((0.5 + y) * (0.5 + y)); };
  EXPECT_NEAR(c.eval_r(0.02, 0.0, 0.5).r_y, fd(f, 0.02), 1e-7);
}

TEST(CollarGeometry, OutsideCollarThrows) {
  const auto c = CollarChart::disk(0.3);
  EXPECT_THROW((void)c.eval_r(0.31, 0.0, 0.5), OutOfCollarError);
  EXPECT_THROW((void)c.eval_r(-0.01, 0.0, 0.5), OutOfCollarError);
  EXPECT_NO_THROW((void)c.eval_r_extended(-0.01, 0.0, 0.5));
}

TEST(CollarGeometry, IteratedBracketDisk) {
  const auto c = CollarChart::disk();
  EXPECT_NEAR(c.iterated_bracket(0, 0.0, 1.0), -2.0, 1e-14);
  EXPECT_EQ(c.iterated_bracket(1, 0.0, 1.0), 0.0);
}

TEST(CollarGeometry, IteratedBracketModelAgainstNestedDifferences) {
  // r0 = zeta, r1 = z: {r0, r1} = d_zeta r0 d_z r1 - d_z r0 d_zeta r1 = 1
  const auto c = CollarChart::model({{0, 1, 0, 1.0}, {1, 0, 1, 1.0}});
  EXPECT_DOUBLE_EQ(c.iterated_bracket(0, 0.0, 0.0), 0.0);
  EXPECT_NEAR(c.iterated_bracket(1, 0.0, 0.0), 1.0, 1e-14);
  EXPECT_NEAR(c.iterated_bracket_numeric(1, 0.0, 0.0), 1.0, 1e-6);

  // r0 = z^2/2 + zeta, r1 = z zeta - 0.3 zeta^2, brackets by hand:
  //   H r1   = zeta - z^2 + 0.6 z zeta
  //   H^2 r1 = -3 z + 0.6 zeta - 0.6 z^2
  const auto d = CollarChart::model({{2, 0, 0, 0.5}, {0, 1, 0, 1.0}, {1, 1, 1, 1.0}, {0, 2, 1, -0.3}});
  const double z = 0.3, ze = -0.2;
  const double hand[3] = {z * ze - 0.3 * ze * ze, ze - z * z + 0.6 * z * ze, -3 * z + 0.6 * ze - 0.6 * z * z};
  for (int j = 0; j <= 2; ++j) {
    EXPECT_NEAR(d.iterated_bracket(j, z, ze), hand[j], 1e-14) << j;
    // nested differences lose digits with each level
    EXPECT_NEAR(d.iterated_bracket_numeric(j, z, ze), hand[j], 1e-4) << j;
  }
}

TEST(CollarGeometry, BracketBudget) {
  const auto c = CollarChart::model({{0, 1, 0, 1.0}, {1, 0, 1, 1.0}}, 1.0, 4);
  EXPECT_NO_THROW((void)c.iterated_bracket(2, 0.0, 0.0));
  EXPECT_THROW((void)c.iterated_bracket(3, 0.0, 0.0), OrderBudgetError);
}

TEST(CollarGeometry, HamiltonianField) {
  const auto c = CollarChart::disk();
  const PhaseVelocity v = c.hamiltonian_field({0.1, 0.0, 0.3, 0.8});
  EXPECT_DOUBLE_EQ(v.dy, 0.6);
  EXPECT_DOUBLE_EQ(v.dxi, 0.0);
  EXPECT_EQ(c.hamiltonian_field({0.0, 1.0, 0.0, 0.4}).dy, 0.0);
  EXPECT_NEAR(c.hamiltonian_field({0.0, 0.0, 0.0, 1.0}).deta, -2.0, 1e-14);
}

TEST(CollarGeometry, AngularMomentumConservedPointwise) {
  const auto c = CollarChart::disk();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uy(0.0, 0.3), ux(-kPi, kPi), uv(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) EXPECT_EQ(c.hamiltonian_field({uy(rng), ux(rng), uv(rng), uv(rng)}).dxi, 0.0);
}

TEST(CollarGeometry, CartesianRoundTrip) {
  for (const auto& c : {CollarChart::disk(), CollarChart::annulus(0.4, AnnulusBoundary::Inner)}) {
    const PhasePoint p{0.05, 0.9, -0.4, 0.3};
    const CartesianPoint q = c.to_cartesian(p);
    const PhasePoint b = c.from_cartesian(q);
    EXPECT_NEAR(b.y, p.y, 1e-14);
    EXPECT_NEAR(b.x, p.x, 1e-14);
    EXPECT_NEAR(b.eta, p.eta, 1e-14);
    EXPECT_NEAR(b.xi, p.xi, 1e-14);
    // on shell in both descriptions: eta^2 - r = |xi|^2 - 1 up to sign convention
    const double r = c.eval_r(p.y, p.x, p.xi).r;
    EXPECT_NEAR(p.eta * p.eta - r, q.xi1 * q.xi1 + q.xi2 * q.xi2 - 1.0, 1e-14);
  }
}

TEST(CollarGeometry, ModelFileParsing) {
  std::istringstream ok("# comment\ncollar_width 0.5\nmax_order 6\nterm 0 1 0 1\nterm 1 0 1 1\n");
  const auto c = CollarChart::parse_model(ok);
  EXPECT_EQ(c.kind(), ChartKind::Model);
  EXPECT_DOUBLE_EQ(c.collar_width(), 0.5);
  EXPECT_EQ(c.max_derivative_order(), 6);
  EXPECT_FALSE(c.has_metric());

  std::istringstream bad("term 0 1\n");
  EXPECT_THROW(CollarChart::parse_model(bad), ValidationError);
  std::istringstream empty("collar_width 1\n");
  EXPECT_THROW(CollarChart::parse_model(empty), ValidationError);
  std::istringstream unknown("radius 3\n");
  EXPECT_THROW(CollarChart::parse_model(unknown), ValidationError);
}

TEST(CollarGeometry, InvalidCharts) {
  EXPECT_THROW(CollarChart::disk(1.2), ValidationError);
  EXPECT_THROW(CollarChart::annulus(1.5, AnnulusBoundary::Outer), ValidationError);
  EXPECT_THROW(CollarChart::annulus(0.5, AnnulusBoundary::Outer, 0.6), ValidationError);
  EXPECT_THROW(CollarChart::disk(0.3, 3), ValidationError);
}
