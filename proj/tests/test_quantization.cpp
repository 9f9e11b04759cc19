#include <gtest/gtest.h>

#include <cmath>

#include "mslab/quantization.hpp"

using namespace mslab;

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, int n = 4000) {
  const double dx = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
  return s * dx / 3.0;
}

// (1 / L^2) int_disk A J_m(lam r) e^{i m th} e^{-i xi.x} dx by midpoint in r, trapezoid in theta
cplx coefficient_oracle(const Quasimode& md, double L, double xi1, double xi2) {
  const int nr = 800, nt = 256;
  cplx s = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double r = (i + 0.5) / nr;
    const double rad = std::cyl_bessel_j(static_cast<double>(md.m), md.lambda * r);
    for (int l = 0; l < nt; ++l) {
      const double th = kTwoPi * l / nt;
      s += rad * std::exp(cplx(0.0, md.m * th - xi1 * r * std::cos(th) - xi2 * r * std::sin(th))) * r;
    }
  }
  return md.amplitude() * s * (1.0 / nr) * (kTwoPi / nt) / (L * L);
}

InteriorSymbol x1_squared() {
  InteriorSymbol a;
  a.eval = [](double x1, double, double, double) { return x1 * x1; };
  a.xi_dependent = false;
  a.description = "x1^2";
  return a;
}

}  // namespace

TEST(Quantization, SpectrumMatchesDirectFourierIntegral) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 2, 1, 0, 0});
  const ModeSpectrum sp = mode_spectrum(md, 2.0);
  const CartesianGrid& g = sp.grid;
  for (auto [a, b] : {std::pair{0, 0}, std::pair{1, 0}, std::pair{2, 3}, std::pair{g.n - 2, 1}, std::pair{4, g.n - 2}}) {
    const cplx want = coefficient_oracle(md, g.length(), g.xi(a), g.xi(b));
    EXPECT_NEAR(std::abs(sp.comps[0](a, b) - want), 0.0, 1e-6) << a << ',' << b;
  }
}

TEST(Quantization, FullBandPairingIsNorm) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 3, 2, 0, 0});
  const cplx v = pairing(sym::momentum_band(0.0, 6.0, 0.1), md);
  EXPECT_NEAR(v.real(), 1.0, 2e-3);
  EXPECT_NEAR(v.imag(), 0.0, 1e-12);
  const cplx c = pairing(sym::constant(2.5), md);
  EXPECT_NEAR(c.real(), 2.5, 1e-10);
}

TEST(Quantization, MultiplicationSymbolAgainstRadialIntegral) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 1, 2, 0, 0});
  // |u|^2 is radial, so the cos^2 average gives pi A^2 int r^3 J_m^2 dr
  const double A = md.amplitude();
  const double want = kPi * A * A * simpson([&](double r) {
    return r * r * r * std::pow(std::cyl_bessel_j(1.0, md.lambda * r), 2);
  }, 0.0, 1.0);
  EXPECT_NEAR(pairing(x1_squared(), md).real(), want, 1e-8);
}

TEST(Quantization, GeneralPathMatchesSeparableForm) {
  // a(x) b(xi): (Op_h(a) u | u) = (b(hD) u | a u)
  const Quasimode md = make_mode({ModeFamily::Stokes, 2, 2, 0, 0});
  const auto psi = sym::position_bump(0.2, 0.0, 0.4);
  const auto b = sym::momentum_band(0.5, 1.5, 0.2);
  const ModeSpectrum sp = mode_spectrum(md, 2.2);
  const CartesianGrid& g = sp.grid;
  cplx want = 0.0;
  for (const auto& c : sp.comps) {
    Eigen::MatrixXcd m = c;
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) m(i, j) *= b(0, 0, md.h * g.xi(i), md.h * g.xi(j));
    const CField bu = cartesian_synthesize(m, g), u = cartesian_synthesize(c, g);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) want += bu(i, j) * psi(g.x(i), g.x(j), 0, 0) * std::conj(u(i, j));
  }
  want *= g.dx() * g.dx();
  const cplx got = pairing(sym::product(psi, b), sp);
  EXPECT_NEAR(std::abs(got - want), 0.0, 1e-10 * std::abs(want) + 1e-14);
  EXPECT_GT(std::abs(want), 1e-3);
}

TEST(Quantization, ApplyOperatorAgreesWithPairing) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 4, 1, 0, 0});
  const auto a = sym::product(sym::product(sym::radial_band(0.3, 0.6, 0.1), sym::direction_bump(0.0, 1.0)),
                              sym::momentum_band(0.0, 2.0, 0.3));
  const ModeSpectrum sp = mode_spectrum(md, 3.0);
  const CartesianGrid& g = sp.grid;
  const CField u = cartesian_synthesize(sp.comps[0], g);
  const CField au = apply_interior_op(a, u, g, md.h);
  const cplx direct = (au.array() * u.conjugate().array()).sum() * g.dx() * g.dx();
  EXPECT_NEAR(std::abs(pairing(a, sp) - direct), 0.0, 1e-10);
}

TEST(Quantization, InteriorSupportMargin) {
  const CartesianGrid g{64, 1.5};
  EXPECT_THROW(check_interior_support(sym::radial_band(0.0, 0.99, 0.02), g), SupportError);
  EXPECT_NO_THROW(check_interior_support(sym::radial_band(0.0, 0.7, 0.05), g));
  EXPECT_NO_THROW(check_interior_support(sym::momentum_band(0.0, 1.0, 0.1), g));
}

TEST(Quantization, TangentialOperatorIsDiagonalOnFourierModes) {
  const PolarGrid g(24, 64);
  Field f = g.zeros();
  for (int i = 0; i < g.n_r(); ++i)
    for (int l = 0; l < g.n_theta(); ++l) f(i, l) = g.r(i) * std::exp(cplx(0.0, 5.0 * g.theta(l)));
  const auto band = tsym::xi_band(0.4, 0.6, 0.05);
  // xi' = h n = 0.5 inside the plateau, 1.0 outside
  EXPECT_LT((apply_tangential_op(band, f, g, 0.1) - f).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(apply_tangential_op(band, f, g, 0.2).cwiseAbs().maxCoeff(), 1e-12);
  const Field c = apply_tangential_op(tsym::constant(3.0), f, g, 0.1);
  EXPECT_LT((c - 3.0 * f).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Quantization, TangentialMultiplicationMatchesQuadrature) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 6, 1, 0, 0});
  const auto cut = tsym::collar_cutoff(0.1, 0.3);
  const double A = md.amplitude();
  const double want = kTwoPi * A * A * simpson([&](double r) {
    return cut(1.0 - r, 0.0, 0.0) * r * std::pow(std::cyl_bessel_j(6.0, md.lambda * r), 2);
  }, 0.0, 1.0, 20000);
  // exp(-1/t) ramps are Gevrey, so grid quadrature converges slowly
  EXPECT_NEAR(pairing(cut, md).real(), want, 1e-4 * want);
}

TEST(Quantization, SeriesExtrapolationAndValidation) {
  const std::vector<double> h{0.4, 0.2, 0.1, 0.05};
  std::vector<cplx> v;
  for (double x : h) v.emplace_back(0.3 + 2.0 * x, -x);
  const PairingSeries s = make_series(h, v);
  ASSERT_TRUE(s.limit);
  EXPECT_NEAR(std::abs(*s.limit - cplx(0.3, 0.0)), 0.0, 1e-12);
  ASSERT_EQ(s.gaps.size(), 3u);
  EXPECT_NEAR(s.gaps[0], std::abs(v[1] - v[0]), 1e-15);
  EXPECT_FALSE(make_series({0.5, 0.25}, {1.0, 1.0}).limit);
  EXPECT_THROW(make_series({0.1, 0.2}, {1.0, 1.0}), ValidationError);
  EXPECT_THROW(make_series({0.1}, {1.0, 1.0}), ValidationError);
}

TEST(Quantization, MeasureSequenceOrdersByH) {
  std::vector<Quasimode> modes;
  for (int k = 1; k <= 3; ++k) modes.push_back(make_mode({ModeFamily::Laplace, 0, k, 0, 0}));
  const PairingSeries s = measure_sequence(sym::constant(1.0), modes);
  ASSERT_EQ(s.entries.size(), 3u);
  for (const auto& e : s.entries) EXPECT_NEAR(e.value.real(), 1.0, 1e-10);
  std::reverse(modes.begin(), modes.end());
  EXPECT_THROW(measure_sequence(sym::constant(1.0), modes), ValidationError);
}

TEST(Quantization, InteriorTailIsMonotoneAndStartsAtLocalMass) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 2, 3, 0, 0});
  const auto psi = sym::radial_band(0.0, 0.4, 0.3);
  const auto t = interior_tail(md, psi, {0.0, 1.0, 2.0, 3.0});
  // R = 0 is the full L^2 mass of psi u
  const double A = md.amplitude();
  const double want = kTwoPi * A * A * simpson([&](double r) {
    const double p = psi(r, 0.0, 0.0, 0.0);
    return p * p * r * std::pow(std::cyl_bessel_j(2.0, md.lambda * r), 2);
  }, 0.0, 1.0, 20000);
  EXPECT_NEAR(t[0], want, 1e-4 * want);
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LE(t[i], t[i - 1]);
  EXPECT_LT(t[3], 1e-3 * t[0]);
  EXPECT_THROW(interior_tail(md, sym::momentum_band(0, 1, 0.1), {1.0}), ValidationError);
}

TEST(Quantization, HusimiMassNearOne) {
  const Quasimode md = make_mode({ModeFamily::Laplace, 3, 1, 0, 0});
  const HusimiResult hr = husimi_grid(md);
  for (double d : hr.density) ASSERT_GE(d, 0.0);
  EXPECT_NEAR(hr.total_mass(), 1.0, 0.1);
}
