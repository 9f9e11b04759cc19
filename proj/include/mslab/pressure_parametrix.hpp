#pragma once

// Boundary-layer parametrix for harmonic functions near a circular boundary
// component, the exact disk Poisson extension used as its oracle, the
// Dirichlet-Neumann map, and strip-concentration diagnostics for pressures.
//
// On a circle collar -h^2 Delta = -(h^2 d_y^2 + h^2 H d_y) + lambda^2 with
// lambda = |xi'| / rho(y) and H = orient / rho. The ansatz A = A0 + h A1 with
// A0 = exp(-y lambda / h) phi(lambda) leaves
//   (h^2 d_y^2 - lambda^2) A1 = -(1/h) [(h^2 d_y^2 - lambda^2) A0 + h^2 H d_y A0].

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"
#include "mslab/ode.hpp"
#include "mslab/quasimode.hpp"
#include "mslab/spectral.hpp"

namespace mslab {

// ---- exact oracle on the unit circle ------------------------------------------

namespace detail {

inline std::vector<cplx> circle_fft(const std::vector<cplx>& f) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.fwd(out, f);
  return out;
}

inline std::vector<cplx> circle_ifft(const std::vector<cplx>& f) {
  Eigen::FFT<double> fft;
  std::vector<cplx> out;
  fft.inv(out, f);
  return out;
}

inline int circle_wavenumber(int n, int size) { return n <= size / 2 ? n : n - size; }

}  // namespace detail

/// Harmonic extension of boundary samples q0(theta_l), theta_l = 2 pi l / N,
/// evaluated on the circles of radius rs. Row i holds radius rs[i].
inline Eigen::MatrixXcd poisson_extend(const std::vector<cplx>& q0, const std::vector<double>& rs) {
  const int nt = static_cast<int>(q0.size());
  if (nt == 0) throw ValidationError("empty boundary data");
  const auto c = detail::circle_fft(q0);
  Eigen::MatrixXcd out(rs.size(), nt);
  std::vector<cplx> row(nt);
  for (std::size_t i = 0; i < rs.size(); ++i) {
    for (int n = 0; n < nt; ++n) row[n] = c[n] * ipow(rs[i], std::abs(detail::circle_wavenumber(n, nt)));
    const auto v = detail::circle_ifft(row);
    for (int l = 0; l < nt; ++l) out(i, l) = v[l];
  }
  return out;
}

/// Same on a polar grid whose angular size matches q0.
inline Field poisson_extend(const std::vector<cplx>& q0, const PolarGrid& g) {
  if (static_cast<int>(q0.size()) != g.n_theta()) throw ValidationError("boundary data does not match the grid");
  std::vector<double> rs(g.n_r());
  for (int i = 0; i < g.n_r(); ++i) rs[i] = g.r(i);
  return poisson_extend(q0, rs);
}

/// Dirichlet-Neumann map of the unit disk: multiplier |n| on e^{i n theta}.
inline std::vector<cplx> dtn(const std::vector<cplx>& q0) {
  const int nt = static_cast<int>(q0.size());
  auto c = detail::circle_fft(q0);
  for (int n = 0; n < nt; ++n) c[n] *= std::abs(detail::circle_wavenumber(n, nt));
  return detail::circle_ifft(c);
}

/// Discrete L^2 inner product on the unit circle.
inline cplx circle_inner(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s * (kTwoPi / static_cast<double>(a.size()));
}

// ---- cutoff -----------------------------------------------------------------------

/// phi_delta: 0 for lambda <= delta / 2, 1 for lambda >= delta, degree-7 polynomial step between.
struct LambdaCutoff {
  double delta = 0.25;

  [[nodiscard]] double operator()(double l) const { return smooth::poly_step(t(l)); }
  [[nodiscard]] double d1(double l) const {
    const double s = t(l);
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 140.0 * ipow(s, 3) * ipow(1.0 - s, 3) / (0.5 * delta);
  }
  [[nodiscard]] double d2(double l) const {
    const double s = t(l);
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 420.0 * s * s * (1.0 - s) * (1.0 - s) * (1.0 - 2.0 * s) / (0.25 * delta * delta);
  }

 private:
  [[nodiscard]] double t(double l) const { return (l - 0.5 * delta) / (0.5 * delta); }
};

// ---- parametrix symbol --------------------------------------------------------------

/// A1 along y for one xi', stored on a uniform mesh with derivatives.
struct A1Profile {
  double y_end = 0.0;  ///< A1 is taken as 0 beyond this point
  std::vector<double> y, v, dv;

  [[nodiscard]] double operator()(double yy) const {
    if (y.size() < 2 || yy >= y_end || yy < 0.0) return 0.0;
    const double dy = y[1] - y[0];
    int i = std::min(static_cast<int>(yy / dy), static_cast<int>(y.size()) - 2);
    const double t = (yy - y[i]) / dy;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    return h00 * v[i] + h10 * dy * dv[i] + h01 * v[i + 1] + h11 * dy * dv[i + 1];
  }
};

struct ParametrixOptions {
  double delta0 = 0.25;
  int order = 0;
  double eps0 = 0.0;            ///< layer depth; 0 = collar width
  double exponent_cap = 200.0;  ///< A0 < e^{-cap} is treated as zero
  int mesh = 0;                 ///< A1 mesh nodes; 0 = automatic
  ode::Tolerance tol{1e-10, 1e-300};
};

struct A0Jet {
  double v = 0.0, d1 = 0.0, d2 = 0.0;
};

class ParametrixSymbol {
 public:
  ParametrixSymbol(CollarChart chart, ParametrixOptions opt) : chart_(std::move(chart)), opt_(opt) {
    if (!chart_.has_metric()) throw ValidationError("the parametrix needs a circular collar chart");
    if (opt_.order != 0 && opt_.order != 1) throw ValidationError("parametrix order must be 0 or 1");
    if (!(opt_.delta0 > 0.0)) throw ValidationError("delta0 must be positive");
    if (opt_.eps0 == 0.0) opt_.eps0 = chart_.collar_width();
    if (!(opt_.eps0 > 0.0) || opt_.eps0 > chart_.collar_width())
      throw ValidationError("eps0 must lie in (0, collar width]");
  }

  [[nodiscard]] int order() const { return opt_.order; }
  [[nodiscard]] double delta0() const { return opt_.delta0; }
  [[nodiscard]] double eps0() const { return opt_.eps0; }
  [[nodiscard]] const CollarChart& chart() const { return chart_; }
  [[nodiscard]] LambdaCutoff cutoff() const { return {opt_.delta0}; }

  [[nodiscard]] double lambda(double y, double xi) const { return chart_.lambda(y, xi); }

  /// A0 and its first two y-derivatives.
  [[nodiscard]] A0Jet a0_jet(double y, double xi, double h) const {
    const double rho = chart_.radius_at(y), o = chart_.orientation(), ax = std::abs(xi);
    const double l = ax / rho, ly = -ax * o / (rho * rho), lyy = 2.0 * ax / (rho * rho * rho);
    const LambdaCutoff phi{opt_.delta0};
    const double p = phi(l), p1 = phi.d1(l) * ly, p2 = phi.d2(l) * ly * ly + phi.d1(l) * lyy;
    A0Jet j;
    if (p == 0.0 && p1 == 0.0 && p2 == 0.0) return j;
    const double g1 = l + y * ly, g2 = 2.0 * ly + y * lyy;
    const double e = std::exp(-y * l / h);
    const double e1 = -g1 / h * e, e2 = (g1 * g1 / (h * h) - g2 / h) * e;
    j.v = e * p;
    j.d1 = e1 * p + e * p1;
    j.d2 = e2 * p + 2.0 * e1 * p1 + e * p2;
    return j;
  }

  [[nodiscard]] double a0(double y, double /*x*/, double xi, double h) const { return a0_jet(y, xi, h).v; }

  /// Right-hand side of the A1 equation.
  [[nodiscard]] double forcing(double y, double xi, double h) const {
    const double rho = chart_.radius_at(y), o = chart_.orientation(), ax = std::abs(xi);
    const double l = ax / rho, ly = -ax * o / (rho * rho), lyy = 2.0 * ax / (rho * rho * rho);
    const LambdaCutoff phi{opt_.delta0};
    const double p = phi(l), p1 = phi.d1(l) * ly, p2 = phi.d2(l) * ly * ly + phi.d1(l) * lyy;
    if (p == 0.0 && p1 == 0.0 && p2 == 0.0) return 0.0;
    const double g1 = l + y * ly, g2 = 2.0 * ly + y * lyy;
    const double e = std::exp(-y * l / h);
    // (h^2 d^2 - l^2) e = [(g1^2 - l^2) - h g2] e, with g1^2 - l^2 = y ly (2 l + y ly)
    const double pe = (y * ly * (2.0 * l + y * ly) - h * g2) * e;
    const double e1 = -g1 / h * e;
    const double pa0 = pe * p + h * h * (2.0 * e1 * p1 + e * p2);
    const double hterm = h * h * (o / rho) * (e1 * p + e * p1);
    return -(pa0 + hterm) / h;
  }

  /// Depth where y lambda / h reaches the exponent cap, clipped to eps0.
  [[nodiscard]] double layer_end(double xi, double h) const {
    auto g = [&](double y) { return y * chart_.lambda(y, xi) / h; };
    if (g(opt_.eps0) <= opt_.exponent_cap) return opt_.eps0;
    double lo = 0.0, hi = opt_.eps0;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > opt_.exponent_cap ? hi : lo) = mid;
    }
    return hi;
  }

  /// A1(., xi') on [0, y_end]: backward integration from y_end with zero
  /// terminal data, plus the decaying homogeneous solution fixing A1(0) = 0.
  [[nodiscard]] A1Profile a1_profile(double xi, double h) const {
    A1Profile prof;
    const double l0 = chart_.lambda(0.0, xi);
    if (l0 <= 0.5 * opt_.delta0 && chart_.lambda(opt_.eps0, xi) <= 0.5 * opt_.delta0) return prof;
    const double ye = layer_end(xi, h);
    prof.y_end = ye;
    int n = opt_.mesh;
    if (n == 0) n = std::clamp(static_cast<int>(std::ceil(12.0 * ye * chart_.lambda(ye, xi) / h)), 200, 20000);
    const double dy = ye / n;
    using S = ode::State<4>;  // particular (a, a'), decaying homogeneous (b, b')
    auto f = [&](double y, const S& s) -> S {
      const double l = chart_.lambda(y, xi);
      const double l2 = l * l / (h * h);
      return {s[1], l2 * s[0] + forcing(y, xi, h) / (h * h), s[3], l2 * s[2]};
    };
    S st{0.0, 0.0, 1.0, 0.0};
    {
      const double rho = chart_.radius_at(ye), o = chart_.orientation(), ax = std::abs(xi);
      st[3] = -(ax / rho - ye * ax * o / (rho * rho)) / h;
    }
    std::vector<S> states(n + 1);
    states[n] = st;
    double step = dy / 4.0;
    for (int i = n; i > 0; --i) {
      const double y0 = (i - 1) * dy;
      double y = i * dy;
      S trial;
      int guard = 0;
      while (y - y0 > 1e-14 * dy) {
        const double hs = std::min(step, y - y0);
        const double err = dp45_time_step(f, y, st, -hs, trial, opt_.tol);
        if (err <= 1.0) {
          st = trial;
          y -= hs;
        }
        step = ode::next_step(hs, err);
        if (++guard > 100000) throw IntegratorError("A1 integration stalled at xi' = " + std::to_string(xi));
      }
      states[i - 1] = st;
    }
    const double c = states[0][0] / states[0][2];
    if (!std::isfinite(c)) throw IntegratorError("A1 superposition failed at xi' = " + std::to_string(xi));
    prof.y.resize(n + 1);
    prof.v.resize(n + 1);
    prof.dv.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      prof.y[i] = i * dy;
      prof.v[i] = states[i][0] - c * states[i][2];
      prof.dv[i] = states[i][1] - c * states[i][3];
    }
    prof.v[0] = 0.0;
    return prof;
  }

  [[nodiscard]] double a1(double y, double /*x*/, double xi, double h) const { return a1_profile(xi, h)(y); }

 private:
  // One DP5(4) step of a non-autonomous system y' = f(t, y).
  template <class F, std::size_t N>
  static double dp45_time_step(const F& f, double t, const ode::State<N>& y, double h, ode::State<N>& out,
                               const ode::Tolerance& tol) {
    auto g = [&](const ode::State<N + 1>& s) {
      ode::State<N> inner;
      for (std::size_t i = 0; i < N; ++i) inner[i] = s[i];
      const auto d = f(s[N], inner);
      ode::State<N + 1> r;
      for (std::size_t i = 0; i < N; ++i) r[i] = d[i];
      r[N] = 1.0;
      return r;
    };
    ode::State<N + 1> s, so;
    for (std::size_t i = 0; i < N; ++i) s[i] = y[i];
    s[N] = t;
    const double err = ode::dp45_step(g, s, h, so, tol);
    for (std::size_t i = 0; i < N; ++i) out[i] = so[i];
    return err;
  }

  CollarChart chart_;
  ParametrixOptions opt_;
};

inline ParametrixSymbol build_parametrix(const CollarChart& chart, double delta0 = 0.25, int order = 0) {
  ParametrixOptions opt;
  opt.delta0 = delta0;
  opt.order = order;
  return ParametrixSymbol(chart, opt);
}

/// Op_h(A0 [+ h A1]) q0 on the circles y = ys[i] (rows); x'-independent symbols act as
/// multipliers on the angular modes of q0. Rows with y > eps0 are zero.
inline Eigen::MatrixXcd apply_parametrix(const ParametrixSymbol& p, const std::vector<cplx>& q0, double h,
                                         const std::vector<double>& ys) {
  const int nt = static_cast<int>(q0.size());
  const auto c = detail::circle_fft(q0);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(ys.size(), nt);
  std::vector<std::vector<double>> mult(ys.size(), std::vector<double>(nt, 0.0));
  for (int n = 0; n < nt; ++n) {
    if (std::abs(c[n]) == 0.0) continue;
    const double xi = h * detail::circle_wavenumber(n, nt);
    // cutoff applied to the data first, at the boundary
    const double chi0 = p.cutoff()(p.lambda(0.0, xi));
    if (chi0 == 0.0) continue;
    A1Profile prof;
    if (p.order() == 1) prof = p.a1_profile(xi, h);
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (ys[i] > p.eps0()) continue;
      double a = p.a0(ys[i], 0.0, xi, h);
      if (p.order() == 1) a += h * prof(ys[i]);
      mult[i][n] = chi0 * a;
    }
  }
  std::vector<cplx> row(nt);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    for (int n = 0; n < nt; ++n) row[n] = c[n] * mult[i][n];
    const auto v = detail::circle_ifft(row);
    for (int l = 0; l < nt; ++l) out(i, l) = v[l];
  }
  return out;
}

/// Op_h(chi_delta(lambda(y, xi'))) applied to each row (row i at depth ys[i]).
inline Eigen::MatrixXcd apply_lambda_cutoff(const CollarChart& chart, double delta, const Eigen::MatrixXcd& f,
                                            double h, const std::vector<double>& ys) {
  const int nt = static_cast<int>(f.cols());
  const LambdaCutoff chi{delta};
  Eigen::MatrixXcd out(f.rows(), nt);
  std::vector<cplx> row(nt);
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    for (int l = 0; l < nt; ++l) row[l] = f(i, l);
    auto c = detail::circle_fft(row);
    for (int n = 0; n < nt; ++n) c[n] *= chi(chart.lambda(ys[i], h * detail::circle_wavenumber(n, nt)));
    const auto v = detail::circle_ifft(c);
    for (int l = 0; l < nt; ++l) out(i, l) = v[l];
  }
  return out;
}

struct ParametrixError {
  int m = 0;
  double h = 0.0;
  int order = 0;
  double abs_error = 0.0;
  double ref_norm = 0.0;
  double rel_error = 0.0;
};

/// L^2(collar) error of the parametrix on q0 = e^{i m theta} against the
/// cutoff Poisson extension, disk only.
inline ParametrixError parametrix_error(const ParametrixSymbol& p, int m, double h, int n_y = 0) {
  const CollarChart& ch = p.chart();
  if (ch.kind() != ChartKind::Disk) throw ValidationError("the Poisson oracle is implemented for the disk only");
  if (m < 0) throw ValidationError("m must be nonnegative");
  int nt = fft_size(2 * m + 8);
  if (nt % 2) nt = fft_size(nt + 1);
  std::vector<cplx> q0(nt);
  for (int l = 0; l < nt; ++l) q0[l] = std::exp(cplx(0.0, m * kTwoPi * l / nt));
  if (n_y == 0) n_y = std::clamp(static_cast<int>(std::ceil(6.0 * p.eps0() / h)), 200, 4000);
  std::vector<double> ys, ws;
  gauss_legendre(n_y, 0.0, p.eps0(), ys, ws);
  std::vector<double> rs(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) rs[i] = ch.radius_at(ys[i]);
  const Eigen::MatrixXcd ref = apply_lambda_cutoff(ch, p.delta0(), poisson_extend(q0, rs), h, ys);
  const Eigen::MatrixXcd par = apply_parametrix(p, q0, h, ys);
  double e2 = 0.0, r2 = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double w = ws[i] * rs[i] * kTwoPi / nt;
    e2 += w * (par.row(i) - ref.row(i)).squaredNorm();
    r2 += w * ref.row(i).squaredNorm();
  }
  ParametrixError out;
  out.m = m;
  out.h = h;
  out.order = p.order();
  out.abs_error = std::sqrt(e2);
  out.ref_norm = std::sqrt(r2);
  out.rel_error = out.ref_norm > 0.0 ? out.abs_error / out.ref_norm : 0.0;
  return out;
}

// ---- strip concentration --------------------------------------------------------------

/// f(y, theta) on the collar.
using CollarSampler = std::function<cplx(double, double)>;

struct BandMassOptions {
  double delta0 = 0.25;
  double eps0 = 0.0;  ///< 0 = collar width
  int n_theta = 0;
  int n_y = 0;
};

/// int_{y0}^{eps0} || Op_h(chi_delta) f(y, .) ||^2_{L^2(dx')} dy by Gauss-Legendre in y.
inline double band_mass(const CollarChart& chart, const CollarSampler& f, double y0, double h, BandMassOptions opt) {
  if (!chart.has_metric()) throw ValidationError("band_mass needs a circular collar chart");
  const double eps0 = opt.eps0 == 0.0 ? chart.collar_width() : opt.eps0;
  if (!(y0 >= 0.0) || y0 >= eps0) throw ValidationError("y0 must lie in [0, eps0)");
  if (opt.n_theta == 0) throw ValidationError("band_mass needs an angular resolution");
  int nt = opt.n_theta;
  const int ny = opt.n_y ? opt.n_y : std::clamp(static_cast<int>(std::ceil(8.0 * (eps0 - y0) / h)), 64, 4000);
  std::vector<double> ys, ws;
  gauss_legendre(ny, y0, eps0, ys, ws);
  Eigen::MatrixXcd rows(ny, nt);
  for (int i = 0; i < ny; ++i)
    for (int l = 0; l < nt; ++l) rows(i, l) = f(ys[i], kTwoPi * l / nt);
  const Eigen::MatrixXcd cut = apply_lambda_cutoff(chart, opt.delta0, rows, h, ys);
  double s = 0.0;
  for (int i = 0; i < ny; ++i) s += ws[i] * cut.row(i).squaredNorm() * (kTwoPi / nt);
  return s;
}

/// Pressure of a disk mode as a collar sampler.
inline CollarSampler pressure_sampler(const Quasimode& md, const CollarChart& chart) {
  return [&md, &chart](double y, double th) {
    const double r = chart.radius_at(y);
    return md.at(r * std::cos(th), r * std::sin(th)).q;
  };
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw ValidationError("line fit needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace mslab
