#pragma once

// Semiclassical quantization and defect-measure pairings.
//
// Interior operators use the left quantization
//   Op_h(a) f(x) = (2 pi)^{-2} int e^{i x xi} a(x, h xi) f^(xi) dxi
// on the periodic box [-1.5, 1.5]^2, with f extended by zero outside the
// domain. Tangential operators act on rows of the polar grid (fixed y) with
// xi' = h n on the angular Fourier mode n.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"
#include "mslab/quasimode.hpp"
#include "mslab/spectral.hpp"
#include "mslab/symbols.hpp"

namespace mslab {

using CField = Eigen::MatrixXcd;  // rows: x1 index, cols: x2 index

/// Uniform periodic grid on [-half, half)^2 with an even number of points.
struct CartesianGrid {
  int n = 64;
  double half = 1.5;

  [[nodiscard]] double length() const { return 2.0 * half; }
  [[nodiscard]] double dx() const { return length() / n; }
  [[nodiscard]] double x(int j) const { return -half + j * dx(); }
  /// Signed wavenumber of storage index idx.
  [[nodiscard]] int k(int idx) const { return idx < n / 2 ? idx : idx - n; }
  [[nodiscard]] double xi(int idx) const { return kTwoPi * k(idx) / length(); }

  /// Smallest 2-3-5 smooth grid holding every lattice frequency with |h xi| <= band, plus padding.
  static CartesianGrid for_band(double band, double h, int pad = 64) {
    const int kmax = static_cast<int>(std::ceil(band / h * 3.0 / kTwoPi));
    int n = fft_size(2 * kmax + pad);
    if (n % 2) n = fft_size(n + 1);
    return {n, 1.5};
  }
};

namespace detail {

inline void fft_rows_cols(Eigen::MatrixXcd& a, bool inverse) {
  Eigen::FFT<double> fft;
  const int n1 = static_cast<int>(a.rows()), n2 = static_cast<int>(a.cols());
  std::vector<cplx> in(std::max(n1, n2)), out;
  for (int i = 0; i < n1; ++i) {
    in.resize(n2);
    for (int j = 0; j < n2; ++j) in[j] = a(i, j);
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    for (int j = 0; j < n2; ++j) a(i, j) = out[j];
  }
  for (int j = 0; j < n2; ++j) {
    in.resize(n1);
    for (int i = 0; i < n1; ++i) in[i] = a(i, j);
    if (inverse) fft.inv(out, in); else fft.fwd(out, in);
    for (int i = 0; i < n1; ++i) a(i, j) = out[i];
  }
}

}  // namespace detail

/// Fourier coefficients c_k with f(x_j) = sum_k c_k e^{i xi_k . x_j}.
inline Eigen::MatrixXcd cartesian_coefficients(const CField& f, const CartesianGrid& g) {
  Eigen::MatrixXcd c = f;
  detail::fft_rows_cols(c, false);
  const double scale = 1.0 / (static_cast<double>(g.n) * g.n);
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) c(a, b) *= ((a + b) % 2 ? -scale : scale);  // e^{i xi_k 1.5} = (-1)^k
  return c;
}

inline CField cartesian_synthesize(const Eigen::MatrixXcd& c, const CartesianGrid& g) {
  CField f = c;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b)
      if ((a + b) % 2) f(a, b) = -f(a, b);
  detail::fft_rows_cols(f, true);
  return f * (static_cast<double>(g.n) * g.n);
}

/// Samples of a mode's Cartesian velocity components on the grid (zero outside the disk).
inline std::vector<CField> sample_mode(const Quasimode& md, const CartesianGrid& g) {
  const int nc = md.family == ModeFamily::Laplace ? 1 : 2;
  std::vector<CField> out(nc, CField::Zero(g.n, g.n));
  for (int a = 0; a < g.n; ++a) {
    const double x1 = g.x(a);
    if (std::abs(x1) > 1.0) continue;
    for (int b = 0; b < g.n; ++b) {
      const double x2 = g.x(b);
      if (x1 * x1 + x2 * x2 > 1.0) continue;
      const ModeValue v = md.at(x1, x2);
      out[0](a, b) = v.ux;
      if (nc == 2) out[1](a, b) = v.uy;
    }
  }
  return out;
}

/// Band-limited Fourier data of a disk mode: exact transform of the zero
/// extension (Lommel integrals), kept for |h xi| <= band.
struct ModeSpectrum {
  CartesianGrid grid;
  double h = 0.0;
  double band = 0.0;
  std::vector<Eigen::MatrixXcd> comps;
};

/// Radial part R(kappa) of the Hankel transform of the mode profile:
/// int_0^1 f(r) J_m(kappa r) r dr, with f = J_m(lambda r) (Laplace) or the
/// Stokes stream function J_m(lambda r) - J_m(lambda) r^m.
class ModeHankel {
 public:
  ModeHankel(const Quasimode& md, double kappa_max)
      : family_(md.family), m_(md.m), lambda_(md.lambda), kmax_(std::max(kappa_max, 1.0)),
        table_(md.m, std::max(kappa_max, 1.0)) {
    if (family_ == ModeFamily::Laplace) {
      lj_ = lambda_ * bessel::j(m_ + 1, lambda_);
      limit_ = 0.5 * std::pow(bessel::j(m_ + 1, lambda_), 2);
    } else {
      jm_ = md.boundary_bessel();
      limit_ = 0.5 * jm_ * jm_;
    }
  }

  [[nodiscard]] double operator()(double kappa) const {
    const double l2 = lambda_ * lambda_;
    if (std::abs(kappa - lambda_) < 1e-7 * lambda_) return limit_;
    if (kappa < 1e-12) {
      if (m_ != 0) return 0.0;
      return family_ == ModeFamily::Laplace ? lj_ / l2 : -0.5 * jm_;
    }
    const auto jv = table_(kappa / kmax_);
    if (family_ == ModeFamily::Laplace) return -lj_ * jv[1] / (kappa * kappa - l2);
    return jm_ * jv[2] * l2 / (kappa * (kappa * kappa - l2));
  }

 private:
  ModeFamily family_;
  int m_;
  double lambda_;
  double kmax_;
  RadialBesselTable table_;
  double lj_ = 0.0;
  double jm_ = 0.0;
  double limit_ = 0.0;
};

inline ModeSpectrum mode_spectrum(const Quasimode& md, double band, int pad = 64) {
  ModeSpectrum sp;
  sp.h = md.h;
  sp.band = band;
  sp.grid = CartesianGrid::for_band(band, md.h, pad);
  const CartesianGrid& g = sp.grid;
  const int nc = md.family == ModeFamily::Laplace ? 1 : 2;
  sp.comps.assign(nc, Eigen::MatrixXcd::Zero(g.n, g.n));
  const double kappa_max = band / md.h * 1.001 + 1.0;
  const ModeHankel hankel(md, kappa_max);
  cplx mi = 1.0;  // (-i)^m
  for (int i = 0; i < md.m % 4; ++i) mi *= cplx(0.0, -1.0);
  const cplx pre = kTwoPi * md.amplitude() * mi / (g.length() * g.length());
  for (int a = 0; a < g.n; ++a) {
    const double xi1 = g.xi(a);
    for (int b = 0; b < g.n; ++b) {
      const double xi2 = g.xi(b);
      const double kappa = std::hypot(xi1, xi2);
      if (kappa * md.h > band) continue;
      const cplx phase = md.m == 0 ? cplx(1.0) : std::exp(cplx(0.0, md.m * std::atan2(xi2, xi1)));
      const cplx base = pre * phase * hankel(kappa);
      if (nc == 1) {
        sp.comps[0](a, b) = base;
      } else {
        sp.comps[0](a, b) = cplx(0.0, xi2) * base;
        sp.comps[1](a, b) = cplx(0.0, -xi1) * base;
      }
    }
  }
  return sp;
}

// ---- interior operators ------------------------------------------------------

/// Refuses x-dependent symbols whose support comes within two grid cells of
/// the domain boundary (unit circle) or of the box edge.
inline void check_interior_support(const InteriorSymbol& a, const CartesianGrid& g, bool domain = true) {
  if (!a.x_dependent) return;
  const double margin = 2.0 * g.dx();
  if (!a.box.bounded() && !std::isfinite(a.x_radius))
    throw SupportError("symbol '" + a.description + "' has unbounded x-support");
  double rmax = a.x_radius;
  if (a.box.bounded()) {
    const double bx = std::max(std::abs(a.box.x1_lo), std::abs(a.box.x1_hi));
    const double by = std::max(std::abs(a.box.x2_lo), std::abs(a.box.x2_hi));
    rmax = std::min(rmax, std::hypot(bx, by));
    if (bx > g.half - margin || by > g.half - margin)
      throw SupportError("symbol '" + a.description + "' reaches the box edge");
  }
  if (domain && rmax > 1.0 - margin)
    throw SupportError("symbol '" + a.description + "' support radius " + std::to_string(rmax) +
                       " violates the boundary margin " + std::to_string(1.0 - margin));
}

namespace detail {

struct IndexRange {
  int lo = 0;
  int hi = -1;  // inclusive
};

inline IndexRange x_range(double lo, double hi, const CartesianGrid& g) {
  IndexRange r;
  r.lo = std::max(0, static_cast<int>(std::ceil((std::max(lo, -g.half) + g.half) / g.dx() - 1e-9)));
  r.hi = std::min(g.n - 1, static_cast<int>(std::floor((std::min(hi, g.half) + g.half) / g.dx() + 1e-9)));
  return r;
}

struct BandEntry {
  int i1, i2;
  double hx1, hx2;
};

inline std::vector<BandEntry> band_entries(const CartesianGrid& g, double h, double lo, double hi) {
  std::vector<BandEntry> out;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      const double hx1 = h * g.xi(a), hx2 = h * g.xi(b);
      const double k = std::hypot(hx1, hx2);
      if (k < lo || k > hi) continue;
      out.push_back({a, b, hx1, hx2});
    }
  return out;
}

// e^{i xi_k x_j} for j in [range.lo, range.hi] and all storage indices k.
inline Eigen::MatrixXcd phase_table(const CartesianGrid& g, IndexRange r) {
  const int nj = std::max(0, r.hi - r.lo + 1);
  Eigen::MatrixXcd t(nj, g.n);
  for (int j = 0; j < nj; ++j)
    for (int k = 0; k < g.n; ++k) t(j, k) = std::exp(cplx(0.0, g.xi(k) * g.x(r.lo + j)));
  return t;
}

}  // namespace detail

/// Op_h(a) f for f sampled on the grid.
inline CField apply_interior_op(const InteriorSymbol& a, const CField& f, const CartesianGrid& g, double h,
                                bool enforce_domain = true) {
  if (f.rows() != g.n || f.cols() != g.n) throw ValidationError("field does not match the grid");
  if (!a.x_dependent && !a.xi_dependent) return a(0, 0, 0, 0) * f;
  check_interior_support(a, g, enforce_domain);
  if (!a.xi_dependent) {
    CField out = CField::Zero(g.n, g.n);
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) {
        const double v = a(g.x(i), g.x(j), 0.0, 0.0);
        if (v != 0.0) out(i, j) = v * f(i, j);
      }
    return out;
  }
  Eigen::MatrixXcd c = cartesian_coefficients(f, g);
  if (!a.x_dependent) {
    for (int i = 0; i < g.n; ++i)
      for (int j = 0; j < g.n; ++j) c(i, j) *= a(0.0, 0.0, h * g.xi(i), h * g.xi(j));
    return cartesian_synthesize(c, g);
  }
  const auto r1 = detail::x_range(a.box.x1_lo, a.box.x1_hi, g);
  const auto r2 = detail::x_range(a.box.x2_lo, a.box.x2_hi, g);
  const auto t1 = detail::phase_table(g, r1), t2 = detail::phase_table(g, r2);
  const auto band = detail::band_entries(g, h, a.band_lo, a.band_hi);
  CField out = CField::Zero(g.n, g.n);
  for (int j1 = r1.lo; j1 <= r1.hi; ++j1)
    for (int j2 = r2.lo; j2 <= r2.hi; ++j2) {
      const double x1 = g.x(j1), x2 = g.x(j2);
      if (x1 * x1 + x2 * x2 > a.x_radius * a.x_radius) continue;
      cplx s = 0.0;
      for (const auto& e : band) {
        const double v = a(x1, x2, e.hx1, e.hx2);
        if (v == 0.0) continue;
        s += c(e.i1, e.i2) * v * t1(j1 - r1.lo, e.i1) * t2(j2 - r2.lo, e.i2);
      }
      out(j1, j2) = s;
    }
  return out;
}

/// (Op_h(a) u | u) from band-limited mode data. Exact for the periodized
/// problem when the spectrum band covers the symbol band plus the spread
/// caused by the x-dependence of a.
inline cplx pairing(const InteriorSymbol& a, const ModeSpectrum& sp, int jobs = 1) {
  const CartesianGrid& g = sp.grid;
  const double h = sp.h;
  if (a.xi_dependent && !std::isfinite(a.band_hi))
    throw ValidationError("symbol '" + a.description + "' needs a bounded xi band for a spectral pairing");
  if (a.xi_dependent && a.band_hi > sp.band + 1e-12)
    throw ValidationError("spectrum band " + std::to_string(sp.band) + " below symbol band " +
                          std::to_string(a.band_hi));
  const double lo = a.xi_dependent ? a.band_lo : 0.0;
  const double hi = a.xi_dependent ? a.band_hi : sp.band;
  const double vol = g.length() * g.length();

  if (!a.x_dependent) {
    // Parseval: (a(hD) u | u) = |box| sum_k a(h xi_k) |c_k|^2
    double s = 0.0;
    for (const auto& e : detail::band_entries(g, h, lo, hi)) {
      const double v = a(0.0, 0.0, e.hx1, e.hx2);
      if (v == 0.0) continue;
      for (const auto& c : sp.comps) s += v * std::norm(c(e.i1, e.i2));
    }
    return s * vol;
  }

  check_interior_support(a, g);
  std::vector<CField> pu;
  for (const auto& c : sp.comps) pu.push_back(cartesian_synthesize(c, g));
  const auto r1 = detail::x_range(a.box.x1_lo, a.box.x1_hi, g);
  const auto r2 = detail::x_range(a.box.x2_lo, a.box.x2_hi, g);
  if (r1.hi < r1.lo || r2.hi < r2.lo) return 0.0;
  const auto t1 = detail::phase_table(g, r1), t2 = detail::phase_table(g, r2);
  const auto band = detail::band_entries(g, h, lo, hi);
  const int nc = static_cast<int>(sp.comps.size());
  std::vector<cplx> coef(band.size() * nc);
  for (std::size_t b = 0; b < band.size(); ++b)
    for (int c = 0; c < nc; ++c) coef[b * nc + c] = sp.comps[c](band[b].i1, band[b].i2);

  const int rows = r1.hi - r1.lo + 1;
  std::vector<cplx> row_sum(rows, 0.0);
  parallel_for(rows, jobs, [&](std::size_t ri) {
    const int j1 = r1.lo + static_cast<int>(ri);
    const double x1 = g.x(j1);
    cplx acc = 0.0;
    std::vector<cplx> s(nc);
    for (int j2 = r2.lo; j2 <= r2.hi; ++j2) {
      const double x2 = g.x(j2);
      if (x1 * x1 + x2 * x2 > a.x_radius * a.x_radius) continue;
      std::fill(s.begin(), s.end(), cplx(0.0));
      for (std::size_t b = 0; b < band.size(); ++b) {
        const double v = a(x1, x2, band[b].hx1, band[b].hx2);
        if (v == 0.0) continue;
        const cplx ph = v * t1(ri, band[b].i1) * t2(j2 - r2.lo, band[b].i2);
        for (int c = 0; c < nc; ++c) s[c] += coef[b * nc + c] * ph;
      }
      for (int c = 0; c < nc; ++c) acc += s[c] * std::conj(pu[c](j1, j2));
    }
    row_sum[ri] = acc;
  });
  cplx total = 0.0;
  for (const auto& v : row_sum) total += v;
  return total * g.dx() * g.dx();
}

/// Extra band that covers the frequency spread of Op_h(a) u caused by the
/// x-dependence of a (smooth on scales ~ 0.1).
inline double spread_margin(double h) { return std::max(0.3, 60.0 * h); }

/// (Op_h(a) u | u) summed over velocity components.
/// margin = 0 selects spread_margin(h).
inline cplx pairing(const InteriorSymbol& a, const Quasimode& md, int jobs = 1, double margin = 0.0) {
  const PolarGrid& g = *md.grid;
  if (!a.x_dependent && !a.xi_dependent) return a(0, 0, 0, 0) * (g.norm_sq(md.ux) + g.norm_sq(md.uy));
  if (!a.xi_dependent) {
    Field w = g.zeros();
    for (int i = 0; i < g.n_r(); ++i)
      for (int l = 0; l < g.n_theta(); ++l)
        w(i, l) = a(g.r(i) * std::cos(g.theta(l)), g.r(i) * std::sin(g.theta(l)), 0.0, 0.0);
    const Field dens = w.cwiseProduct(md.ux.cwiseAbs2().cast<cplx>() + md.uy.cwiseAbs2().cast<cplx>());
    return g.integrate(dens);
  }
  if (!std::isfinite(a.band_hi))
    throw ValidationError("symbol '" + a.description + "' needs a bounded xi band");
  if (margin == 0.0) margin = spread_margin(md.h);
  const double band = a.x_dependent ? a.band_hi + margin : a.band_hi;
  return pairing(a, mode_spectrum(md, band), jobs);
}

// ---- tangential operators ------------------------------------------------------

/// Op_h(a) applied row by row on the disk polar grid, y = 1 - r.
inline Field apply_tangential_op(const TangentialSymbol& a, const Field& f, const PolarGrid& g, double h) {
  const int nt = g.n_theta();
  Field out = g.zeros();
  Eigen::FFT<double> fft;
  std::vector<cplx> row(nt), spec, back;
  for (int i = 0; i < g.n_r(); ++i) {
    const double y = 1.0 - g.r(i);
    if (y >= a.y_max) continue;
    if (!a.x_dependent && !a.xi_dependent) {
      out.row(i) = a(y, 0.0, 0.0) * f.row(i);
      continue;
    }
    if (!a.xi_dependent) {
      for (int l = 0; l < nt; ++l) out(i, l) = a(y, g.theta(l), 0.0) * f(i, l);
      continue;
    }
    for (int l = 0; l < nt; ++l) row[l] = f(i, l);
    fft.fwd(spec, row);
    if (!a.x_dependent) {
      for (int n = 0; n < nt; ++n) spec[n] *= a(y, 0.0, h * g.wavenumber(n));
      fft.inv(back, spec);
      for (int l = 0; l < nt; ++l) out(i, l) = back[l];
      continue;
    }
    for (int l = 0; l < nt; ++l) {
      const double th = g.theta(l);
      cplx s = 0.0;
      for (int n = 0; n < nt; ++n) {
        if (spec[n] == 0.0) continue;
        const double v = a(y, th, a.xi_dependent ? h * g.wavenumber(n) : 0.0);
        if (v == 0.0) continue;
        s += v * spec[n] * std::exp(cplx(0.0, g.wavenumber(n) * th));
      }
      out(i, l) = s / static_cast<double>(nt);
    }
  }
  return out;
}

inline cplx pairing(const TangentialSymbol& a, const Quasimode& md) {
  const PolarGrid& g = *md.grid;
  cplx s = g.inner(apply_tangential_op(a, md.ux, g, md.h), md.ux);
  if (md.family == ModeFamily::Stokes) s += g.inner(apply_tangential_op(a, md.uy, g, md.h), md.uy);
  return s;
}

// ---- pairing series ------------------------------------------------------------

struct PairingEntry {
  double h = 0.0;
  cplx value;
};

struct PairingSeries {
  std::vector<PairingEntry> entries;
  std::optional<cplx> limit;  ///< linear-in-h extrapolation from the last three entries
  std::vector<double> gaps;   ///< |value_{k+1} - value_k|
};

inline PairingSeries make_series(const std::vector<double>& h, const std::vector<cplx>& values) {
  if (h.size() != values.size()) throw ValidationError("series size mismatch");
  for (std::size_t i = 1; i < h.size(); ++i)
    if (!(h[i] < h[i - 1])) throw ValidationError("modes must be ordered by decreasing h");
  PairingSeries s;
  for (std::size_t i = 0; i < h.size(); ++i) s.entries.push_back({h[i], values[i]});
  for (std::size_t i = 1; i < h.size(); ++i) s.gaps.push_back(std::abs(values[i] - values[i - 1]));
  if (h.size() >= 3) {
    // least-squares line v = L + b h through the last three points
    const std::size_t n0 = h.size() - 3;
    double mh = 0.0;
    cplx mv = 0.0;
    for (std::size_t i = n0; i < h.size(); ++i) {
      mh += h[i] / 3.0;
      mv += values[i] / 3.0;
    }
    double shh = 0.0;
    cplx shv = 0.0;
    for (std::size_t i = n0; i < h.size(); ++i) {
      shh += (h[i] - mh) * (h[i] - mh);
      shv += (h[i] - mh) * (values[i] - mv);
    }
    const cplx b = shh > 0.0 ? shv / shh : cplx(0.0);
    s.limit = mv - b * mh;
  }
  return s;
}

/// Pairings of one symbol across a family (ordered by decreasing h).
template <class PairFn>
PairingSeries measure_sequence(const std::vector<Quasimode>& modes, const PairFn& pair) {
  std::vector<double> h;
  std::vector<cplx> v;
  for (const auto& md : modes) {
    h.push_back(md.h);
    v.push_back(pair(md));
  }
  return make_series(h, v);
}

inline PairingSeries measure_sequence(const InteriorSymbol& a, const std::vector<Quasimode>& modes, int jobs = 1) {
  return measure_sequence(modes, [&](const Quasimode& md) { return pairing(a, md, jobs); });
}

inline PairingSeries measure_sequence(const TangentialSymbol& a, const std::vector<Quasimode>& modes) {
  return measure_sequence(modes, [&](const Quasimode& md) { return pairing(a, md); });
}

// ---- Husimi densities ------------------------------------------------------------

struct HusimiSpec {
  int n_x = 0;   ///< 0: derived from sqrt(h)
  int n_xi = 0;  ///< 0: derived from sqrt(h)
  double x_lo = -1.2, x_hi = 1.2;
  double xi_lo = -1.8, xi_hi = 1.8;
  int n_z = 0;   ///< quadrature points per axis on [-1, 1]; 0 = automatic
};

struct HusimiResult {
  std::vector<double> x;   ///< per-axis x nodes
  std::vector<double> xi;  ///< per-axis xi nodes
  std::vector<double> density;  ///< index ((i1 * nx + i2) * nxi + k1) * nxi + k2
  double cell = 0.0;            ///< dx^2 dxi^2

  [[nodiscard]] std::size_t index(int i1, int i2, int k1, int k2) const {
    const std::size_t nx = x.size(), nxi = xi.size();
    return ((static_cast<std::size_t>(i1) * nx + i2) * nxi + k1) * nxi + k2;
  }
  [[nodiscard]] double total_mass() const {
    double s = 0.0;
    for (double d : density) s += d;
    return s * cell;
  }
  /// Mass of the cells whose (x, xi) satisfy pred.
  template <class Pred>
  [[nodiscard]] double mass_where(const Pred& pred) const {
    double s = 0.0;
    const int nx = static_cast<int>(x.size()), nxi = static_cast<int>(xi.size());
    for (int i1 = 0; i1 < nx; ++i1)
      for (int i2 = 0; i2 < nx; ++i2)
        for (int k1 = 0; k1 < nxi; ++k1)
          for (int k2 = 0; k2 < nxi; ++k2)
            if (pred(x[i1], x[i2], xi[k1], xi[k2])) s += density[index(i1, i2, k1, k2)];
    return s * cell;
  }
};

/// Coherent-state densities |<phi_{x,xi}, u>|^2 / (2 pi h)^2 on a phase-space grid,
/// phi_{x,xi}(z) = (pi h)^{-1/2} exp(-|z - x|^2 / 2h + i xi . (z - x) / h).
inline HusimiResult husimi_grid(const Quasimode& md, HusimiSpec spec = {}) {
  const double h = md.h, sh = std::sqrt(h);
  if (spec.n_x == 0) spec.n_x = static_cast<int>(std::ceil((spec.x_hi - spec.x_lo) / (0.7 * sh))) + 1;
  if (spec.n_xi == 0) spec.n_xi = static_cast<int>(std::ceil((spec.xi_hi - spec.xi_lo) / (0.7 * sh))) + 1;
  const double dxg = (spec.x_hi - spec.x_lo) / (spec.n_x - 1);
  const double dxig = (spec.xi_hi - spec.xi_lo) / (spec.n_xi - 1);
  if (dxg > sh || dxig > sh)
    throw ResolutionError("Husimi grid coarser than the coherent-state width sqrt(h) = " + std::to_string(sh));
  if (spec.n_z == 0) spec.n_z = std::max(64, static_cast<int>(std::ceil(1.6 * md.lambda)));
  const int nz = spec.n_z;
  const double dz = 2.0 / nz;
  std::vector<double> z(nz);
  for (int i = 0; i < nz; ++i) z[i] = -1.0 + (i + 0.5) * dz;

  HusimiResult res;
  res.x.resize(spec.n_x);
  res.xi.resize(spec.n_xi);
  for (int i = 0; i < spec.n_x; ++i) res.x[i] = spec.x_lo + i * dxg;
  for (int k = 0; k < spec.n_xi; ++k) res.xi[k] = spec.xi_lo + k * dxig;
  res.cell = dxg * dxg * dxig * dxig;

  // one-dimensional conjugated coherent states, rows (i, k)
  const int nrow = spec.n_x * spec.n_xi;
  Eigen::MatrixXcd gm(nrow, nz);
  const double norm1 = std::pow(kPi * h, -0.25);
  for (int i = 0; i < spec.n_x; ++i)
    for (int k = 0; k < spec.n_xi; ++k)
      for (int q = 0; q < nz; ++q) {
        const double d = z[q] - res.x[i];
        gm(i * spec.n_xi + k, q) = norm1 * std::exp(cplx(-d * d / (2.0 * h), -res.xi[k] * d / h));
      }

  std::vector<Eigen::MatrixXcd> comps;
  comps.push_back(Eigen::MatrixXcd::Zero(nz, nz));
  if (md.family == ModeFamily::Stokes) comps.push_back(Eigen::MatrixXcd::Zero(nz, nz));
  for (int a = 0; a < nz; ++a)
    for (int b = 0; b < nz; ++b) {
      if (z[a] * z[a] + z[b] * z[b] > 1.0) continue;
      const ModeValue v = md.at(z[a], z[b]);
      comps[0](a, b) = v.ux;
      if (comps.size() == 2) comps[1](a, b) = v.uy;
    }
  res.density.assign(static_cast<std::size_t>(nrow) * nrow, 0.0);
  const double scale = dz * dz * dz * dz / (4.0 * kPi * kPi * h * h);
  for (const auto& u : comps) {
    const Eigen::MatrixXcd ov = gm * u * gm.transpose();
    for (int i1 = 0; i1 < spec.n_x; ++i1)
      for (int k1 = 0; k1 < spec.n_xi; ++k1)
        for (int i2 = 0; i2 < spec.n_x; ++i2)
          for (int k2 = 0; k2 < spec.n_xi; ++k2)
            res.density[res.index(i1, i2, k1, k2)] +=
                std::norm(ov(i1 * spec.n_xi + k1, i2 * spec.n_xi + k2)) * scale;
  }
  return res;
}

// ---- frequency tails ------------------------------------------------------------

/// int_{|xi| >= R/h} |(psi u)^(xi)|^2 dxi / (2 pi)^2 for each R, with psi an
/// x-only interior cutoff. Computed from samples on a grid resolving
/// frequencies up to 1.25 max(R) / h.
inline std::vector<double> interior_tail(const Quasimode& md, const InteriorSymbol& psi, const std::vector<double>& R) {
  if (psi.xi_dependent) throw ValidationError("tail cutoff must depend on x only");
  double rmax = 0.0;
  for (double r : R) rmax = std::max(rmax, r);
  const CartesianGrid g = CartesianGrid::for_band(1.25 * rmax, md.h, 16);
  check_interior_support(psi, g);
  const int nc = md.family == ModeFamily::Laplace ? 1 : 2;
  std::vector<CField> f(nc, CField::Zero(g.n, g.n));
  const auto r1 = detail::x_range(psi.box.x1_lo, psi.box.x1_hi, g);
  const auto r2 = detail::x_range(psi.box.x2_lo, psi.box.x2_hi, g);
  for (int a = r1.lo; a <= r1.hi; ++a)
    for (int b = r2.lo; b <= r2.hi; ++b) {
      const double x1 = g.x(a), x2 = g.x(b);
      const double w = psi(x1, x2, 0.0, 0.0);
      if (w == 0.0) continue;
      const ModeValue v = md.at(x1, x2);
      f[0](a, b) = w * v.ux;
      if (nc == 2) f[1](a, b) = w * v.uy;
    }
  std::vector<double> tails(R.size(), 0.0);
  const double vol = g.length() * g.length();
  for (const auto& fc : f) {
    const Eigen::MatrixXcd c = cartesian_coefficients(fc, g);
    for (int a = 0; a < g.n; ++a)
      for (int b = 0; b < g.n; ++b) {
        const double k = md.h * std::hypot(g.xi(a), g.xi(b));
        const double m = std::norm(c(a, b)) * vol;
        for (std::size_t q = 0; q < R.size(); ++q)
          if (k >= R[q]) tails[q] += m;
      }
  }
  return tails;
}

/// Tangential variant: angular Fourier mass with |h n| >= R of psi(y) u on the polar grid.
inline std::vector<double> tangential_tail(const Quasimode& md, const TangentialSymbol& psi,
                                           const std::vector<double>& R) {
  if (psi.x_dependent || psi.xi_dependent) throw ValidationError("tangential tail cutoff must depend on y only");
  const PolarGrid& g = *md.grid;
  const int nt = g.n_theta();
  std::vector<double> tails(R.size(), 0.0);
  Eigen::FFT<double> fft;
  std::vector<cplx> row(nt), spec;
  for (const Field* u : {&md.ux, &md.uy}) {
    for (int i = 0; i < g.n_r(); ++i) {
      const double w = psi(1.0 - g.r(i), 0.0, 0.0);
      if (w == 0.0) continue;
      for (int l = 0; l < nt; ++l) row[l] = w * (*u)(i, l);
      fft.fwd(spec, row);
      for (int n = 0; n < nt; ++n) {
        // Parseval on the circle: int |f|^2 dtheta = 2 pi / N^2 sum |F_n|^2
        const double m = std::norm(spec[n]) * kTwoPi / (static_cast<double>(nt) * nt) * g.radial_weights()[i];
        for (std::size_t q = 0; q < R.size(); ++q)
          if (md.h * std::abs(g.wavenumber(n)) >= R[q]) tails[q] += m;
      }
    }
  }
  return tails;
}

}  // namespace mslab
