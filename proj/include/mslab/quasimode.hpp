#pragma once

// Exact high-frequency modes of the unit disk in semiclassical scaling:
//   Laplace:  u = c J_m(lambda r) e^{i m theta},        lambda = j_{m,k}
//   Stokes:   u = curl-perp of psi,
//             psi = c (J_m(lambda r) - J_m(lambda) r^m) e^{i m theta},
//             lambda = j_{m+1,k}, with pressure q = P / lambda harmonic.
// Both satisfy -h^2 Delta u - u + h grad q = 0 with h = 1 / lambda.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "mslab/bessel.hpp"
#include "mslab/core.hpp"
#include "mslab/polynomial.hpp"
#include "mslab/spectral.hpp"

namespace mslab {

enum class ModeFamily { Laplace, Stokes };

inline std::string to_string(ModeFamily f) { return f == ModeFamily::Laplace ? "laplace" : "stokes"; }

inline ModeFamily parse_family(const std::string& s) {
  if (s == "laplace") return ModeFamily::Laplace;
  if (s == "stokes") return ModeFamily::Stokes;
  throw ValidationError("unknown mode family '" + s + "'");
}

struct ModeSpec {
  ModeFamily family = ModeFamily::Laplace;
  int m = 0;
  int k = 1;
  int n_r = 0;      ///< 0 selects the smallest admissible value
  int n_theta = 0;  ///< 0 selects the smallest admissible value
};

/// Eigenvalue lambda (= 1/h) of the mode described by spec.
inline double mode_eigenvalue(ModeFamily family, int m, int k) {
  return family == ModeFamily::Laplace ? bessel::zero(m, k) : bessel::zero(m + 1, k);
}

/// Bessel values J_{m-1}, J_m, J_{m+1} at lambda r, tabulated on a fine
/// uniform radial mesh and interpolated by cubic Hermite polynomials.
class RadialBesselTable {
 public:
  RadialBesselTable(int m, double lambda) : m_(m), lambda_(lambda) {
    const int n = std::max(256, static_cast<int>(std::ceil(lambda / 0.02)));
    dr_ = 1.0 / n;
    vals_.resize(n + 1);
    ders_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      const double z = lambda * i * dr_;
      const auto jv = bessel::j_all(m + 2, z);
      auto jn = [&](int order) { return order < 0 ? (order % 2 ? -jv[-order] : jv[-order]) : jv[order]; };
      for (int c = 0; c < 3; ++c) {
        const int order = m - 1 + c;
        vals_[i][c] = jn(order);
        // J_n' = (J_{n-1} - J_{n+1}) / 2
        ders_[i][c] = lambda * 0.5 * (jn(order - 1) - jn(order + 1));
      }
    }
  }

  /// {J_{m-1}, J_m, J_{m+1}}(lambda r) for 0 <= r <= 1.
  [[nodiscard]] std::array<double, 3> operator()(double r) const {
    const int n = static_cast<int>(vals_.size()) - 1;
    double t = r / dr_;
    int i = static_cast<int>(std::floor(t));
    if (i >= n) i = n - 1;
    if (i < 0) i = 0;
    t -= i;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c)
      out[c] = h00 * vals_[i][c] + h10 * dr_ * ders_[i][c] + h01 * vals_[i + 1][c] + h11 * dr_ * ders_[i + 1][c];
    return out;
  }

  [[nodiscard]] int m() const { return m_; }
  [[nodiscard]] double lambda() const { return lambda_; }

 private:
  int m_;
  double lambda_;
  double dr_;
  std::vector<std::array<double, 3>> vals_;
  std::vector<std::array<double, 3>> ders_;
};

/// Point values of a mode: Cartesian velocity components and pressure.
struct ModeValue {
  cplx ux;
  cplx uy;
  cplx q;
};

struct ModeNorms {
  double l2 = 0.0;       ///< ||u||
  double grad = 0.0;     ///< ||h grad u||
  double hessian = 0.0;  ///< ||h^2 grad^2 u||
};

class Quasimode {
 public:
  ModeFamily family = ModeFamily::Laplace;
  int m = 0;
  int k = 1;
  double lambda = 0.0;
  double h = 0.0;
  std::shared_ptr<const PolarGrid> grid;
  Field ux;
  Field uy;
  Field q;
  ModeNorms norms;

  /// Analytic evaluation at an arbitrary point of the closed disk; zero outside.
  [[nodiscard]] ModeValue at(double x1, double x2) const {
    const double r = std::hypot(x1, x2);
    if (r > 1.0) return {0.0, 0.0, 0.0};
    const double th = std::atan2(x2, x1);
    const cplx phase = std::exp(cplx(0.0, m * th));
    const auto jv = (*table_)(r);
    const double jm = jv[1];
    if (family == ModeFamily::Laplace) return {scale_ * jm * phase, 0.0, 0.0};
    // psi_r and psi_theta / r without the angular phase.
    const double rm1 = m >= 1 ? ipow(r, m - 1) : 0.0;
    const double jprime = m == 0 ? -jv[2] : 0.5 * (jv[0] - jv[2]);
    const double psi_r = lambda * jprime - m * jm_boundary_ * rm1;
    const double j_over_r = m == 0 ? 0.0 : lambda * (jv[0] + jv[2]) / (2.0 * m);
    const cplx psi_t_over_r = cplx(0.0, m) * (j_over_r - jm_boundary_ * rm1);
    const double c = std::cos(th), s = std::sin(th);
    const cplx dpsi_dx = (c * psi_r - s * psi_t_over_r) * phase * scale_;
    const cplx dpsi_dy = (s * psi_r + c * psi_t_over_r) * phase * scale_;
    const cplx qv = m == 0 ? cplx(0.0) : pressure_coef_ * ipow(r, m) * phase;
    return {dpsi_dy, -dpsi_dx, qv};
  }

  /// Constant c in front of the Bessel profile after normalization.
  [[nodiscard]] double amplitude() const { return scale_; }
  /// J_m(lambda), the coefficient of the harmonic part of a Stokes stream function.
  [[nodiscard]] double boundary_bessel() const { return jm_boundary_; }
  [[nodiscard]] cplx pressure_coefficient() const { return pressure_coef_; }

  friend Quasimode build_mode(ModeFamily, int, int, double, int, int);

 private:
  std::shared_ptr<const RadialBesselTable> table_;
  double scale_ = 1.0;
  double jm_boundary_ = 0.0;
  cplx pressure_coef_ = 0.0;
};

/// Smallest grid satisfying N_r > 4 lambda / pi and N_theta > 4m (+ headroom).
inline ModeSpec resolve_grid(ModeSpec spec) {
  const double lambda = mode_eigenvalue(spec.family, spec.m, spec.k);
  const int min_r = static_cast<int>(std::floor(4.0 * lambda / kPi)) + 1;
  const int min_t = 4 * spec.m + 1;
  if (spec.n_r == 0) spec.n_r = std::max(24, min_r + 8);
  if (spec.n_theta == 0) {
    int nt = std::max(32, min_t + 8);
    nt = fft_size(nt);
    if (nt % 2) nt = fft_size(nt + 1);
    spec.n_theta = nt;
  }
  if (spec.n_r < min_r)
    throw ResolutionError("n_r = " + std::to_string(spec.n_r) + " too coarse, need > 4 lambda / pi = " +
                          std::to_string(4.0 * lambda / kPi));
  if (spec.n_theta < min_t)
    throw ResolutionError("n_theta = " + std::to_string(spec.n_theta) + " too coarse, need > 4m = " +
                          std::to_string(4 * spec.m));
  return spec;
}

/// Builds a mode with arbitrary lambda; only lambda = j_{m,k} (Laplace) or
/// j_{m+1,k} (Stokes) yields the Dirichlet condition. Normalized so that
/// ||u||_{L^2} = 1 on the grid quadrature.
inline Quasimode build_mode(ModeFamily family, int m, int k, double lambda, int n_r, int n_theta) {
  Quasimode md;
  md.family = family;
  md.m = m;
  md.k = k;
  md.lambda = lambda;
  md.h = 1.0 / lambda;
  md.grid = std::make_shared<PolarGrid>(n_r, n_theta);
  md.table_ = std::make_shared<RadialBesselTable>(m, lambda);
  md.jm_boundary_ = family == ModeFamily::Stokes ? bessel::j(m, lambda) : 0.0;
  md.scale_ = 1.0;
  if (family == ModeFamily::Stokes) {
    // u = (psi_y, -psi_x) gives -Lap u - lambda^2 u = i lambda^2 J_m(lambda) grad z^m,
    // so q = h P = -i lambda J_m(lambda) z^m.
    md.pressure_coef_ = cplx(0.0, -1.0) * lambda * md.jm_boundary_;
  }
  const PolarGrid& g = *md.grid;

  auto fill = [&](Quasimode& mm) {
    mm.ux = g.zeros();
    mm.uy = g.zeros();
    mm.q = g.zeros();
    for (int i = 0; i < n_r; ++i) {
      // Exact Bessel values on grid nodes, angular phase applied per column.
      const double r = g.r(i);
      const auto jv = bessel::j_all(m + 2, lambda * r);
      // high orders underflow near the origin; keep denormals out of the fields
      auto flush = [](double v) { return std::abs(v) < 1e-250 ? 0.0 : v; };
      auto jn = [&](int order) {
        return flush(order < 0 ? (order % 2 ? -jv[-order] : jv[-order]) : jv[order]);
      };
      const double jm = jn(m);
      const double jprime = 0.5 * (jn(m - 1) - jn(m + 1));
      const double rm1 = m >= 1 ? flush(ipow(r, m - 1)) : 0.0;
      const double psi_r = lambda * jprime - m * mm.jm_boundary_ * rm1;
      const double j_over_r = m == 0 ? 0.0 : lambda * (jn(m - 1) + jn(m + 1)) / (2.0 * m);
      const cplx psi_t_over_r = cplx(0.0, m) * (j_over_r - mm.jm_boundary_ * rm1);
      for (int l = 0; l < n_theta; ++l) {
        const double th = g.theta(l);
        const cplx phase = std::exp(cplx(0.0, m * th));
        if (family == ModeFamily::Laplace) {
          mm.ux(i, l) = mm.scale_ * jm * phase;
        } else {
          const double c = std::cos(th), s = std::sin(th);
          mm.ux(i, l) = mm.scale_ * (s * psi_r + c * psi_t_over_r) * phase;
          mm.uy(i, l) = -mm.scale_ * (c * psi_r - s * psi_t_over_r) * phase;
          if (m > 0) mm.q(i, l) = mm.pressure_coef_ * flush(ipow(r, m)) * phase;
        }
      }
    }
  };

  fill(md);
  const double nrm = std::sqrt(g.norm_sq(md.ux) + g.norm_sq(md.uy));
  md.scale_ = 1.0 / nrm;
  md.pressure_coef_ /= nrm;
  md.ux /= nrm;
  md.uy /= nrm;
  md.q /= nrm;

  return md;
}

/// Dirichlet eigenfunction of the Laplacian on the unit disk.
inline Quasimode laplace_disk_mode(ModeSpec spec) {
  if (spec.family != ModeFamily::Laplace) throw ValidationError("laplace_disk_mode needs family = laplace");
  spec = resolve_grid(spec);
  return build_mode(ModeFamily::Laplace, spec.m, spec.k, mode_eigenvalue(spec.family, spec.m, spec.k), spec.n_r,
                    spec.n_theta);
}

/// Divergence-free Stokes eigenfunction on the unit disk with its pressure.
inline Quasimode stokes_disk_mode(ModeSpec spec) {
  if (spec.family != ModeFamily::Stokes) throw ValidationError("stokes_disk_mode needs family = stokes");
  spec = resolve_grid(spec);
  return build_mode(ModeFamily::Stokes, spec.m, spec.k, mode_eigenvalue(spec.family, spec.m, spec.k), spec.n_r,
                    spec.n_theta);
}

inline Quasimode make_mode(const ModeSpec& spec) {
  return spec.family == ModeFamily::Laplace ? laplace_disk_mode(spec) : stokes_disk_mode(spec);
}

struct ResidualReport {
  double pde_residual = 0.0;            ///< ||-h^2 Lap u - u + h grad q||
  double div_residual = 0.0;            ///< ||h div u||, NaN for Laplace modes
  double trace_norm = 0.0;              ///< ||u|_{boundary}||_{L^2}
  double trace_sup = 0.0;               ///< max |u| on the boundary
  double normal_derivative_norm = 0.0;  ///< ||h d_nu u||_{L^2(boundary)}
  double pressure_grad_norm = 0.0;      ///< ||h grad q||
  double pressure_norm = 0.0;           ///< ||h q||
  double pressure_mean = 0.0;           ///< |int q|
  double l2 = 0.0;
  double grad_norm = 0.0;
  double hessian_norm = 0.0;
};

/// Residuals measured by spectral differentiation and quadrature on the mode grid.
inline ResidualReport residual_report(const Quasimode& md) {
  const PolarGrid& g = *md.grid;
  const double h = md.h, h2 = h * h;
  ResidualReport rep;
  const Field qx = g.d_x(md.q), qy = g.d_y(md.q);
  const Field rx = -h2 * g.laplacian(md.ux) - md.ux + h * qx;
  const Field ry = -h2 * g.laplacian(md.uy) - md.uy + h * qy;
  rep.pde_residual = std::sqrt(g.norm_sq(rx) + g.norm_sq(ry));
  const Field uxx = g.d_x(md.ux), uxy = g.d_y(md.ux), uyx = g.d_x(md.uy), uyy = g.d_y(md.uy);
  // scalar Laplace modes carry no divergence constraint
  rep.div_residual = md.family == ModeFamily::Stokes ? h * g.norm(uxx + uyy) : std::nan("");
  rep.trace_norm = std::sqrt(std::pow(g.boundary_norm(md.ux), 2) + std::pow(g.boundary_norm(md.uy), 2));
  for (int l = 0; l < g.n_theta(); ++l)
    rep.trace_sup = std::max(rep.trace_sup, std::hypot(std::abs(md.ux(0, l)), std::abs(md.uy(0, l))));
  const Field nx = g.d_r(md.ux, 1), ny = g.d_r(md.uy, 1);
  rep.normal_derivative_norm = h * std::sqrt(std::pow(g.boundary_norm(nx), 2) + std::pow(g.boundary_norm(ny), 2));
  rep.pressure_grad_norm = h * std::sqrt(g.norm_sq(qx) + g.norm_sq(qy));
  rep.pressure_norm = h * g.norm(md.q);
  rep.pressure_mean = std::abs(g.integrate(md.q));
  rep.l2 = std::sqrt(g.norm_sq(md.ux) + g.norm_sq(md.uy));
  rep.grad_norm = h * std::sqrt(g.norm_sq(uxx) + g.norm_sq(uxy) + g.norm_sq(uyx) + g.norm_sq(uyy));
  double hess = 0.0;
  for (const Field* f : {&uxx, &uxy, &uyx, &uyy}) hess += g.norm_sq(g.d_x(*f)) + g.norm_sq(g.d_y(*f));
  rep.hessian_norm = h2 * std::sqrt(hess);
  return rep;
}

}  // namespace mslab
