#pragma once

// Spectral machinery on the unit disk: a polar tensor grid with Fourier
// differentiation in theta and Chebyshev differentiation in r.
//
// The radial nodes are the positive half of the Chebyshev-Gauss-Lobatto
// points on [-1, 1] with an even node count, so r = 0 is never a node. A
// field F(r, theta) is extended to negative radii through
// F(-r, theta) = F(r, theta + pi), which is smooth for any smooth planar
// function; radial derivatives act on the extended columns.

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <memory>
#include <vector>

#include "mslab/core.hpp"

namespace mslab {

using Field = Eigen::MatrixXcd;  // rows: radial index, cols: angular index

/// Chebyshev-Gauss-Lobatto nodes x_j = cos(j pi / n) and differentiation matrix.
inline Eigen::MatrixXd cheb_matrix(int n, Eigen::VectorXd& nodes) {
  nodes.resize(n + 1);
  for (int j = 0; j <= n; ++j) nodes[j] = std::cos(kPi * j / n);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n + 1, n + 1);
  auto c = [n](int j) { return ((j == 0 || j == n) ? 2.0 : 1.0) * ((j % 2) ? -1.0 : 1.0); };
  for (int i = 0; i <= n; ++i) {
    double row = 0.0;
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      d(i, j) = c(i) / c(j) / (nodes[i] - nodes[j]);
      row += d(i, j);
    }
    d(i, i) = -row;
  }
  return d;
}

/// Gauss-Legendre nodes and weights on [a, b].
inline void gauss_legendre(int n, double a, double b, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
    w[i] = (b - a) / ((1.0 - z * z) * dp * dp);
  }
}

class PolarGrid {
 public:
  PolarGrid(int n_r, int n_theta) : n_r_(n_r), n_theta_(n_theta) {
    if (n_r < 4) throw ResolutionError("polar grid needs at least 4 radial nodes");
    if (n_theta < 8 || n_theta % 2) throw ResolutionError("polar grid needs an even angular count >= 8");
    n_ = 2 * n_r - 1;
    d1_ = cheb_matrix(n_, nodes_);
    d2_ = d1_ * d1_;
    r_.resize(n_r);
    for (int i = 0; i < n_r; ++i) r_[i] = nodes_[i];
    theta_.resize(n_theta);
    for (int l = 0; l < n_theta; ++l) theta_[l] = kTwoPi * l / n_theta;
    build_weights();
  }

  [[nodiscard]] int n_r() const { return n_r_; }
  [[nodiscard]] int n_theta() const { return n_theta_; }
  [[nodiscard]] double r(int i) const { return r_[i]; }
  [[nodiscard]] double theta(int l) const { return theta_[l]; }
  [[nodiscard]] const Eigen::VectorXd& radii() const { return r_; }
  /// Radial weights: sum_i w_i g(r_i) ~ int_0^1 g(r) r dr.
  [[nodiscard]] const Eigen::VectorXd& radial_weights() const { return w_; }
  [[nodiscard]] Field zeros() const { return Field::Zero(n_r_, n_theta_); }

  /// k-th radial derivative (k = 1 or 2) of a planar field.
  [[nodiscard]] Field d_r(const Field& f, int order = 1) const {
    const int half = n_theta_ / 2;
    Eigen::MatrixXcd ext(2 * n_r_, half);
    for (int l = 0; l < half; ++l) {
      for (int i = 0; i < n_r_; ++i) {
        ext(i, l) = f(i, l);
        ext(n_ - i, l) = f(i, l + half);
      }
    }
    const Eigen::MatrixXd& d = order == 1 ? d1_ : d2_;
    const Eigen::MatrixXcd de = d.cast<cplx>() * ext;
    const double sign = order % 2 ? -1.0 : 1.0;
    Field out(n_r_, n_theta_);
    for (int l = 0; l < half; ++l) {
      for (int i = 0; i < n_r_; ++i) {
        out(i, l) = de(i, l);
        out(i, l + half) = sign * de(n_ - i, l);
      }
    }
    return out;
  }

  /// k-th angular derivative by FFT along each radial row.
  [[nodiscard]] Field d_theta(const Field& f, int order = 1) const {
    Field out(n_r_, n_theta_);
    Eigen::FFT<double> fft;
    std::vector<cplx> row(n_theta_), spec;
    for (int i = 0; i < n_r_; ++i) {
      for (int l = 0; l < n_theta_; ++l) row[l] = f(i, l);
      fft.fwd(spec, row);
      for (int n = 0; n < n_theta_; ++n) {
        const int k = wavenumber(n);
        cplx factor = std::pow(cplx(0.0, static_cast<double>(k)), order);
        if (order % 2 && 2 * std::abs(k) == n_theta_) factor = 0.0;
        spec[n] *= factor;
      }
      fft.inv(row, spec);
      for (int l = 0; l < n_theta_; ++l) out(i, l) = row[l];
    }
    return out;
  }

  [[nodiscard]] Field laplacian(const Field& f) const {
    const Field frr = d_r(f, 2), fr = d_r(f, 1), ftt = d_theta(f, 2);
    Field out(n_r_, n_theta_);
    for (int i = 0; i < n_r_; ++i) {
      const double ri = r_[i];
      out.row(i) = frr.row(i) + fr.row(i) / ri + ftt.row(i) / (ri * ri);
    }
    return out;
  }

  [[nodiscard]] Field d_x(const Field& f) const { return cartesian_derivative(f, true); }
  [[nodiscard]] Field d_y(const Field& f) const { return cartesian_derivative(f, false); }

  [[nodiscard]] cplx integrate(const Field& f) const {
    cplx s = 0.0;
    for (int i = 0; i < n_r_; ++i) s += w_[i] * f.row(i).sum();
    return s * (kTwoPi / n_theta_);
  }

  [[nodiscard]] double norm_sq(const Field& f) const {
    double s = 0.0;
    for (int i = 0; i < n_r_; ++i) s += w_[i] * f.row(i).squaredNorm();
    return s * (kTwoPi / n_theta_);
  }

  [[nodiscard]] double norm(const Field& f) const { return std::sqrt(norm_sq(f)); }

  [[nodiscard]] cplx inner(const Field& f, const Field& g) const {
    return integrate(f.cwiseProduct(g.conjugate()));
  }

  /// L^2 norm on the unit circle of the boundary row.
  [[nodiscard]] double boundary_norm(const Field& f) const {
    return std::sqrt(f.row(0).squaredNorm() * (kTwoPi / n_theta_));
  }

  /// Signed wavenumber of FFT bin n.
  [[nodiscard]] int wavenumber(int n) const { return n <= n_theta_ / 2 ? n : n - n_theta_; }

  /// Integral of sum_theta-averaged g over an r-interval [a, b] subset of [0, 1]:
  /// int_a^b g(r) r dr, where g is given at the radial nodes and interpolated
  /// by its even Chebyshev extension.
  [[nodiscard]] double integrate_radial_band(const Eigen::VectorXd& g, double a, double b) const {
    // Chebyshev coefficients of the even extension.
    std::vector<double> full(n_ + 1);
    for (int i = 0; i < n_r_; ++i) {
      full[i] = g[i];
      full[n_ - i] = g[i];
    }
    std::vector<double> coef(n_ + 1, 0.0);
    for (int k = 0; k <= n_; ++k) {
      double s = 0.0;
      for (int j = 0; j <= n_; ++j) {
        const double cj = (j == 0 || j == n_) ? 0.5 : 1.0;
        s += cj * full[j] * std::cos(kPi * k * j / n_);
      }
      coef[k] = s * 2.0 / n_ * ((k == 0 || k == n_) ? 0.5 : 1.0);
    }
    std::vector<double> xs, ws;
    gauss_legendre(n_ + 8, a, b, xs, ws);
    double total = 0.0;
    for (std::size_t q = 0; q < xs.size(); ++q) {
      // Clenshaw
      double b1 = 0.0, b2 = 0.0;
      for (int k = n_; k >= 1; --k) {
        const double b0 = 2.0 * xs[q] * b1 - b2 + coef[k];
        b2 = b1;
        b1 = b0;
      }
      const double val = xs[q] * b1 - b2 + coef[0];
      total += ws[q] * val * xs[q];
    }
    return total;
  }

 private:
  void build_weights() {
    // w_j = int_{-1}^{1} l_j(x) |x| dx via exact Chebyshev moments.
    std::vector<double> mu(n_ + 1, 0.0);
    auto sin_int = [](double a) { return a == 0.0 ? 0.0 : (1.0 - std::cos(a * kPi / 2.0)) / a; };
    for (int k = 0; k <= n_; k += 2) mu[k] = 2.0 * 0.25 * (sin_int(2.0 + k) + sin_int(2.0 - k));
    w_.resize(n_r_);
    for (int j = 0; j < n_r_; ++j) {
      const double cj = (j == 0 || j == n_) ? 2.0 : 1.0;
      double s = 0.0;
      for (int k = 0; k <= n_; ++k) {
        const double ck = (k == 0 || k == n_) ? 2.0 : 1.0;
        s += std::cos(kPi * k * j / n_) * mu[k] / ck;
      }
      w_[j] = 2.0 / (n_ * cj) * s;
    }
  }

  [[nodiscard]] Field cartesian_derivative(const Field& f, bool x_dir) const {
    const Field fr = d_r(f, 1), ft = d_theta(f, 1);
    Field out(n_r_, n_theta_);
    for (int i = 0; i < n_r_; ++i) {
      for (int l = 0; l < n_theta_; ++l) {
        const double c = std::cos(theta_[l]), s = std::sin(theta_[l]);
        out(i, l) = x_dir ? c * fr(i, l) - s * ft(i, l) / r_[i] : s * fr(i, l) + c * ft(i, l) / r_[i];
      }
    }
    return out;
  }

  int n_r_;
  int n_theta_;
  int n_;
  Eigen::VectorXd nodes_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  Eigen::VectorXd r_;
  Eigen::VectorXd theta_;
  Eigen::VectorXd w_;
};

/// Smallest integer >= n whose only prime factors are 2, 3 and 5.
inline int fft_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int v = m;
    for (int p : {2, 3, 5})
      while (v % p == 0) v /= p;
    if (v == 1) return m;
  }
}

}  // namespace mslab
