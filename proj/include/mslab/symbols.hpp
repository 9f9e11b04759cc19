#pragma once

// Symbols for the semiclassical quantization.
//
// Interior symbols a(x, xi) live on Cartesian phase space and carry the
// metadata the quantizer needs: an x bounding box, the largest |x| on the
// support, and a band lo <= |xi| <= hi outside which a vanishes. Tangential
// symbols a(y, x', xi') live on a collar. Both compose by sums and products.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"

namespace mslab {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  double x1_lo = -kInf, x1_hi = kInf, x2_lo = -kInf, x2_hi = kInf;

  [[nodiscard]] bool bounded() const {
    return std::isfinite(x1_lo) && std::isfinite(x1_hi) && std::isfinite(x2_lo) && std::isfinite(x2_hi);
  }
  [[nodiscard]] Box intersect(const Box& o) const {
    return {std::max(x1_lo, o.x1_lo), std::min(x1_hi, o.x1_hi), std::max(x2_lo, o.x2_lo), std::min(x2_hi, o.x2_hi)};
  }
  [[nodiscard]] Box hull(const Box& o) const {
    return {std::min(x1_lo, o.x1_lo), std::max(x1_hi, o.x1_hi), std::min(x2_lo, o.x2_lo), std::max(x2_hi, o.x2_hi)};
  }
  [[nodiscard]] Box grow(double d) const { return {x1_lo - d, x1_hi + d, x2_lo - d, x2_hi + d}; }
};

struct InteriorSymbol {
  std::function<double(double, double, double, double)> eval;  ///< a(x1, x2, xi1, xi2)
  Box box;                     ///< x support is inside
  double x_radius = kInf;      ///< x support is inside |x| <= x_radius
  double band_lo = 0.0;        ///< a = 0 for |xi| < band_lo
  double band_hi = kInf;       ///< a = 0 for |xi| > band_hi
  bool x_dependent = true;
  bool xi_dependent = true;
  std::string description;

  double operator()(double x1, double x2, double xi1, double xi2) const { return eval(x1, x2, xi1, xi2); }
};

namespace sym {

inline InteriorSymbol constant(double c) {
  InteriorSymbol a;
  a.eval = [c](double, double, double, double) { return c; };
  a.x_dependent = false;
  a.xi_dependent = false;
  a.description = "constant(" + std::to_string(c) + ")";
  return a;
}

/// bump(|x - c| / radius), smooth with support in the open disk of that radius.
inline InteriorSymbol position_bump(double c1, double c2, double radius) {
  if (!(radius > 0.0)) throw ValidationError("position_bump radius must be positive");
  InteriorSymbol a;
  a.eval = [=](double x1, double x2, double, double) {
    const double d2 = ((x1 - c1) * (x1 - c1) + (x2 - c2) * (x2 - c2)) / (radius * radius);
    return d2 >= 1.0 ? 0.0 : smooth::bump(std::sqrt(d2));
  };
  a.box = {c1 - radius, c1 + radius, c2 - radius, c2 + radius};
  a.x_radius = std::hypot(c1, c2) + radius;
  a.xi_dependent = false;
  a.description = "position_bump(" + std::to_string(c1) + "," + std::to_string(c2) + "," + std::to_string(radius) + ")";
  return a;
}

/// Plateau in |x|: 1 on [lo, hi], 0 outside [lo - ramp, hi + ramp].
inline InteriorSymbol radial_band(double lo, double hi, double ramp) {
  InteriorSymbol a;
  a.eval = [=](double x1, double x2, double, double) { return smooth::plateau(std::sqrt(x1 * x1 + x2 * x2), lo, hi, ramp); };
  const double r = hi + ramp;
  a.box = {-r, r, -r, r};
  a.x_radius = r;
  a.xi_dependent = false;
  a.description = "radial_band(" + std::to_string(lo) + "," + std::to_string(hi) + "," + std::to_string(ramp) + ")";
  return a;
}

/// Bump in the polar angle of x around theta0 with half-width w (no x support bound).
inline InteriorSymbol angular_bump(double theta0, double w) {
  InteriorSymbol a;
  a.eval = [=](double x1, double x2, double, double) {
    if (x1 == 0.0 && x2 == 0.0) return 0.0;
    return smooth::bump(wrap_angle(std::atan2(x2, x1) - theta0) / w);
  };
  a.xi_dependent = false;
  a.description = "angular_bump(" + std::to_string(theta0) + "," + std::to_string(w) + ")";
  return a;
}

/// Plateau in |xi|.
inline InteriorSymbol momentum_band(double lo, double hi, double ramp) {
  InteriorSymbol a;
  a.eval = [=](double, double, double xi1, double xi2) { return smooth::plateau(std::sqrt(xi1 * xi1 + xi2 * xi2), lo, hi, ramp); };
  a.band_lo = std::max(0.0, lo - ramp);
  a.band_hi = hi + ramp;
  a.x_dependent = false;
  a.description = "momentum_band(" + std::to_string(lo) + "," + std::to_string(hi) + "," + std::to_string(ramp) + ")";
  return a;
}

/// Plateau in the angular momentum x1 xi2 - x2 xi1.
inline InteriorSymbol angular_momentum_band(double lo, double hi, double ramp) {
  InteriorSymbol a;
  a.eval = [=](double x1, double x2, double xi1, double xi2) {
    return smooth::plateau(x1 * xi2 - x2 * xi1, lo, hi, ramp);
  };
  a.description =
      "angular_momentum_band(" + std::to_string(lo) + "," + std::to_string(hi) + "," + std::to_string(ramp) + ")";
  return a;
}

/// Bump in the direction angle of xi.
inline InteriorSymbol direction_bump(double phi0, double w) {
  InteriorSymbol a;
  a.eval = [=](double, double, double xi1, double xi2) {
    if (xi1 == 0.0 && xi2 == 0.0) return 0.0;
    return smooth::bump(wrap_angle(std::atan2(xi2, xi1) - phi0) / w);
  };
  a.x_dependent = false;
  a.description = "direction_bump(" + std::to_string(phi0) + "," + std::to_string(w) + ")";
  return a;
}

/// The coordinate xi_i (i = 1 or 2).
inline InteriorSymbol xi_component(int i) {
  if (i != 1 && i != 2) throw ValidationError("xi_component index must be 1 or 2");
  InteriorSymbol a;
  a.eval = [i](double, double, double xi1, double xi2) { return i == 1 ? xi1 : xi2; };
  a.x_dependent = false;
  a.description = "xi" + std::to_string(i);
  return a;
}

inline InteriorSymbol product(const InteriorSymbol& a, const InteriorSymbol& b) {
  InteriorSymbol c;
  c.eval = [fa = a.eval, fb = b.eval](double x1, double x2, double xi1, double xi2) {
    const double va = fa(x1, x2, xi1, xi2);
    return va == 0.0 ? 0.0 : va * fb(x1, x2, xi1, xi2);
  };
  c.box = a.box.intersect(b.box);
  c.x_radius = std::min(a.x_radius, b.x_radius);
  c.band_lo = std::max(a.band_lo, b.band_lo);
  c.band_hi = std::min(a.band_hi, b.band_hi);
  c.x_dependent = a.x_dependent || b.x_dependent;
  c.xi_dependent = a.xi_dependent || b.xi_dependent;
  c.description = a.description + "*" + b.description;
  return c;
}

inline InteriorSymbol sum(const InteriorSymbol& a, const InteriorSymbol& b) {
  InteriorSymbol c;
  c.eval = [fa = a.eval, fb = b.eval](double x1, double x2, double xi1, double xi2) {
    return fa(x1, x2, xi1, xi2) + fb(x1, x2, xi1, xi2);
  };
  c.box = a.box.hull(b.box);
  c.x_radius = std::max(a.x_radius, b.x_radius);
  c.band_lo = std::min(a.band_lo, b.band_lo);
  c.band_hi = std::max(a.band_hi, b.band_hi);
  c.x_dependent = a.x_dependent || b.x_dependent;
  c.xi_dependent = a.xi_dependent || b.xi_dependent;
  c.description = "(" + a.description + "+" + b.description + ")";
  return c;
}

inline InteriorSymbol scaled(const InteriorSymbol& a, double s) {
  InteriorSymbol c = a;
  c.eval = [fa = a.eval, s](double x1, double x2, double xi1, double xi2) { return s * fa(x1, x2, xi1, xi2); };
  c.description = std::to_string(s) + "*" + a.description;
  return c;
}

/// |a|^2 with the same support data.
inline InteriorSymbol squared(const InteriorSymbol& a) {
  InteriorSymbol c = a;
  c.eval = [fa = a.eval](double x1, double x2, double xi1, double xi2) {
    const double v = fa(x1, x2, xi1, xi2);
    return v * v;
  };
  c.description = "|" + a.description + "|^2";
  return c;
}

}  // namespace sym

// ---- tangential symbols --------------------------------------------------

struct TangentialSymbol {
  std::function<double(double, double, double)> eval;  ///< a(y, x', xi')
  double y_max = kInf;  ///< a = 0 for y >= y_max
  bool x_dependent = true;
  bool xi_dependent = true;
  std::string description;

  double operator()(double y, double x, double xi) const { return eval(y, x, xi); }
};

namespace tsym {

/// Constant over the whole domain (not only the collar).
inline TangentialSymbol constant(double c) {
  TangentialSymbol a;
  a.eval = [c](double, double, double) { return c; };
  a.x_dependent = false;
  a.xi_dependent = false;
  a.description = "constant(" + std::to_string(c) + ")";
  return a;
}

/// psi(y): 1 for y <= y0, smooth decay to 0 at y0 + ramp.
inline TangentialSymbol collar_cutoff(double y0, double ramp) {
  TangentialSymbol a;
  a.eval = [=](double y, double, double) { return 1.0 - smooth::step((y - y0) / ramp); };
  a.y_max = y0 + ramp;
  a.x_dependent = false;
  a.xi_dependent = false;
  a.description = "collar_cutoff(" + std::to_string(y0) + "," + std::to_string(ramp) + ")";
  return a;
}

/// Bump in the boundary angle x' around theta0 with half-width w.
inline TangentialSymbol arc_bump(double theta0, double w) {
  TangentialSymbol a;
  a.eval = [=](double, double x, double) { return smooth::bump(wrap_angle(x - theta0) / w); };
  a.xi_dependent = false;
  a.description = "arc_bump(" + std::to_string(theta0) + "," + std::to_string(w) + ")";
  return a;
}

/// Plateau in xi' itself (angular momentum on the disk).
inline TangentialSymbol xi_band(double lo, double hi, double ramp) {
  TangentialSymbol a;
  a.eval = [=](double, double, double xi) { return smooth::plateau(xi, lo, hi, ramp); };
  a.x_dependent = false;
  a.description = "xi_band(" + std::to_string(lo) + "," + std::to_string(hi) + "," + std::to_string(ramp) + ")";
  return a;
}

/// Plateau in lambda(y, xi') = |xi'|_alpha of a chart with a metric.
inline TangentialSymbol lambda_band(const CollarChart& chart, double lo, double hi, double ramp) {
  if (!chart.has_metric()) throw ValidationError("lambda_band needs a chart with a metric");
  TangentialSymbol a;
  a.eval = [=](double y, double, double xi) { return smooth::plateau(chart.lambda(y, xi), lo, hi, ramp); };
  a.x_dependent = false;
  a.description = "lambda_band(" + std::to_string(lo) + "," + std::to_string(hi) + "," + std::to_string(ramp) + ")";
  return a;
}

inline TangentialSymbol product(const TangentialSymbol& a, const TangentialSymbol& b) {
  TangentialSymbol c;
  c.eval = [fa = a.eval, fb = b.eval](double y, double x, double xi) {
    const double va = fa(y, x, xi);
    return va == 0.0 ? 0.0 : va * fb(y, x, xi);
  };
  c.y_max = std::min(a.y_max, b.y_max);
  c.x_dependent = a.x_dependent || b.x_dependent;
  c.xi_dependent = a.xi_dependent || b.xi_dependent;
  c.description = a.description + "*" + b.description;
  return c;
}

inline TangentialSymbol sum(const TangentialSymbol& a, const TangentialSymbol& b) {
  TangentialSymbol c;
  c.eval = [fa = a.eval, fb = b.eval](double y, double x, double xi) { return fa(y, x, xi) + fb(y, x, xi); };
  c.y_max = std::max(a.y_max, b.y_max);
  c.x_dependent = a.x_dependent || b.x_dependent;
  c.xi_dependent = a.xi_dependent || b.xi_dependent;
  c.description = "(" + a.description + "+" + b.description + ")";
  return c;
}

inline TangentialSymbol squared(const TangentialSymbol& a) {
  TangentialSymbol c = a;
  c.eval = [fa = a.eval](double y, double x, double xi) {
    const double v = fa(y, x, xi);
    return v * v;
  };
  c.description = "|" + a.description + "|^2";
  return c;
}

}  // namespace tsym

}  // namespace mslab
