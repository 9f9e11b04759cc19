#pragma once

// Geodesic-normal collar coordinates (y, x') near a boundary component and
// the Hamiltonian data of p = eta^2 - r(y, x', xi') with r = 1 - |xi'|^2_alpha.
//
// Built-in charts are the unit disk and the two boundary components of an
// annulus, where x' is the polar angle and xi' the angular momentum. Model
// charts prescribe r directly as a polynomial in (y, z, zeta) and are used to
// reach prescribed glancing contact orders.

#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "mslab/core.hpp"
#include "mslab/polynomial.hpp"

namespace mslab {

/// Point of the boundary phase space in collar coordinates.
struct PhasePoint {
  double y = 0.0;    ///< distance to the boundary
  double x = 0.0;    ///< boundary coordinate x'
  double eta = 0.0;  ///< conormal frequency
  double xi = 0.0;   ///< tangential frequency xi'
};

/// Global Cartesian phase point (x, xi) in the plane.
struct CartesianPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  double xi1 = 0.0;
  double xi2 = 0.0;
};

struct RValues {
  double r = 0.0;
  double r_y = 0.0;
  double r_x = 0.0;
  double r_xi = 0.0;
};

/// Components of the Hamiltonian field H_p, p = eta^2 - r.
struct PhaseVelocity {
  double dy = 0.0;
  double deta = 0.0;
  double dx = 0.0;
  double dxi = 0.0;
};

enum class ChartKind { Disk, Annulus, Model };
enum class AnnulusBoundary { Outer, Inner };

class CollarChart {
 public:
  static constexpr double kDefaultWidth = 0.3;
  static constexpr int kDefaultOrder = 8;

  static CollarChart disk(double collar_width = kDefaultWidth, int max_order = kDefaultOrder) {
    CollarChart c;
    c.kind_ = ChartKind::Disk;
    c.init_builtin(1.0, -1.0, collar_width, max_order);
    return c;
  }

  /// Annulus {inner < |x| < 1}; `which` selects the boundary component the
  /// collar coordinates are attached to. y always increases into the fluid.
  static CollarChart annulus(double inner_radius, AnnulusBoundary which,
                             double collar_width = 0.1, int max_order = kDefaultOrder) {
    if (!(inner_radius > 0.0 && inner_radius < 1.0))
      throw ValidationError("annulus inner radius must lie in (0, 1)");
    if (collar_width >= 1.0 - inner_radius)
      throw ValidationError("annulus collar width must be smaller than the annulus width");
    CollarChart c;
    c.kind_ = ChartKind::Annulus;
    c.inner_radius_ = inner_radius;
    c.component_ = which;
    if (which == AnnulusBoundary::Outer)
      c.init_builtin(1.0, -1.0, collar_width, max_order);
    else
      c.init_builtin(inner_radius, +1.0, collar_width, max_order);
    return c;
  }

  static CollarChart model(std::vector<PolyTerm> terms, double collar_width = 1.0,
                           int max_order = kDefaultOrder) {
    if (max_order < 4) throw ValidationError("max_derivative_order must be >= 4");
    if (!(collar_width > 0.0)) throw ValidationError("collar width must be positive");
    CollarChart c;
    c.kind_ = ChartKind::Model;
    c.width_ = collar_width;
    c.max_order_ = max_order;
    c.terms_ = std::move(terms);
    for (const auto& t : c.terms_) {
      if (t.pz < 0 || t.pzeta < 0 || t.py < 0) throw ValidationError("negative power in model term");
      if (t.py == 0) c.r0_poly_.add(t.pz, t.pzeta, t.coeff);
      if (t.py == 1) c.r1_poly_.add(t.pz, t.pzeta, t.coeff);
    }
    return c;
  }

  /// Reads a model chart from structured text:
  ///   collar_width <w>
  ///   max_order <K>
  ///   term <pz> <pzeta> <py> <coeff>
  /// Blank lines and '#' comments are ignored.
  static CollarChart parse_model(std::istream& in) {
    std::vector<PolyTerm> terms;
    double width = 1.0;
    int order = kDefaultOrder;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::istringstream ls(line);
      std::string key;
      if (!(ls >> key)) continue;
      bool ok = true;
      if (key == "term") {
        PolyTerm t;
        ok = static_cast<bool>(ls >> t.pz >> t.pzeta >> t.py >> t.coeff);
        if (ok) terms.push_back(t);
      } else if (key == "collar_width") {
        ok = static_cast<bool>(ls >> width);
      } else if (key == "max_order") {
        ok = static_cast<bool>(ls >> order);
      } else {
        throw ValidationError("model chart line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
      if (!ok) throw ValidationError("model chart line " + std::to_string(lineno) + ": malformed entry");
    }
    if (terms.empty()) throw ValidationError("model chart has no terms");
    return model(std::move(terms), width, order);
  }

  static CollarChart load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open model chart file: " + path);
    return parse_model(f);
  }

  [[nodiscard]] ChartKind kind() const { return kind_; }
  [[nodiscard]] double collar_width() const { return width_; }
  [[nodiscard]] int max_derivative_order() const { return max_order_; }
  [[nodiscard]] bool has_metric() const { return kind_ != ChartKind::Model; }
  [[nodiscard]] double inner_radius() const { return inner_radius_; }
  [[nodiscard]] AnnulusBoundary component() const { return component_; }
  [[nodiscard]] const std::vector<PolyTerm>& terms() const { return terms_; }

  /// Chart of the other annulus boundary component, same collar width.
  [[nodiscard]] CollarChart sibling() const {
    if (kind_ != ChartKind::Annulus) throw ValidationError("only annulus charts have a sibling component");
    return annulus(inner_radius_,
                   component_ == AnnulusBoundary::Outer ? AnnulusBoundary::Inner : AnnulusBoundary::Outer,
                   width_, max_order_);
  }

  /// r and its first partials. Built-in charts require 0 <= y <= collar width.
  [[nodiscard]] RValues eval_r(double y, double x, double xi) const {
    if (kind_ != ChartKind::Model && (y < 0.0 || y > width_))
      throw OutOfCollarError("y = " + std::to_string(y) + " outside collar [0, " + std::to_string(width_) + "]");
    return eval_r_extended(y, x, xi);
  }

  /// Same formulas without the collar check. Integrators probe slightly
  /// negative y while localizing boundary contacts; built-in formulas extend
  /// smoothly there.
  [[nodiscard]] RValues eval_r_extended(double y, double x, double xi) const {
    if (kind_ == ChartKind::Model) return eval_model(y, x, xi);
    const double rho = radius_at(y);
    const double alpha = 1.0 / (rho * rho);
    const double alpha_y = -2.0 * orient_ / (rho * rho * rho);
    return RValues{1.0 - alpha * xi * xi, -alpha_y * xi * xi, 0.0, -2.0 * alpha * xi};
  }

  [[nodiscard]] double r0(double x, double xi) const {
    if (kind_ == ChartKind::Model) return r0_poly_(x, xi);
    return eval_r_extended(0.0, x, xi).r;
  }

  [[nodiscard]] double r1(double x, double xi) const {
    if (kind_ == ChartKind::Model) return r1_poly_(x, xi);
    return eval_r_extended(0.0, x, xi).r_y;
  }

  /// Tangential metric alpha(y, x') = |dx'|^{-2} and its y-derivative.
  [[nodiscard]] std::pair<double, double> alpha(double y) const {
    if (!has_metric()) throw ValidationError("model charts carry no metric");
    const double rho = radius_at(y);
    return {1.0 / (rho * rho), -2.0 * orient_ / (rho * rho * rho)};
  }

  /// lambda(y, x', xi') = |xi'|_alpha.
  [[nodiscard]] double lambda(double y, double xi) const {
    return std::abs(xi) / radius_at_checked_metric(y);
  }

  /// H_{r0}^j(r1) at the boundary point (x', xi').
  [[nodiscard]] double iterated_bracket(int j, double x, double xi) const {
    check_budget(j);
    if (kind_ != ChartKind::Model) {
      // r0 and r1 do not depend on x', so every bracket beyond the first vanishes.
      return j == 0 ? r1(x, xi) : 0.0;
    }
    Poly2 f = r1_poly_;
    for (int i = 0; i < j; ++i) f = poisson_bracket(r0_poly_, f);
    return f(x, xi);
  }

  /// Same quantity from nested central differences with one Richardson level.
  [[nodiscard]] double iterated_bracket_numeric(int j, double x, double xi, double step = 1e-4) const;

  [[nodiscard]] PhaseVelocity hamiltonian_field(const PhasePoint& p) const {
    const RValues v = eval_r(p.y, p.x, p.xi);
    return {2.0 * p.eta, v.r_y, -v.r_xi, v.r_x};
  }

  [[nodiscard]] PhaseVelocity hamiltonian_field_extended(const PhasePoint& p) const {
    const RValues v = eval_r_extended(p.y, p.x, p.xi);
    return {2.0 * p.eta, v.r_y, -v.r_xi, v.r_x};
  }

  /// Euclidean radius of the level set at collar distance y (built-in charts).
  [[nodiscard]] double radius_at(double y) const { return boundary_radius_ + orient_ * y; }
  /// +1 when y grows with |x| (inner annulus boundary), -1 otherwise.
  [[nodiscard]] double orientation() const { return orient_; }
  [[nodiscard]] double boundary_radius() const { return boundary_radius_; }

  [[nodiscard]] CartesianPoint to_cartesian(const PhasePoint& p) const {
    require_builtin();
    const double rho = radius_at(p.y);
    const double c = std::cos(p.x), s = std::sin(p.x);
    // y = orient * (rho - R): the radial momentum is orient * eta.
    const double xi_r = orient_ * p.eta;
    const double xi_t = p.xi / rho;
    return {rho * c, rho * s, xi_r * c - xi_t * s, xi_r * s + xi_t * c};
  }

  [[nodiscard]] PhasePoint from_cartesian(const CartesianPoint& q) const {
    require_builtin();
    const double rho = std::hypot(q.x1, q.x2);
    const double th = std::atan2(q.x2, q.x1);
    const double c = std::cos(th), s = std::sin(th);
    const double xi_r = q.xi1 * c + q.xi2 * s;
    const double ang = q.x1 * q.xi2 - q.x2 * q.xi1;
    return {orient_ * (rho - boundary_radius_), th, orient_ * xi_r, ang};
  }

 private:
  CollarChart() = default;

  void init_builtin(double radius, double orient, double width, int max_order) {
    if (!(width > 0.0 && (orient > 0.0 || width < radius)))
      throw ValidationError("collar width out of range");
    if (max_order < 4) throw ValidationError("max_derivative_order must be >= 4");
    boundary_radius_ = radius;
    orient_ = orient;
    width_ = width;
    max_order_ = max_order;
  }

  [[nodiscard]] double radius_at_checked_metric(double y) const {
    if (!has_metric()) throw ValidationError("model charts carry no metric");
    return radius_at(y);
  }

  void require_builtin() const {
    if (kind_ == ChartKind::Model) throw ValidationError("model charts have no Cartesian embedding");
  }

  void check_budget(int j) const {
    if (j < 0) throw OrderBudgetError("bracket order must be non-negative");
    if (j > max_order_ - 2)
      throw OrderBudgetError("bracket order " + std::to_string(j) + " exceeds chart budget K-2 = " +
                             std::to_string(max_order_ - 2));
  }

  [[nodiscard]] RValues eval_model(double y, double z, double zeta) const {
    RValues v;
    for (const auto& t : terms_) {
      const double mz = ipow(z, t.pz), mzeta = ipow(zeta, t.pzeta), my = ipow(y, t.py);
      v.r += t.coeff * mz * mzeta * my;
      if (t.py > 0) v.r_y += t.coeff * t.py * mz * mzeta * ipow(y, t.py - 1);
      if (t.pz > 0) v.r_x += t.coeff * t.pz * ipow(z, t.pz - 1) * mzeta * my;
      if (t.pzeta > 0) v.r_xi += t.coeff * t.pzeta * mz * ipow(zeta, t.pzeta - 1) * my;
    }
    return v;
  }

  ChartKind kind_ = ChartKind::Disk;
  double width_ = kDefaultWidth;
  int max_order_ = kDefaultOrder;
  double boundary_radius_ = 1.0;
  double orient_ = -1.0;
  double inner_radius_ = 0.0;
  AnnulusBoundary component_ = AnnulusBoundary::Outer;
  std::vector<PolyTerm> terms_;
  Poly2 r0_poly_;
  Poly2 r1_poly_;
};

namespace detail {

// Richardson-extrapolated central difference of f at t.
template <class F>
double richardson_diff(const F& f, double t, double step) {
  const double d1 = (f(t + step) - f(t - step)) / (2.0 * step);
  const double s2 = 0.5 * step;
  const double d2 = (f(t + s2) - f(t - s2)) / (2.0 * s2);
  return (4.0 * d2 - d1) / 3.0;
}

template <class R0, class F>
double nested_bracket(const R0& r0, const F& f, int j, double x, double xi, double step) {
  if (j == 0) return f(x, xi);
  auto inner = [&](double a, double b) { return nested_bracket(r0, f, j - 1, a, b, step); };
  const double r0_xi = richardson_diff([&](double t) { return r0(x, t); }, xi, step);
  const double r0_x = richardson_diff([&](double t) { return r0(t, xi); }, x, step);
  const double f_x = richardson_diff([&](double t) { return inner(t, xi); }, x, step);
  const double f_xi = richardson_diff([&](double t) { return inner(x, t); }, xi, step);
  return r0_xi * f_x - r0_x * f_xi;
}

}  // namespace detail

/// H_g^j(f) by nested central differences for arbitrary callables g(x, xi), f(x, xi).
template <class G, class F>
double iterated_bracket_fd(const G& g, const F& f, int j, double x, double xi, double step = 1e-4) {
  return detail::nested_bracket(g, f, j, x, xi, step);
}

inline double CollarChart::iterated_bracket_numeric(int j, double x, double xi, double step) const {
  check_budget(j);
  auto r0f = [this](double a, double b) { return eval_r_extended(0.0, a, b).r; };
  auto r1f = [this, step](double a, double b) {
    if (kind_ == ChartKind::Model) {
      return detail::richardson_diff([&](double t) { return eval_model(t, a, b).r; }, 0.0, step);
    }
    return detail::richardson_diff([&](double t) { return eval_r_extended(t, a, b).r; }, 0.0, step);
  };
  return iterated_bracket_fd(r0f, r1f, j, x, xi, step);
}

}  // namespace mslab
