#pragma once

// Pointwise stratification of the boundary phase space into elliptic,
// hyperbolic and glancing points, with the glancing order read off the
// iterated brackets H_{r0}^j(r1).

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"

namespace mslab {

enum class BoundaryTag { Elliptic, Hyperbolic, Glancing };

inline std::string to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::Elliptic: return "elliptic";
    case BoundaryTag::Hyperbolic: return "hyperbolic";
    case BoundaryTag::Glancing: return "glancing";
  }
  return "?";
}

struct GlancingDetail {
  int order = 2;
  int sign = 0;             ///< +1 / -1 for order 2, 0 otherwise
  bool unresolved = false;  ///< all brackets up to K_max vanished within tolerance
};

struct BoundaryClass {
  BoundaryTag tag = BoundaryTag::Hyperbolic;
  std::optional<GlancingDetail> glancing;
  double r0 = 0.0;
  std::vector<double> brackets;  ///< H_{r0}^j(r1), j = 0, 1, ... as far as evaluated

  [[nodiscard]] bool diffractive() const { return glancing && glancing->order == 2 && glancing->sign > 0; }
  [[nodiscard]] bool gliding() const { return glancing && !diffractive(); }

  /// Short stratum label: E, H, G2+, G2-, G3, ..., or G>=K? when unresolved.
  [[nodiscard]] std::string label() const {
    if (tag == BoundaryTag::Elliptic) return "E";
    if (tag == BoundaryTag::Hyperbolic) return "H";
    if (glancing->unresolved) return "G>=" + std::to_string(glancing->order) + "?";
    if (glancing->order == 2) return glancing->sign > 0 ? "G2+" : "G2-";
    return "G" + std::to_string(glancing->order);
  }
};

struct ClassifyOptions {
  double tol_g = 1e-8;        ///< on r0
  double tol_bracket = 1e-6;  ///< on r1 and higher brackets
  int k_max = 0;              ///< 0 = chart budget
};

inline BoundaryClass classify(const CollarChart& chart, double x, double xi, ClassifyOptions opt = {}) {
  if (!(opt.tol_g > 0.0)) throw ValidationError("tol_g must be positive");
  if (!(opt.tol_bracket > 0.0)) throw ValidationError("tol_bracket must be positive");
  const int budget = chart.max_derivative_order();
  const int k_max = opt.k_max == 0 ? budget : opt.k_max;
  if (k_max < 2 || k_max > budget)
    throw OrderBudgetError("K_max = " + std::to_string(k_max) + " outside [2, " + std::to_string(budget) + "]");

  BoundaryClass out;
  out.r0 = chart.r0(x, xi);
  if (out.r0 > opt.tol_g) {
    out.tag = BoundaryTag::Hyperbolic;
    return out;
  }
  if (out.r0 < -opt.tol_g) {
    out.tag = BoundaryTag::Elliptic;
    return out;
  }
  out.tag = BoundaryTag::Glancing;
  GlancingDetail d;
  // order k needs H^{k-2}(r1) != 0 with all lower brackets vanishing.
  for (int k = 2; k <= k_max; ++k) {
    const double b = chart.iterated_bracket(k - 2, x, xi);
    out.brackets.push_back(b);
    if (std::abs(b) > opt.tol_bracket) {
      d.order = k;
      if (k == 2) d.sign = b > 0.0 ? 1 : -1;
      out.glancing = d;
      return out;
    }
  }
  d.order = k_max;
  d.unresolved = true;
  out.glancing = d;
  return out;
}

}  // namespace mslab
