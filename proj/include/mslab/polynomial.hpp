#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

namespace mslab {

/// One monomial c * z^pz * zeta^pzeta * y^py of a model collar chart.
struct PolyTerm {
  int pz = 0;
  int pzeta = 0;
  int py = 0;
  double coeff = 0.0;
};

inline double ipow(double base, int e) {
  double r = 1.0;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

/// Sparse polynomial in the boundary phase variables (z, zeta).
class Poly2 {
 public:
  using Key = std::pair<int, int>;

  Poly2() = default;

  void add(int pz, int pzeta, double c) {
    if (c == 0.0) return;
    auto& slot = terms_[{pz, pzeta}];
    slot += c;
    if (slot == 0.0) terms_.erase({pz, pzeta});
  }

  [[nodiscard]] double operator()(double z, double zeta) const {
    double s = 0.0;
    for (const auto& [k, c] : terms_) s += c * ipow(z, k.first) * ipow(zeta, k.second);
    return s;
  }

  [[nodiscard]] Poly2 dz() const {
    Poly2 out;
    for (const auto& [k, c] : terms_)
      if (k.first > 0) out.add(k.first - 1, k.second, c * k.first);
    return out;
  }

  [[nodiscard]] Poly2 dzeta() const {
    Poly2 out;
    for (const auto& [k, c] : terms_)
      if (k.second > 0) out.add(k.first, k.second - 1, c * k.second);
    return out;
  }

  [[nodiscard]] Poly2 operator*(const Poly2& o) const {
    Poly2 out;
    for (const auto& [a, ca] : terms_)
      for (const auto& [b, cb] : o.terms_) out.add(a.first + b.first, a.second + b.second, ca * cb);
    return out;
  }

  [[nodiscard]] Poly2 operator-(const Poly2& o) const {
    Poly2 out = *this;
    for (const auto& [k, c] : o.terms_) out.add(k.first, k.second, -c);
    return out;
  }

  [[nodiscard]] bool empty() const { return terms_.empty(); }

 private:
  std::map<Key, double> terms_;
};

/// Hamiltonian derivative H_g f = (d_zeta g)(d_z f) - (d_z g)(d_zeta f), exact for polynomials.
inline Poly2 poisson_bracket(const Poly2& g, const Poly2& f) {
  return g.dzeta() * f.dz() - g.dz() * f.dzeta();
}

}  // namespace mslab
