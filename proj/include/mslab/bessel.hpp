#pragma once

// Integer-order Bessel functions J_n(x), x >= 0, by Miller's backward
// recurrence normalized with J_0 + 2 sum J_{2k} = 1, and their positive zeros.

#include <cmath>
#include <vector>

#include "mslab/core.hpp"

namespace mslab::bessel {

/// J_0(x) ... J_{nmax}(x) in one backward sweep.
inline std::vector<double> j_all(int nmax, double x) {
  if (nmax < 0) throw ValidationError("Bessel order must be non-negative");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  const double ax = std::abs(x);
  if (ax < 1e-300) {
    out[0] = 1.0;
    return out;
  }
  const int top = std::max(nmax, static_cast<int>(ax)) + 30 + static_cast<int>(std::sqrt(40.0 * std::max<double>(nmax, ax)));
  const int start = top + (top % 2);
  const double two_over_x = 2.0 / ax;
  double jp1 = 0.0;
  double j = 1e-300;
  double norm = 0.0;
  std::vector<double> buf(static_cast<std::size_t>(start) + 1, 0.0);
  buf[start] = j;
  for (int n = start; n > 0; --n) {
    const double jm1 = n * two_over_x * j - jp1;
    jp1 = j;
    j = jm1;
    buf[n - 1] = j;
    if (std::abs(j) > 1e250) {
      // Rescale the partial sweep to stay in range.
      for (int k = n - 1; k <= start; ++k) buf[k] *= 1e-250;
      jp1 *= 1e-250;
      j *= 1e-250;
    }
  }
  norm = buf[0];
  for (int k = 2; k <= start; k += 2) norm += 2.0 * buf[k];
  for (int n = 0; n <= nmax; ++n) out[n] = buf[n] / norm;
  if (x < 0.0)
    for (int n = 1; n <= nmax; n += 2) out[n] = -out[n];
  return out;
}

inline double j(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * j(-n, x);
  return j_all(n, x)[n];
}

/// Value and derivative of J_n at x.
struct JValue {
  double value = 0.0;
  double deriv = 0.0;
};

inline JValue j_with_derivative(int n, double x) {
  const auto v = j_all(n + 1, x);
  JValue out;
  out.value = v[n];
  out.deriv = n == 0 ? -v[1] : 0.5 * (v[n - 1] - v[n + 1]);
  return out;
}

/// k-th positive zero of J_m, located by a coarse sign scan and refined by
/// bisection safeguarded Newton to ~1e-14 relative.
inline double zero(int m, int k) {
  if (m < 0 || k < 1) throw ValidationError("bessel_zero requires m >= 0 and k >= 1");
  // Zeros of J_m are separated by more than 2 and the first one exceeds m.
  const double dx = 0.25;
  double a = (m == 0 ? 0.5 : static_cast<double>(m));
  double fa = j(m, a);
  int found = 0;
  for (;;) {
    const double b = a + dx;
    const double fb = j(m, b);
    if (fa == 0.0 || fa * fb < 0.0) {
      if (++found == k) {
        if (fa == 0.0) return a;
        double lo = a, hi = b, flo = fa;
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200; ++it) {
          const JValue jv = j_with_derivative(m, x);
          if (jv.value == 0.0) return x;
          if ((jv.value < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = jv.value;
          } else {
            hi = x;
          }
          double next = x - jv.value / jv.deriv;
          if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
          if (std::abs(next - x) <= 1e-15 * x || hi - lo <= 4e-16 * x) return next;
          x = next;
        }
        return x;
      }
    }
    a = b;
    fa = fb;
  }
}

}  // namespace mslab::bessel
