#pragma once

// Dormand-Prince 5(4) embedded Runge-Kutta step on fixed-size states.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

namespace mslab::ode {

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, const State<N>& k) {
  State<N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = y[i] + h * k[i];
  return out;
}

struct Tolerance {
  double rtol = 1e-12;
  double atol = 1e-13;
};

/// One DP5(4) step of size h from y. Writes the 5th-order solution to y_out and
/// returns the scaled error norm (<= 1 means acceptable).
template <std::size_t N, class F>
double dp45_step(const F& f, const State<N>& y, double h, State<N>& y_out, const Tolerance& tol) {
  static constexpr double c21 = 1.0 / 5.0;
  static constexpr double c31 = 3.0 / 40.0, c32 = 9.0 / 40.0;
  static constexpr double c41 = 44.0 / 45.0, c42 = -56.0 / 15.0, c43 = 32.0 / 9.0;
  static constexpr double c51 = 19372.0 / 6561.0, c52 = -25360.0 / 2187.0, c53 = 64448.0 / 6561.0,
                          c54 = -212.0 / 729.0;
  static constexpr double c61 = 9017.0 / 3168.0, c62 = -355.0 / 33.0, c63 = 46732.0 / 5247.0, c64 = 49.0 / 176.0,
                          c65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0, b5 = -2187.0 / 6784.0,
                          b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                          e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
  State<N> k1 = f(y), t;
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * c21 * k1[i];
  const State<N> k2 = f(t);
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (c31 * k1[i] + c32 * k2[i]);
  const State<N> k3 = f(t);
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (c41 * k1[i] + c42 * k2[i] + c43 * k3[i]);
  const State<N> k4 = f(t);
  for (std::size_t i = 0; i < N; ++i) t[i] = y[i] + h * (c51 * k1[i] + c52 * k2[i] + c53 * k3[i] + c54 * k4[i]);
  const State<N> k5 = f(t);
  for (std::size_t i = 0; i < N; ++i)
    t[i] = y[i] + h * (c61 * k1[i] + c62 * k2[i] + c63 * k3[i] + c64 * k4[i] + c65 * k5[i]);
  const State<N> k6 = f(t);
  for (std::size_t i = 0; i < N; ++i)
    y_out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
  const State<N> k7 = f(y_out);
  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = tol.atol + tol.rtol * std::max(std::abs(y[i]), std::abs(y_out[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return err;
}

/// Step-size update after a step with scaled error err.
inline double next_step(double h, double err) {
  const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
  return h * fac;
}

/// Integrate from s0 to s1 (either direction) without events.
template <std::size_t N, class F>
State<N> integrate(const F& f, State<N> y, double s0, double s1, const Tolerance& tol, double h0 = 1e-2) {
  const double dir = s1 >= s0 ? 1.0 : -1.0;
  double s = s0;
  double h = std::abs(h0);
  State<N> trial;
  int guard = 0;
  while (dir * (s1 - s) > 0.0) {
    const double step = std::min(h, dir * (s1 - s));
    const double err = dp45_step(f, y, dir * step, trial, tol);
    if (err <= 1.0) {
      y = trial;
      s += dir * step;
    }
    h = next_step(step, err);
    if (++guard > 10000000) break;
  }
  return y;
}

}  // namespace mslab::ode
