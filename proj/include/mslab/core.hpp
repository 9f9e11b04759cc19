#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mslab {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr const char* kVersion = "0.4.1";

/// Base class for all library errors. Each subclass names one failure mode.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfCollarError : public Error {
 public:
  using Error::Error;
};

class OrderBudgetError : public Error {
 public:
  using Error::Error;
};

class ClassificationError : public Error {
 public:
  using Error::Error;
};

class IntegratorError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class SupportError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

namespace smooth {

// C-infinity transition: 0 for t <= 0, 1 for t >= 1.
inline double step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

// Degree-7 polynomial smoothstep, C^3 at both ends.
inline double poly_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double t2 = t * t;
  const double t4 = t2 * t2;
  return t4 * (35.0 - 84.0 * t + 70.0 * t2 - 20.0 * t2 * t);
}

/// Plateau cutoff: 1 on [lo, hi], 0 outside [lo - ramp, hi + ramp], smooth in between.
inline double plateau(double v, double lo, double hi, double ramp) {
  if (ramp <= 0.0) return (v >= lo && v <= hi) ? 1.0 : 0.0;
  return step((v - (lo - ramp)) / ramp) * step(((hi + ramp) - v) / ramp);
}

/// Compactly supported bump of unit height at 0 with support (-1, 1).
inline double bump(double t) {
  const double a = 1.0 - t * t;
  if (a <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / a);
}

}  // namespace smooth

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Runs body(i) for i in [0, n) on at most `jobs` threads (jobs <= 1 runs inline).
/// The first exception thrown by any worker is rethrown after all workers join.
template <class Body>
void parallel_for(std::size_t n, int jobs, const Body& body) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), n));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mslab
