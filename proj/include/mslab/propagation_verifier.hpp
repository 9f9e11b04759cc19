#pragma once

// Quantitative experiments on defect measures of disk mode families:
// flow invariance of pairings, support invariance across reflections,
// elliptic and off-shell vanishing, frequency tails and gliding rotation.
//
// Flow convention: p = |xi|^2 - 1 inside, so x' = 2 xi and a point with
// |xi| = rho moves a distance 2 rho s in time s; reflections flip the
// normal component of xi.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"
#include "mslab/quantization.hpp"
#include "mslab/quasimode.hpp"
#include "mslab/symbols.hpp"

namespace mslab {

// ---- closed-form disk billiard ------------------------------------------------------

/// Broken bicharacteristic of the unit disk for time s (either sign), starting
/// from a point in the closed disk. bounces receives the number of reflections.
inline CartesianPoint disk_billiard(CartesianPoint q, double s, int* bounces = nullptr) {
  int nb = 0;
  const double k2 = q.xi1 * q.xi1 + q.xi2 * q.xi2;
  if (s == 0.0 || k2 == 0.0) {
    if (bounces) *bounces = 0;
    return q;
  }
  const double dir = s > 0.0 ? 1.0 : -1.0;
  double v1 = 2.0 * dir * q.xi1, v2 = 2.0 * dir * q.xi2;  // velocity in the direction of travel
  double rem = std::abs(s);
  const double v2n = v1 * v1 + v2 * v2;
  for (int guard = 0; guard < 1000000; ++guard) {
    // |x + v t| = 1, t > 0
    const double b = q.x1 * v1 + q.x2 * v2;
    const double c = q.x1 * q.x1 + q.x2 * q.x2 - 1.0;
    const double disc = std::max(0.0, b * b - v2n * c);
    double t = (-b + std::sqrt(disc)) / v2n;
    if (t <= 1e-14 * std::sqrt(1.0 / v2n)) {
      // sitting on the boundary and heading out: reflect in place
      if (b > 0.0 && c > -1e-12) t = 0.0;
      else t = std::max(t, 0.0);
    }
    if (t >= rem) {
      q.x1 += v1 * rem;
      q.x2 += v2 * rem;
      break;
    }
    q.x1 += v1 * t;
    q.x2 += v2 * t;
    rem -= t;
    const double nr = std::hypot(q.x1, q.x2);
    const double n1 = q.x1 / nr, n2 = q.x2 / nr;
    const double vn = v1 * n1 + v2 * n2;
    if (vn > 0.0) {
      v1 -= 2.0 * vn * n1;
      v2 -= 2.0 * vn * n2;
      ++nb;
    } else {
      // grazing: nothing to reflect, nudge along the tangent
      q.x1 += v1 * std::min(rem, 1e-15);
      q.x2 += v2 * std::min(rem, 1e-15);
    }
  }
  q.xi1 = dir * v1 / 2.0;
  q.xi2 = dir * v2 / 2.0;
  if (bounces) *bounces = nb;
  return q;
}

// ---- symbol transport -------------------------------------------------------------

struct TransportOptions {
  /// Multiply the transported symbol by this x-only cutoff (keeps its support off the boundary).
  std::optional<InteriorSymbol> spatial_cutoff;
};

/// b = a o gamma(s) on the unit disk.
inline InteriorSymbol transport_symbol(const InteriorSymbol& a, double s, const TransportOptions& opt = {}) {
  if (s == 0.0 && !opt.spatial_cutoff) return a;
  InteriorSymbol b;
  b.eval = [fa = a.eval, s](double x1, double x2, double xi1, double xi2) {
    if (x1 * x1 + x2 * x2 > 1.0) return 0.0;
    const CartesianPoint e = disk_billiard({x1, x2, xi1, xi2}, s);
    return fa(e.x1, e.x2, e.xi1, e.xi2);
  };
  // the x-support moves by at most the path length 2 |s| |xi|
  const double reach = std::isfinite(a.band_hi) ? 2.0 * std::abs(s) * a.band_hi : kInf;
  b.band_lo = a.band_lo;
  b.band_hi = a.band_hi;
  b.x_radius = std::min(1.0, a.x_radius + reach);
  b.box = a.box.grow(reach).intersect({-1.0, 1.0, -1.0, 1.0});
  b.x_dependent = true;
  b.xi_dependent = a.xi_dependent || s != 0.0;
  b.description = "transport(" + a.description + "," + std::to_string(s) + ")";
  if (opt.spatial_cutoff) b = sym::product(b, *opt.spatial_cutoff);
  return b;
}

/// Gliding rotation on the disk boundary: x' moves by 2 xi' s.
inline TangentialSymbol rotate_tangential(const TangentialSymbol& a, double s) {
  if (s == 0.0) return a;
  TangentialSymbol b = a;
  b.eval = [fa = a.eval, s](double y, double x, double xi) { return fa(y, wrap_angle(x + 2.0 * xi * s), xi); };
  b.x_dependent = true;
  b.description = "rotate(" + a.description + "," + std::to_string(s) + ")";
  return b;
}

// ---- reports ----------------------------------------------------------------------

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

enum class ExperimentKind { InvarianceGap, SupportGap, EllipticMass, CarMass, TailMass, GlidingRatio };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::InvarianceGap: return "invariance_gap";
    case ExperimentKind::SupportGap: return "support_gap";
    case ExperimentKind::EllipticMass: return "elliptic_mass";
    case ExperimentKind::CarMass: return "car_mass";
    case ExperimentKind::TailMass: return "tail_mass";
    case ExperimentKind::GlidingRatio: return "gliding_ratio";
  }
  return "?";
}

struct Thresholds {
  double theta_pass = 0.05;
  double kappa = 2.0;
  double theta_floor = 1e-3;
  double theta_tail = 0.01;
};

struct ReportRow {
  int m = 0;
  int k = 0;
  double h = 0.0;
  double before = 0.0;  ///< <a>_k, or mass_before
  double after = 0.0;   ///< <a o gamma(s)>_k, or mass_after; tail value for tail reports
  double gap = 0.0;
  bool ok = true;
  std::string error;
};

struct PropagationReport {
  std::string experiment;
  ExperimentKind kind = ExperimentKind::InvarianceGap;
  std::string symbol;
  double s = 0.0;
  std::vector<ReportRow> rows;
  Thresholds thresholds;
  double fit_constant = 0.0;  ///< car_mass: least-squares C in |value| ~ C h
  Verdict verdict = Verdict::Inconclusive;
  std::string rule;
};

/// Recomputes the verdict from the stored rows and thresholds only.
inline Verdict judge(const PropagationReport& r) {
  if (r.rows.empty()) return Verdict::Inconclusive;
  for (const auto& row : r.rows)
    if (!row.ok) return Verdict::Inconclusive;
  const Thresholds& t = r.thresholds;
  const auto& last = r.rows.back();
  switch (r.kind) {
    case ExperimentKind::InvarianceGap: {
      for (std::size_t i = 1; i < r.rows.size(); ++i)
        if (r.rows[i].gap > r.rows[i - 1].gap) return Verdict::Fail;
      return last.gap <= t.theta_pass ? Verdict::Pass : Verdict::Fail;
    }
    case ExperimentKind::SupportGap:
      for (const auto& row : r.rows)
        if (row.after > t.kappa * row.before + t.theta_floor) return Verdict::Fail;
      return Verdict::Pass;
    case ExperimentKind::EllipticMass:
      return std::abs(last.before) <= t.theta_pass ? Verdict::Pass : Verdict::Fail;
    case ExperimentKind::CarMass: {
      for (const auto& row : r.rows)
        if (std::abs(row.before) > t.kappa * r.fit_constant * row.h + 1e-15) return Verdict::Fail;
      return std::abs(last.before) <= t.theta_pass ? Verdict::Pass : Verdict::Fail;
    }
    case ExperimentKind::TailMass:
      for (const auto& row : r.rows)
        if (row.after > t.theta_tail) return Verdict::Fail;
      return Verdict::Pass;
    case ExperimentKind::GlidingRatio:
      for (const auto& row : r.rows) {
        if (row.before <= 0.0 || row.after <= 0.0) return Verdict::Inconclusive;
        const double q = row.after / row.before;
        if (q > t.kappa || q < 1.0 / t.kappa) return Verdict::Fail;
      }
      return Verdict::Pass;
  }
  return Verdict::Inconclusive;
}

inline std::string rule_text(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::InvarianceGap: return "gaps non-increasing and final gap <= theta_pass";
    case ExperimentKind::SupportGap: return "mass_after <= kappa * mass_before + theta_floor for every mode";
    case ExperimentKind::EllipticMass: return "final |value| <= theta_pass";
    case ExperimentKind::CarMass: return "|value| <= kappa * C * h for every mode and final |value| <= theta_pass";
    case ExperimentKind::TailMass: return "tail <= theta_tail for every mode";
    case ExperimentKind::GlidingRatio: return "after / before within [1 / kappa, kappa] for every mode";
  }
  return "";
}

namespace detail {

inline void check_family(const std::vector<Quasimode>& modes) {
  for (std::size_t i = 1; i < modes.size(); ++i)
    if (!(modes[i].h < modes[i - 1].h)) throw ValidationError("mode family must be ordered by decreasing h");
}

template <class Fn>
std::vector<ReportRow> per_mode(const std::vector<Quasimode>& modes, int jobs, const Fn& fn) {
  check_family(modes);
  std::vector<ReportRow> rows(modes.size());
  parallel_for(modes.size(), jobs, [&](std::size_t i) {
    ReportRow& row = rows[i];
    row.m = modes[i].m;
    row.k = modes[i].k;
    row.h = modes[i].h;
    try {
      fn(modes[i], row);
    } catch (const ClassificationError& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

inline PropagationReport finish(PropagationReport r) {
  r.rule = rule_text(r.kind);
  r.verdict = judge(r);
  return r;
}

}  // namespace detail

/// gap_k = |<a o gamma(s)>_k - <a>_k|.
inline PropagationReport invariance_gap(const std::vector<Quasimode>& modes, const InteriorSymbol& a, double s,
                                        const Thresholds& th = {}, int jobs = 1, const TransportOptions& topt = {}) {
  PropagationReport r;
  r.experiment = "invariance_gap";
  r.kind = ExperimentKind::InvarianceGap;
  r.symbol = a.description;
  r.s = s;
  r.thresholds = th;
  const InteriorSymbol b = transport_symbol(a, s, topt);
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.before = pairing(a, md).real();
    row.after = s == 0.0 && !topt.spatial_cutoff ? row.before : pairing(b, md).real();
    row.gap = std::abs(row.after - row.before);
  });
  return detail::finish(r);
}

/// mass_before = <|a|^2>_k, mass_after = <|a o gamma(s)|^2>_k.
inline PropagationReport support_gap(const std::vector<Quasimode>& modes, const InteriorSymbol& a, double s,
                                     const Thresholds& th = {}, int jobs = 1, const TransportOptions& topt = {}) {
  PropagationReport r;
  r.experiment = "support_gap";
  r.kind = ExperimentKind::SupportGap;
  r.symbol = a.description;
  r.s = s;
  r.thresholds = th;
  const InteriorSymbol a2 = sym::squared(a);
  const InteriorSymbol b2 = sym::squared(transport_symbol(a, s, topt));
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.before = pairing(a2, md).real();
    row.after = pairing(b2, md).real();
    row.gap = row.after - row.before;
  });
  return detail::finish(r);
}

/// Tangential pairings with a symbol supported in the elliptic region.
inline PropagationReport elliptic_mass(const std::vector<Quasimode>& modes, const TangentialSymbol& a,
                                       const Thresholds& th = {}, int jobs = 1) {
  PropagationReport r;
  r.experiment = "elliptic_mass";
  r.kind = ExperimentKind::EllipticMass;
  r.symbol = a.description;
  r.thresholds = th;
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.before = pairing(a, md).real();
    row.after = row.before;
  });
  return detail::finish(r);
}

/// Interior pairings with a symbol vanishing near the characteristic set.
inline PropagationReport car_mass(const std::vector<Quasimode>& modes, const InteriorSymbol& a,
                                  const Thresholds& th = {}, int jobs = 1) {
  PropagationReport r;
  r.experiment = "car_mass";
  r.kind = ExperimentKind::CarMass;
  r.symbol = a.description;
  r.thresholds = th;
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.before = pairing(a, md).real();
    row.after = row.before;
  });
  double num = 0.0, den = 0.0;
  for (const auto& row : r.rows) {
    num += std::abs(row.before) * row.h;
    den += row.h * row.h;
  }
  r.fit_constant = den > 0.0 ? num / den : 0.0;
  return detail::finish(r);
}

/// Interior frequency tail beyond |h xi| >= R for an x-only cutoff psi.
inline PropagationReport h_oscillation_tail(const std::vector<Quasimode>& modes, const InteriorSymbol& psi, double R,
                                            const Thresholds& th = {}, int jobs = 1) {
  if (!(R > 1.0)) throw ValidationError("tail radius R must exceed 1");
  PropagationReport r;
  r.experiment = "h_oscillation_tail";
  r.kind = ExperimentKind::TailMass;
  r.symbol = psi.description + " R=" + std::to_string(R);
  r.thresholds = th;
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.after = interior_tail(md, psi, {R})[0];
  });
  return detail::finish(r);
}

inline PropagationReport tangential_tail(const std::vector<Quasimode>& modes, const TangentialSymbol& psi, double R,
                                         const Thresholds& th = {}, int jobs = 1) {
  if (!(R > 1.0)) throw ValidationError("tail radius R must exceed 1");
  PropagationReport r;
  r.experiment = "tangential_tail";
  r.kind = ExperimentKind::TailMass;
  r.symbol = psi.description + " R=" + std::to_string(R);
  r.thresholds = th;
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.after = tangential_tail(md, psi, {R})[0];
  });
  return detail::finish(r);
}

/// <a>_k against <a rotated by the gliding flow for time s>_k.
inline PropagationReport gliding_ratio(const std::vector<Quasimode>& modes, const TangentialSymbol& a, double s,
                                       const Thresholds& th = {}, int jobs = 1) {
  PropagationReport r;
  r.experiment = "gliding_ratio";
  r.kind = ExperimentKind::GlidingRatio;
  r.symbol = a.description;
  r.s = s;
  r.thresholds = th;
  const TangentialSymbol b = rotate_tangential(a, s);
  r.rows = detail::per_mode(modes, jobs, [&](const Quasimode& md, ReportRow& row) {
    row.before = pairing(a, md).real();
    row.after = pairing(b, md).real();
    row.gap = std::abs(row.after - row.before);
  });
  return detail::finish(r);
}

// ---- mode families ------------------------------------------------------------------

/// m either fixed or tied to lambda by m = floor(ratio * lambda).
struct FamilySpec {
  ModeFamily family = ModeFamily::Laplace;
  std::optional<int> m;
  std::optional<double> m_ratio;
  std::vector<int> ks;
  std::vector<int> ms;  ///< alternative: fixed k (first of ks) and these m values
};

/// Smallest fixed point of m = floor(ratio * lambda(m, k)).
inline int m_for_ratio(ModeFamily f, double ratio, int k) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw ValidationError("m_ratio must lie in (0, 1)");
  int m = 0;
  for (int it = 0; it < 10000; ++it) {
    const int next = static_cast<int>(std::floor(ratio * mode_eigenvalue(f, m, k)));
    if (next == m) return m;
    m = next;
  }
  throw ValidationError("m_ratio iteration did not settle");
}

inline std::vector<ModeSpec> family_specs(const FamilySpec& fs) {
  std::vector<ModeSpec> out;
  if (!fs.ms.empty()) {
    if (fs.ks.size() != 1) throw ValidationError("a family listing m values needs exactly one k");
    for (int m : fs.ms) out.push_back({fs.family, m, fs.ks[0]});
  } else {
    if (fs.ks.empty()) throw ValidationError("mode family needs k values");
    if (fs.m.has_value() == fs.m_ratio.has_value()) throw ValidationError("mode family needs exactly one of m, m_ratio");
    for (int k : fs.ks) out.push_back({fs.family, fs.m ? *fs.m : m_for_ratio(fs.family, *fs.m_ratio, k), k});
  }
  std::sort(out.begin(), out.end(), [](const ModeSpec& a, const ModeSpec& b) {
    return mode_eigenvalue(a.family, a.m, a.k) < mode_eigenvalue(b.family, b.m, b.k);
  });
  return out;
}

inline std::vector<Quasimode> build_family(const FamilySpec& fs, int jobs = 1) {
  const auto specs = family_specs(fs);
  std::vector<std::optional<Quasimode>> tmp(specs.size());
  parallel_for(specs.size(), jobs, [&](std::size_t i) { tmp[i] = make_mode(specs[i]); });
  std::vector<Quasimode> out;
  for (auto& q : tmp) out.push_back(std::move(*q));
  return out;
}

}  // namespace mslab
