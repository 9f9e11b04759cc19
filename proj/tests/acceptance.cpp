// Acceptance checks: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mslab/boundary_classifier.hpp"
#include "mslab/ms_flow.hpp"
#include "mslab/pressure_parametrix.hpp"
#include "mslab/propagation_verifier.hpp"
#include "mslab/quantization.hpp"
#include "mslab/quasimode.hpp"

using namespace mslab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3g", v);
  return b;
}

std::vector<Quasimode> family(ModeFamily f, std::optional<int> m, std::optional<double> ratio, std::vector<int> ks) {
  FamilySpec fs;
  fs.family = f;
  fs.m = m;
  fs.m_ratio = ratio;
  fs.ks = std::move(ks);
  return build_family(fs);
}

double angle_diff(double a, double b) { return std::remainder(a - b, kTwoPi); }

Outcome c1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto disk = CollarChart::disk();
  const auto h = classify(disk, 0.0, 0.5);
  const auto g = classify(disk, 0.0, 1.0);
  const auto d = classify(CollarChart::annulus(0.5, AnnulusBoundary::Inner), 0.0, 0.5);
  const auto m = classify(CollarChart::model({{0, 1, 0, 1.0}, {1, 0, 1, 1.0}}), 0.0, 0.0);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double r1 = g.brackets.empty() ? NAN : g.brackets[0];
  const bool ok = h.label() == "H" && g.label() == "G2-" && std::abs(r1 + 2.0) <= 1e-6 && d.label() == "G2+" &&
                  m.label() == "G3" && sec < 1.0;
  return {ok, h.label() + " " + g.label() + " (r1=" + fmt(r1) + ") " + d.label() + " " + m.label() + ", " +
                  fmt(sec) + " s"};
}

Outcome c2() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto disk = CollarChart::disk();
  // closed form: chord subtends 2 arccos(xi'), traversed in time sqrt(1 - xi'^2)
  const double xi = 0.6, eta = 0.8, x0 = 0.3;
  const auto ray = trace(disk, {0.0, x0, eta, xi}, 10.5 * std::sqrt(1.0 - xi * xi));
  double angle_err = 0.0;
  int n = 0;
  for (const auto& e : ray.events) {
    if (e.kind != EventKind::HyperbolicReflection || n >= 10) continue;
    ++n;
    angle_err = std::max(angle_err, std::abs(angle_diff(e.point.x, x0 + n * 2.0 * std::acos(xi))));
  }
  double drift = 0.0;
  for (const auto& seg : ray.segments)
    for (const auto& s : seg.samples) {
      if (s.p.y < 0.0 || s.p.y > disk.collar_width()) continue;
      drift = std::max(drift, std::abs(s.p.eta * s.p.eta - disk.eval_r(s.p.y, s.p.x, s.p.xi).r));
    }
  // gliding for time pi/2 at speed 2 turns by pi
  const auto glide = trace(disk, {0.0, 0.0, 0.0, 1.0}, kPi / 2);
  const double glide_err = std::abs(std::abs(angle_diff(glide.end.p.x, 0.0)) - kPi);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = n == 10 && angle_err <= 1e-8 && drift <= 1e-8 && glide_err <= 1e-8 && sec < 5.0;
  return {ok, std::to_string(n) + " bounces, angle err " + fmt(angle_err) + ", drift " + fmt(drift) +
                  ", glide err " + fmt(glide_err) + ", " + fmt(sec) + " s"};
}

Outcome c3() {
  const std::vector<int> ms{0, 1, 7, 32, 64}, ks{1, 4, 8};
  double pde = 0.0, div = 0.0, tr = 0.0, off_min = INFINITY, bessel = 0.0;
  double worst_sec = 0.0;
  for (ModeFamily f : {ModeFamily::Laplace, ModeFamily::Stokes}) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int m : ms)
      for (int k : ks) {
        const Quasimode md = make_mode({f, m, k, 0, 0});
        const ResidualReport r = residual_report(md);
        pde = std::max(pde, r.pde_residual);
        tr = std::max(tr, r.trace_sup);
        if (f == ModeFamily::Stokes) {
          div = std::max(div, r.div_residual);
          bessel = std::max(bessel, std::abs(std::cyl_bessel_j(m + 1.0, md.lambda)));
          // residual collapse: the same construction off the eigenvalue leaves a boundary trace
          const auto off = residual_report(build_mode(f, m, k, md.lambda * 1.002, md.grid->n_r(), md.grid->n_theta()));
          off_min = std::min(off_min, off.trace_norm);
        }
      }
    worst_sec = std::max(worst_sec, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  const bool ok = pde <= 1e-6 && div <= 1e-8 && tr <= 1e-8 && bessel <= 1e-10 && off_min > 1e3 * tr &&
                  worst_sec < 120.0;
  return {ok, "pde " + fmt(pde) + ", div " + fmt(div) + ", trace " + fmt(tr) + ", |J_{m+1}(lambda)| " + fmt(bessel) +
                  ", off-eigenvalue trace >= " + fmt(off_min) + ", slowest family " + fmt(worst_sec) + " s"};
}

Outcome c4() {
  double lo = INFINITY, hi = 0.0;
  for (const auto& md : family(ModeFamily::Stokes, 3, std::nullopt, {1, 2, 3, 4, 5, 6})) {
    const double v = residual_report(md).normal_derivative_norm;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {hi / lo <= 3.0 && lo > 0.0, "||h d_nu u|| in [" + fmt(lo) + ", " + fmt(hi) + "]"};
}

Outcome c5() {
  // |xi| <= 0.7 on the support, so ||xi|^2 - 1| >= 0.51
  const auto a = sym::momentum_band(0.3, 0.6, 0.1);
  const auto modes = family(ModeFamily::Laplace, 0, std::nullopt, {10, 20, 30, 40, 50, 60});
  std::vector<double> v;
  for (const auto& md : modes) v.push_back(std::abs(pairing(a, md).real()));
  bool track = true;
  std::string s;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double q = (v[i] / v[i - 1]) / (modes[i].h / modes[i - 1].h);
    track = track && std::abs(q - 1.0) <= 0.5;
    s += (i > 1 ? " " : "") + fmt(q);
  }
  return {track && v.back() <= 0.02, "value ratio / h ratio: " + s + "; final " + fmt(v.back())};
}

Outcome c6() {
  const auto psi = sym::radial_band(0.0, 0.8, 0.1);
  const std::vector<double> R{2.0, 3.0, 4.0, 6.0};
  bool nested = true;
  double worst = 0.0;
  for (const auto& md : family(ModeFamily::Laplace, 0, std::nullopt, {5, 10, 20, 40})) {
    const auto t = interior_tail(md, psi, R);
    for (std::size_t i = 1; i < t.size(); ++i) nested = nested && t[i] <= t[i - 1];
    worst = std::max(worst, t[2]);
  }
  return {nested && worst <= 0.01, "max tail at R=4 " + fmt(worst) + (nested ? ", nested" : ", NOT nested")};
}

Outcome c7() {
  const auto disk = CollarChart::disk();
  const auto a = tsym::product(tsym::collar_cutoff(0.2, 0.05), tsym::lambda_band(disk, 1.1, 4.0, 0.05));
  std::string s;
  bool ok = true;
  for (ModeFamily f : {ModeFamily::Laplace, ModeFamily::Stokes}) {
    const auto modes = family(f, std::nullopt, 0.9, {2, 4, 8});
    const double last = std::abs(pairing(a, modes.back()).real());
    ok = ok && last <= 0.02;
    s += (s.empty() ? "" : ", ") + to_string(f) + " " + fmt(last);
  }
  return {ok, s};
}

Outcome c8() {
  const auto disk = CollarChart::disk();
  const auto p0 = build_parametrix(disk, 0.25, 0), p1 = build_parametrix(disk, 0.25, 1);
  std::vector<double> e0, e1;
  for (int m : {32, 64, 128}) {
    e0.push_back(parametrix_error(p0, m, 1.0 / m).rel_error);
    e1.push_back(parametrix_error(p1, m, 1.0 / m).rel_error);
  }
  bool ok = true;
  std::string s;
  for (std::size_t i = 0; i < e0.size(); ++i) {
    ok = ok && e1[i] < e0[i];
    if (i) {
      const double q = e0[i - 1] / e0[i];
      ok = ok && std::abs(q - 2.0) <= 0.6;
      s += " " + fmt(q);
    }
  }
  return {ok, "order-0 halving ratios" + s + "; order 0 " + fmt(e0.back()) + " vs order 1 " + fmt(e1.back()) +
                  " at m=128"};
}

Outcome c9() {
  const auto disk = CollarChart::disk();
  const auto modes = family(ModeFamily::Stokes, std::nullopt, 0.5, {2, 4});
  std::vector<double> slopes, r2;
  for (const auto& md : modes) {
    BandMassOptions bo;
    bo.n_theta = md.grid->n_theta();
    std::vector<double> ys, ls;
    for (int j = 0; j <= 4; ++j) {
      ys.push_back(j * md.h);
      ls.push_back(std::log(band_mass(disk, pressure_sampler(md, disk), ys.back(), md.h, bo)));
    }
    const LineFit f = fit_line(ys, ls);
    slopes.push_back(f.slope);
    r2.push_back(f.r2);
  }
  const double sr = slopes[1] / slopes[0], hr = modes[0].h / modes[1].h;
  const bool ok = r2[0] >= 0.99 && r2[1] >= 0.99 && slopes[0] < 0.0 && std::abs(sr / hr - 1.0) <= 0.25;
  return {ok, "slopes " + fmt(slopes[0]) + ", " + fmt(slopes[1]) + " (R^2 " + fmt(r2[0]) + ", " + fmt(r2[1]) +
                  "); slope ratio " + fmt(sr) + " vs h ratio " + fmt(hr)};
}

Outcome c10() {
  const auto a = sym::product(sym::position_bump(0.3, 0.0, 0.2), sym::momentum_band(0.8, 1.2, 0.1));
  const auto modes = family(ModeFamily::Laplace, 0, std::nullopt, {10, 20, 30, 40, 50, 60});
  const auto r = invariance_gap(modes, a, 0.15);
  bool mono = true;
  std::string s;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (i) mono = mono && r.rows[i].gap <= r.rows[i - 1].gap;
    s += (i ? " " : "") + fmt(r.rows[i].gap);
  }
  const double last = r.rows.back().gap;
  return {mono && last <= 0.05, "gaps " + s + (mono ? "" : " (not decreasing)")};
}

Outcome c11() {
  const auto a = sym::product(sym::position_bump(0.6, 0.0, 0.15), sym::momentum_band(0.8, 1.2, 0.1));
  TransportOptions opt;
  opt.spatial_cutoff = sym::radial_band(0.0, 0.85, 0.05);
  const auto modes = family(ModeFamily::Stokes, std::nullopt, 0.5, {3, 5, 8});
  const auto r = support_gap(modes, a, 0.5, {}, 1, opt);
  bool ok = true;
  std::string s;
  for (const auto& row : r.rows) {
    ok = ok && row.ok && row.after <= 2.0 * row.before + 1e-3;
    s += (s.empty() ? "" : ", ") + fmt(row.before) + " -> " + fmt(row.after);
  }
  return {ok, "mass before -> after: " + s};
}

Outcome c12(double elapsed_before) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = tsym::product(tsym::collar_cutoff(0.1, 0.05), tsym::arc_bump(0.0, 0.6));
  const auto b = rotate_tangential(a, 0.4);
  bool ok = true;
  std::string s;
  for (const auto& md : family(ModeFamily::Stokes, std::nullopt, 0.9, {1, 2, 3})) {
    const double before = pairing(a, md).real(), after = pairing(b, md).real();
    const double q = after / before;
    ok = ok && before > 0.0 && q <= 2.0 && q >= 0.5;
    s += (s.empty() ? "" : " ") + fmt(q);
  }
  const double total = elapsed_before + std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && total < 900.0;
  return {ok, "mass ratios " + s + "; total acceptance runtime " + fmt(total) + " s"};
}

}  // namespace

int main() {
  struct Item {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  double elapsed = 0.0;
  const std::vector<Item> items{
      {1, "classifier ground truth", c1},
      {2, "flow fidelity", c2},
      {3, "quasimode exactness", c3},
      {4, "hidden regularity band", c4},
      {5, "characteristic-set support", c5},
      {6, "h-oscillation tails", c6},
      {7, "elliptic vanishing", c7},
      {8, "pressure parametrix", c8},
      {9, "strip concentration", c9},
      {10, "interior invariance", c10},
      {11, "Stokes support invariance", c11},
      {12, "gliding invariance", [&] { return c12(elapsed); }},
  };
  int failed = 0;
  for (const auto& it : items) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    elapsed += sec;
    if (!o.pass) ++failed;
    std::printf("C%-2d %s  %s: %s [%.2f s]\n", it.id, o.pass ? "PASS" : "FAIL", it.name, o.detail.c_str(), sec);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(items.size()) - failed, items.size());
  return failed ? 1 : 0;
}
