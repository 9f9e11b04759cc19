#pragma once

// Runs validated experiment configs and writes stamped CSV/JSON/binary outputs.
// Files never contain timings or anything else that varies between runs.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "mslab/boundary_classifier.hpp"
#include "mslab/config.hpp"
#include "mslab/io.hpp"
#include "mslab/ms_flow.hpp"
#include "mslab/pressure_parametrix.hpp"
#include "mslab/propagation_verifier.hpp"
#include "mslab/quantization.hpp"
#include "mslab/quasimode.hpp"

namespace mslab::runner {

using json = nlohmann::json;
namespace fs = std::filesystem;

struct RunOptions {
  int jobs = 1;
  fs::path out = "out";
  std::optional<std::uint64_t> seed;  ///< overrides the config seed
  std::vector<std::string> suites;    ///< empty: every experiment
  bool quiet = false;
};

/// pass / fail / inconclusive for judged experiments, ok for plain producers, error on exceptions.
struct ExperimentResult {
  std::string id;
  std::string kind;
  std::string status;
  std::string message;
  std::vector<std::string> files;
};

struct RunSummary {
  std::vector<ExperimentResult> results;
  fs::path dir;

  [[nodiscard]] bool failed() const {
    return std::any_of(results.begin(), results.end(),
                       [](const ExperimentResult& r) { return r.status == "fail" || r.status == "error"; });
  }
  [[nodiscard]] int exit_code() const { return failed() ? 1 : 0; }
};

inline json to_json(const PhasePoint& p) { return {{"y", p.y}, {"x", p.x}, {"eta", p.eta}, {"xi", p.xi}}; }

inline json to_json(const BoundaryClass& c) {
  json j{{"label", c.label()}, {"tag", to_string(c.tag)}, {"r0", c.r0}, {"brackets", c.brackets}};
  if (c.glancing) {
    j["order"] = c.glancing->order;
    j["sign"] = c.glancing->sign;
    j["unresolved"] = c.glancing->unresolved;
  }
  return j;
}

inline json to_json(const Thresholds& t) {
  return {{"theta_pass", t.theta_pass}, {"kappa", t.kappa}, {"theta_floor", t.theta_floor}, {"theta_tail", t.theta_tail}};
}

inline json to_json(const PropagationReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json j{{"m", row.m}, {"k", row.k}, {"h", row.h}, {"before", row.before}, {"after", row.after}, {"gap", row.gap},
           {"ok", row.ok}};
    if (!row.error.empty()) j["error"] = row.error;
    rows.push_back(j);
  }
  return {{"experiment", r.experiment}, {"kind", to_string(r.kind)}, {"symbol", r.symbol}, {"s", r.s},
          {"rows", rows},             {"thresholds", to_json(r.thresholds)}, {"fit_constant", r.fit_constant},
          {"verdict", to_string(r.verdict)}, {"rule", r.rule}};
}

inline std::string status_of(Verdict v) { return to_string(v); }

/// Classification of one boundary point as the JSON printed by `classify`.
inline json classify_json(const CollarChart& chart, double x, double xi, const ClassifyOptions& opt) {
  json j = to_json(classify(chart, x, xi, opt));
  j["x"] = x;
  j["xi"] = xi;
  return j;
}

/// The pressure-parametrix error table for the given m values and orders, h = hm / m.
struct ParametrixTable {
  std::vector<ParametrixError> rows;
  bool halving_ok = true;  ///< order-0 error ratio within [1.4, 2.6] for each doubling of m
  bool order_ok = true;    ///< order 1 strictly below order 0 at every m
};

inline ParametrixTable parametrix_table(const CollarChart& chart, const std::vector<int>& ms, const std::vector<int>& orders,
                                        double delta0, double hm, int jobs = 1) {
  ParametrixTable t;
  std::vector<ParametrixSymbol> ps;
  for (int ord : orders) ps.push_back(build_parametrix(chart, delta0, ord));
  t.rows.resize(ps.size() * ms.size());
  parallel_for(t.rows.size(), jobs, [&](std::size_t i) {
    const std::size_t a = i / ms.size(), b = i % ms.size();
    t.rows[i] = parametrix_error(ps[a], ms[b], hm / ms[b]);
  });
  auto err = [&](int ord, int m) -> std::optional<double> {
    for (const auto& r : t.rows)
      if (r.order == ord && r.m == m) return r.rel_error;
    return std::nullopt;
  };
  for (std::size_t b = 0; b < ms.size(); ++b) {
    const auto e0 = err(0, ms[b]), e1 = err(1, ms[b]);
    if (e0 && e1 && !(*e1 < *e0)) t.order_ok = false;
    for (std::size_t c = 0; c < ms.size(); ++c) {
      if (ms[c] != 2 * ms[b]) continue;
      const auto f0 = err(0, ms[c]);
      if (e0 && f0) {
        const double q = *e0 / *f0;
        if (q < 1.4 || q > 2.6) t.halving_ok = false;
      }
    }
  }
  return t;
}

class Runner {
 public:
  Runner(const config::RunConfig& rc, RunOptions opt) : rc_(rc), opt_(std::move(opt)) {
    stamp_.config_hash = rc.hash;
    seed_ = opt_.seed.value_or(rc.seed);
    dir_ = opt_.out / rc.name;
  }

  RunSummary run() {
    RunSummary sum;
    sum.dir = dir_;
    for (const auto& e : rc_.experiments) {
      if (!opt_.suites.empty() && std::find(opt_.suites.begin(), opt_.suites.end(), e.suite) == opt_.suites.end() &&
          std::find(opt_.suites.begin(), opt_.suites.end(), e.id) == opt_.suites.end())
        continue;
      const auto t0 = std::chrono::steady_clock::now();
      ExperimentResult res;
      res.id = e.id;
      res.kind = e.kind;
      try {
        dispatch(e, res);
      } catch (const std::exception& ex) {
        res.status = "error";
        res.message = ex.what();
      }
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!opt_.quiet) {
        std::cerr << e.id << " [" << e.kind << "] " << res.status;
        if (!res.message.empty()) std::cerr << ": " << res.message;
        std::cerr << " (" << std::fixed << std::setprecision(2) << sec << " s)\n";
        std::cerr.unsetf(std::ios::fixed);
      }
      sum.results.push_back(std::move(res));
    }
    json items = json::array();
    for (const auto& r : sum.results)
      items.push_back({{"id", r.id}, {"kind", r.kind}, {"status", r.status}, {"message", r.message}, {"files", r.files}});
    io::save_json(dir_ / "summary.json", stamp_,
                  {{"name", rc_.name}, {"seed", seed_}, {"thresholds", to_json(rc_.thresholds)}, {"experiments", items},
                   {"failed", sum.failed()}});
    return sum;
  }

 private:
  const config::RunConfig& rc_;
  RunOptions opt_;
  io::Stamp stamp_;
  std::uint64_t seed_ = 0;
  fs::path dir_;

  fs::path file(ExperimentResult& res, const std::string& suffix) {
    res.files.push_back(res.id + suffix);
    return dir_ / (res.id + suffix);
  }

  void dispatch(const config::Experiment& e, ExperimentResult& res) {
    const std::string& k = e.kind;
    if (k == "classify") return do_classify(e, res);
    if (k == "trace") return do_trace(e, res);
    if (k == "mode") return do_mode(e, res);
    if (k == "husimi") return do_husimi(e, res);
    if (k == "parametrix") return do_parametrix(e, res);
    if (k == "measure") return do_measure(e, res);
    if (k == "band_mass") return do_band_mass(e, res);
    if (k == "hidden_regularity") return do_hidden(e, res);
    return do_propagation(e, res);
  }

  void do_classify(const config::Experiment& e, ExperimentResult& res) {
    std::vector<std::pair<double, double>> pts = e.points;
    std::mt19937_64 rng(seed_ ^ std::stoull(io::fnv1a_hex(e.id), nullptr, 16));
    std::uniform_real_distribution<double> ux(-kPi, kPi), uxi(e.xi_lo, e.xi_hi);
    for (int i = 0; i < e.random_points; ++i) {
      const double x = ux(rng);
      pts.emplace_back(x, uxi(rng));
    }
    io::Csv csv(stamp_, {"x", "xi", "label", "r0", "r1", "expected", "match"});
    json items = json::array();
    int mismatches = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const json c = classify_json(*e.chart, pts[i].first, pts[i].second, e.classify_opt);
      const std::string label = c["label"];
      const std::string want = i < e.expect.size() ? e.expect[i] : "";
      const bool match = want.empty() || want == label;
      if (!match) ++mismatches;
      const auto& br = c["brackets"];
      csv.row({io::num(pts[i].first), io::num(pts[i].second), label, io::num(c["r0"].get<double>()),
               br.size() > 1 ? io::num(br[1].get<double>()) : "", want, want.empty() ? "" : (match ? "1" : "0")});
      json item = c;
      if (!want.empty()) item["expected"] = want;
      items.push_back(item);
    }
    csv.save(file(res, ".csv"));
    io::save_json(file(res, ".json"), stamp_, {{"id", e.id}, {"points", items}, {"mismatches", mismatches}});
    if (e.expect.empty()) {
      res.status = "ok";
    } else {
      res.status = mismatches ? "fail" : "pass";
      if (mismatches) res.message = std::to_string(mismatches) + " label mismatches";
    }
  }

  void do_trace(const config::Experiment& e, ExperimentResult& res) {
    Tracer tracer(*e.chart, e.trace_opt);
    const GeneralizedRay ray = e.start ? tracer.trace(*e.start, e.s_max) : tracer.trace_cartesian(*e.start_cartesian, e.s_max);
    io::Csv csv(stamp_, {"s", "y", "x", "eta", "xi", "segment_mode", "component"});
    for (const auto& seg : ray.segments)
      for (const auto& smp : seg.samples)
        csv.row({io::num(smp.s), io::num(smp.p.y), io::num(smp.p.x), io::num(smp.p.eta), io::num(smp.p.xi),
                 to_string(seg.mode), std::to_string(smp.component)});
    csv.save(file(res, ".csv"));
    json events = json::array();
    for (const auto& ev : ray.events)
      events.push_back({{"kind", to_string(ev.kind)},
                        {"s", ev.s},
                        {"point", to_json(ev.point)},
                        {"component", ev.component},
                        {"class", to_json(ev.cls)},
                        {"eta_before", ev.eta_before},
                        {"eta_after", ev.eta_after},
                        {"shallow", ev.shallow}});
    static const char* regions[] = {"cartesian", "collar", "gliding", "exited"};
    json end{{"s", ray.end.s}, {"region", regions[static_cast<int>(ray.end.region)]}, {"component", ray.end.component}};
    if (ray.end.region == Region::Cartesian)
      end["cartesian"] = {ray.end.c.x1, ray.end.c.x2, ray.end.c.xi1, ray.end.c.xi2};
    else
      end["point"] = to_json(ray.end.p);
    io::save_json(file(res, ".events.json"), stamp_,
                  {{"id", e.id}, {"s_max", e.s_max}, {"events", events}, {"end", end}});
    res.status = "ok";
    res.message = std::to_string(ray.events.size()) + " events";
  }

  static json residual_json(const ResidualReport& r) {
    auto n = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
    return {{"pde_residual", n(r.pde_residual)},
            {"div_residual", n(r.div_residual)},
            {"trace_norm", n(r.trace_norm)},
            {"trace_sup", n(r.trace_sup)},
            {"normal_derivative_norm", n(r.normal_derivative_norm)},
            {"pressure_grad_norm", n(r.pressure_grad_norm)},
            {"pressure_norm", n(r.pressure_norm)},
            {"pressure_mean", n(r.pressure_mean)},
            {"l2", n(r.l2)},
            {"grad_norm", n(r.grad_norm)},
            {"hessian_norm", n(r.hessian_norm)}};
  }

  void do_mode(const config::Experiment& e, ExperimentResult& res) {
    const Quasimode md = make_mode(*e.mode);
    const ResidualReport rr = residual_report(md);
    const PolarGrid& g = *md.grid;
    std::vector<double> r(g.n_r()), th(g.n_theta());
    for (int i = 0; i < g.n_r(); ++i) r[i] = g.r(i);
    for (int l = 0; l < g.n_theta(); ++l) th[l] = g.theta(l);
    json meta{{"family", to_string(md.family)}, {"m", md.m},       {"k", md.k},
              {"lambda", md.lambda},            {"h", md.h},       {"r", r},
              {"theta", th},                    {"residuals", residual_json(rr)}};
    io::save_grid(file(res, ".ux.bin"), stamp_, md.ux, meta);
    res.files.push_back(e.id + ".ux.bin.json");
    if (md.family == ModeFamily::Stokes) {
      io::save_grid(file(res, ".uy.bin"), stamp_, md.uy, meta);
      res.files.push_back(e.id + ".uy.bin.json");
      io::save_grid(file(res, ".q.bin"), stamp_, md.q, meta);
      res.files.push_back(e.id + ".q.bin.json");
    }
    res.status = "ok";
  }

  void do_husimi(const config::Experiment& e, ExperimentResult& res) {
    const Quasimode md = make_mode(*e.mode);
    HusimiSpec spec;
    spec.n_x = e.husimi_n;
    spec.n_xi = e.husimi_n;
    const HusimiResult hr = husimi_grid(md, spec);
    const Eigen::Index nx = static_cast<Eigen::Index>(hr.x.size()), nxi = static_cast<Eigen::Index>(hr.xi.size());
    Eigen::MatrixXcd d(nx * nx, nxi * nxi);
    for (Eigen::Index i = 0; i < d.rows(); ++i)
      for (Eigen::Index j = 0; j < d.cols(); ++j) d(i, j) = hr.density[static_cast<std::size_t>(i * d.cols() + j)];
    const double shell = hr.mass_where([](double, double, double a, double b) {
      const double n = std::sqrt(a * a + b * b);
      return n > 0.8 && n < 1.2;
    });
    io::save_grid(file(res, ".bin"), stamp_, d,
                  {{"family", to_string(md.family)}, {"m", md.m}, {"k", md.k}, {"h", md.h}, {"x", hr.x},
                   {"xi", hr.xi}, {"cell", hr.cell}, {"total_mass", hr.total_mass()}, {"shell_mass", shell},
                   {"index", "row = i1 * nx + i2, col = k1 * nxi + k2"}});
    res.files.push_back(e.id + ".bin.json");
    res.status = "ok";
  }

  void do_parametrix(const config::Experiment& e, ExperimentResult& res) {
    const ParametrixTable t = parametrix_table(*e.chart, e.ms, e.orders, e.delta0, e.hm, opt_.jobs);
    io::Csv csv(stamp_, {"m", "h", "order", "abs_error", "ref_norm", "rel_error"});
    json rows = json::array();
    for (const auto& r : t.rows) {
      csv.row({std::to_string(r.m), io::num(r.h), std::to_string(r.order), io::num(r.abs_error), io::num(r.ref_norm),
               io::num(r.rel_error)});
      rows.push_back({{"m", r.m}, {"h", r.h}, {"order", r.order}, {"rel_error", r.rel_error}});
    }
    csv.save(file(res, ".csv"));
    const bool pass = t.halving_ok && t.order_ok;
    res.status = pass ? "pass" : "fail";
    if (!t.halving_ok) res.message = "order-0 error does not halve per doubling of m";
    if (!t.order_ok) res.message += std::string(res.message.empty() ? "" : "; ") + "order 1 not below order 0";
    io::save_json(file(res, ".json"), stamp_,
                  {{"id", e.id}, {"delta0", e.delta0}, {"hm", e.hm}, {"rows", rows}, {"halving_ok", t.halving_ok},
                   {"order_ok", t.order_ok}, {"rule", "e0(m) / e0(2m) in [1.4, 2.6]; e1 < e0 at every m"},
                   {"verdict", res.status}});
  }

  std::vector<Quasimode> family(const config::Experiment& e) { return build_family(*e.family, opt_.jobs); }

  void do_measure(const config::Experiment& e, ExperimentResult& res) {
    const auto modes = family(e);
    const PairingSeries ps = e.symbol ? measure_sequence(*e.symbol, modes, opt_.jobs) : measure_sequence(*e.tsymbol, modes);
    io::Csv csv(stamp_, {"m", "k", "h", "re", "im", "gap"});
    for (std::size_t i = 0; i < ps.entries.size(); ++i)
      csv.row({std::to_string(modes[i].m), std::to_string(modes[i].k), io::num(ps.entries[i].h),
               io::num(ps.entries[i].value.real()), io::num(ps.entries[i].value.imag()),
               i ? io::num(ps.gaps[i - 1]) : ""});
    csv.save(file(res, ".csv"));
    json body{{"id", e.id}, {"symbol", e.symbol ? e.symbol->description : e.tsymbol->description}};
    if (ps.limit) body["limit"] = {ps.limit->real(), ps.limit->imag()};
    io::save_json(file(res, ".json"), stamp_, body);
    res.status = "ok";
  }

  void do_band_mass(const config::Experiment& e, ExperimentResult& res) {
    const auto modes = family(e);
    if (modes.size() < 2) throw ValidationError("band_mass needs at least two modes");
    io::Csv csv(stamp_, {"m", "k", "h", "y0", "band_mass", "log_band_mass"});
    std::vector<double> slopes, hs;
    json fits = json::array();
    bool linear = true;
    for (const auto& md : modes) {
      if (md.family != ModeFamily::Stokes) throw ValidationError("band_mass uses Stokes pressures");
      BandMassOptions bo;
      bo.delta0 = e.delta0;
      bo.n_theta = md.grid->n_theta();
      std::vector<double> ys, ls;
      for (double t : e.y0_over_h) {
        const double y0 = t * md.h;
        const double bm = band_mass(*e.chart, pressure_sampler(md, *e.chart), y0, md.h, bo);
        ys.push_back(y0);
        ls.push_back(std::log(bm));
        csv.row({std::to_string(md.m), std::to_string(md.k), io::num(md.h), io::num(y0), io::num(bm), io::num(ls.back())});
      }
      const LineFit f = fit_line(ys, ls);
      if (f.r2 < 0.99) linear = false;
      slopes.push_back(f.slope);
      hs.push_back(md.h);
      fits.push_back({{"m", md.m}, {"k", md.k}, {"h", md.h}, {"slope", f.slope}, {"intercept", f.intercept}, {"r2", f.r2}});
    }
    csv.save(file(res, ".csv"));
    bool ratios = true;
    json pairs = json::array();
    for (std::size_t i = 1; i < slopes.size(); ++i) {
      const double sr = slopes[i] / slopes[i - 1], hr = hs[i - 1] / hs[i];
      const bool ok = std::abs(sr / hr - 1.0) <= 0.25;
      ratios = ratios && ok;
      pairs.push_back({{"slope_ratio", sr}, {"h_ratio", hr}, {"ok", ok}});
    }
    res.status = linear && ratios ? "pass" : "fail";
    if (!linear) res.message = "log band mass not linear in y0 (r2 < 0.99)";
    if (!ratios) res.message += std::string(res.message.empty() ? "" : "; ") + "slope ratio off the h ratio by > 25%";
    io::save_json(file(res, ".json"), stamp_,
                  {{"id", e.id}, {"fits", fits}, {"ratios", pairs},
                   {"rule", "r2 >= 0.99 per mode; |slope ratio / h ratio - 1| <= 0.25"}, {"verdict", res.status}});
  }

  void do_hidden(const config::Experiment& e, ExperimentResult& res) {
    const auto modes = family(e);
    std::vector<ResidualReport> rr(modes.size());
    parallel_for(modes.size(), opt_.jobs, [&](std::size_t i) { rr[i] = residual_report(modes[i]); });
    io::Csv csv(stamp_, {"m", "k", "h", "normal_derivative_norm", "trace_norm"});
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      csv.row({std::to_string(modes[i].m), std::to_string(modes[i].k), io::num(modes[i].h),
               io::num(rr[i].normal_derivative_norm), io::num(rr[i].trace_norm)});
      lo = std::min(lo, rr[i].normal_derivative_norm);
      hi = std::max(hi, rr[i].normal_derivative_norm);
    }
    csv.save(file(res, ".csv"));
    const double band = hi / lo;
    res.status = band <= 3.0 ? "pass" : "fail";
    io::save_json(file(res, ".json"), stamp_,
                  {{"id", e.id}, {"min", lo}, {"max", hi}, {"band", band}, {"rule", "max / min <= 3"},
                   {"verdict", res.status}});
  }

  void do_propagation(const config::Experiment& e, ExperimentResult& res) {
    const auto modes = family(e);
    const Thresholds& th = rc_.thresholds;
    TransportOptions topt;
    topt.spatial_cutoff = e.spatial_cutoff;
    PropagationReport r;
    const std::string& k = e.kind;
    if (k == "invariance_gap") r = invariance_gap(modes, *e.symbol, e.s, th, opt_.jobs, topt);
    else if (k == "support_gap") r = support_gap(modes, *e.symbol, e.s, th, opt_.jobs, topt);
    else if (k == "elliptic_mass") r = elliptic_mass(modes, *e.tsymbol, th, opt_.jobs);
    else if (k == "car_mass") r = car_mass(modes, *e.symbol, th, opt_.jobs);
    else if (k == "tail") r = h_oscillation_tail(modes, *e.symbol, e.R, th, opt_.jobs);
    else if (k == "tangential_tail") r = tangential_tail(modes, *e.tsymbol, e.R, th, opt_.jobs);
    else if (k == "gliding_ratio") r = gliding_ratio(modes, *e.tsymbol, e.s, th, opt_.jobs);
    else throw ValidationError("unknown experiment kind '" + k + "'");
    r.experiment = e.id;

    json body = to_json(r);
    bool nested_ok = true;
    if (!e.R_nested.empty() && (k == "tail" || k == "tangential_tail")) {
      std::vector<double> radii = e.R_nested;
      std::sort(radii.begin(), radii.end());
      json nested = json::array();
      for (const auto& md : modes) {
        const auto t = k == "tail" ? interior_tail(md, *e.symbol, radii) : tangential_tail(md, *e.tsymbol, radii);
        for (std::size_t i = 1; i < t.size(); ++i)
          if (t[i] > t[i - 1]) nested_ok = false;
        nested.push_back({{"k", md.k}, {"R", radii}, {"tail", t}});
      }
      body["nested"] = nested;
      body["nested_ok"] = nested_ok;
    }

    io::Csv csv(stamp_, {"m", "k", "h", "before", "after", "gap", "ok"});
    for (const auto& row : r.rows)
      csv.row({std::to_string(row.m), std::to_string(row.k), io::num(row.h), io::num(row.before), io::num(row.after),
               io::num(row.gap), row.ok ? "1" : "0"});
    csv.save(file(res, ".csv"));
    res.status = status_of(r.verdict);
    if (!nested_ok) {
      res.status = "fail";
      res.message = "tails not nested";
    }
    body["status"] = res.status;
    io::save_json(file(res, ".json"), stamp_, body);
  }
};

inline RunSummary run(const config::RunConfig& rc, const RunOptions& opt) { return Runner(rc, opt).run(); }

}  // namespace mslab::runner
