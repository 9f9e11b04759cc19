#pragma once

// Experiment configs: JSON documents validated in full before anything runs.
// Every problem is reported with its key path, all at once.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mslab/boundary_classifier.hpp"
#include "mslab/collar_geometry.hpp"
#include "mslab/core.hpp"
#include "mslab/io.hpp"
#include "mslab/ms_flow.hpp"
#include "mslab/propagation_verifier.hpp"
#include "mslab/quasimode.hpp"
#include "mslab/symbols.hpp"

namespace mslab::config {

using json = nlohmann::json;

class Issues {
 public:
  void add(const std::string& path, const std::string& msg) { items_.push_back(path + ": " + msg); }
  [[nodiscard]] bool empty() const { return items_.empty(); }
  [[nodiscard]] const std::vector<std::string>& items() const { return items_; }
  void raise() const {
    if (items_.empty()) return;
    std::string msg = "invalid config";
    for (const auto& s : items_) msg += "\n  " + s;
    throw ValidationError(msg);
  }

 private:
  std::vector<std::string> items_;
};

/// Typed access to one JSON object with unknown-key detection.
class Obj {
 public:
  Obj(const json& j, std::string path, Issues& is) : j_(j), path_(std::move(path)), is_(is) {
    if (!j_.is_object()) is_.add(path_, "expected an object");
  }

  [[nodiscard]] std::string at(const std::string& key) const { return path_ + "." + key; }
  [[nodiscard]] bool has(const std::string& key) const {
    seen_.insert(key);
    return j_.is_object() && j_.contains(key);
  }
  [[nodiscard]] const json& raw(const std::string& key) const {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def, bool positive = false, bool nonneg = false) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number()) {
      is_.add(at(key), "expected a number");
      return def;
    }
    const double d = v.get<double>();
    if (positive && !(d > 0.0)) is_.add(at(key), "must be positive (got " + v.dump() + ")");
    if (nonneg && !(d >= 0.0)) is_.add(at(key), "must be nonnegative (got " + v.dump() + ")");
    return d;
  }

  std::optional<double> opt_number(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return number(key, 0.0);
  }

  int integer(const std::string& key, int def, int lo = INT32_MIN) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_number_integer()) {
      is_.add(at(key), "expected an integer");
      return def;
    }
    const int i = v.get<int>();
    if (i < lo) is_.add(at(key), "must be >= " + std::to_string(lo));
    return i;
  }

  std::string str(const std::string& key, const std::string& def) const {
    if (!has(key)) return def;
    const json& v = raw(key);
    if (!v.is_string()) {
      is_.add(at(key), "expected a string");
      return def;
    }
    return v.get<std::string>();
  }

  std::string required_str(const std::string& key) const {
    if (!has(key)) {
      is_.add(at(key), "missing");
      return "";
    }
    return str(key, "");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) {
      is_.add(at(key), "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) is_.add(at(key) + "[" + std::to_string(i) + "]", "expected a number");
      else out.push_back(v[i].get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, int lo = INT32_MIN) const {
    std::vector<int> out;
    if (!has(key)) return out;
    const json& v = raw(key);
    if (!v.is_array()) {
      is_.add(at(key), "expected an array of integers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number_integer()) {
        is_.add(at(key) + "[" + std::to_string(i) + "]", "expected an integer");
      } else {
        const int x = v[i].get<int>();
        if (x < lo) is_.add(at(key) + "[" + std::to_string(i) + "]", "must be >= " + std::to_string(lo));
        out.push_back(x);
      }
    }
    return out;
  }

  /// Reports keys present in the object but never read.
  void finish() const {
    if (!j_.is_object()) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) is_.add(at(it.key()), "unknown key");
  }

  [[nodiscard]] const std::string& path() const { return path_; }
  Issues& issues() const { return is_; }

 private:
  const json& j_;
  std::string path_;
  Issues& is_;
  mutable std::set<std::string> seen_;
};

// ---- charts ------------------------------------------------------------------

/// "disk" | "annulus" | {"kind": ..., ...}. Relative model files resolve against base.
inline std::shared_ptr<CollarChart> parse_chart(const json& j, const std::string& path, Issues& is,
                                                const std::filesystem::path& base = {}) {
  try {
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if (s == "disk") return std::make_shared<CollarChart>(CollarChart::disk());
      if (s == "annulus") return std::make_shared<CollarChart>(CollarChart::annulus(0.5, AnnulusBoundary::Outer));
      std::filesystem::path p = s;
      if (p.is_relative() && !base.empty()) p = base / p;
      return std::make_shared<CollarChart>(CollarChart::load_model(p.string()));
    }
    Obj o(j, path, is);
    const std::string kind = o.required_str("kind");
    std::shared_ptr<CollarChart> out;
    if (kind == "disk") {
      out = std::make_shared<CollarChart>(CollarChart::disk(o.number("width", 0.3, true), o.integer("max_order", 8, 4)));
    } else if (kind == "annulus") {
      const double inner = o.number("inner", 0.5, true);
      const std::string which = o.str("boundary", "outer");
      if (which != "inner" && which != "outer") is.add(o.at("boundary"), "must be 'inner' or 'outer'");
      out = std::make_shared<CollarChart>(CollarChart::annulus(
          inner, which == "inner" ? AnnulusBoundary::Inner : AnnulusBoundary::Outer, o.number("width", 0.1, true),
          o.integer("max_order", 8, 4)));
    } else if (kind == "model") {
      if (o.has("file")) {
        std::filesystem::path p = o.str("file", "");
        if (p.is_relative() && !base.empty()) p = base / p;
        out = std::make_shared<CollarChart>(CollarChart::load_model(p.string()));
      } else if (o.has("terms")) {
        std::ostringstream text;
        text << "collar_width " << o.number("width", 1.0, true) << "\nmax_order " << o.integer("max_order", 8, 4) << "\n";
        const json& t = o.raw("terms");
        if (!t.is_array()) {
          is.add(o.at("terms"), "expected [[pz, pzeta, py, coeff], ...]");
        } else {
          for (std::size_t i = 0; i < t.size(); ++i) {
            if (!t[i].is_array() || t[i].size() != 4) {
              is.add(o.at("terms") + "[" + std::to_string(i) + "]", "expected [pz, pzeta, py, coeff]");
              continue;
            }
            text << "term " << t[i][0].get<int>() << ' ' << t[i][1].get<int>() << ' ' << t[i][2].get<int>() << ' '
                 << io::num(t[i][3].get<double>()) << "\n";
          }
        }
        std::istringstream in(text.str());
        if (is.empty()) out = std::make_shared<CollarChart>(CollarChart::parse_model(in));
      } else {
        is.add(path, "model chart needs 'file' or 'terms'");
      }
    } else if (!kind.empty()) {
      is.add(o.at("kind"), "unknown chart kind '" + kind + "'");
    }
    o.finish();
    return out;
  } catch (const Error& e) {
    is.add(path, e.what());
  } catch (const json::exception& e) {
    is.add(path, e.what());
  }
  return nullptr;
}


// ---- symbols ---------------------------------------------------------------------

inline std::optional<InteriorSymbol> parse_interior(const json& j, const std::string& path, Issues& is) {
  Obj o(j, path, is);
  const std::string op = o.required_str("op");
  std::optional<InteriorSymbol> out;
  auto args = [&]() {
    std::vector<InteriorSymbol> v;
    if (!o.has("args") || !o.raw("args").is_array() || o.raw("args").empty()) {
      is.add(o.at("args"), "expected a nonempty array of symbols");
      return v;
    }
    const json& a = o.raw("args");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (auto s = parse_interior(a[i], o.at("args") + "[" + std::to_string(i) + "]", is)) v.push_back(*s);
    return v;
  };
  auto center = [&]() -> std::pair<double, double> {
    const auto c = o.numbers("center");
    if (c.size() != 2) {
      is.add(o.at("center"), "expected [x1, x2]");
      return {0.0, 0.0};
    }
    return {c[0], c[1]};
  };
  try {
    if (op == "constant") {
      out = sym::constant(o.number("value", 1.0));
    } else if (op == "position_bump") {
      const auto [c1, c2] = center();
      out = sym::position_bump(c1, c2, o.number("radius", 0.2, true));
    } else if (op == "radial_band") {
      out = sym::radial_band(o.number("lo", 0.0), o.number("hi", 0.5), o.number("ramp", 0.1, false, true));
    } else if (op == "angular_bump") {
      out = sym::angular_bump(o.number("theta0", 0.0), o.number("width", 0.5, true));
    } else if (op == "momentum_band") {
      out = sym::momentum_band(o.number("lo", 0.8), o.number("hi", 1.2), o.number("ramp", 0.1, false, true));
    } else if (op == "angular_momentum_band") {
      out = sym::angular_momentum_band(o.number("lo", 0.4), o.number("hi", 0.6), o.number("ramp", 0.1, false, true));
    } else if (op == "direction_bump") {
      out = sym::direction_bump(o.number("phi0", 0.0), o.number("width", 0.5, true));
    } else if (op == "xi_component") {
      out = sym::xi_component(o.integer("index", 1));
    } else if (op == "product" || op == "sum") {
      const auto v = args();
      if (!v.empty()) {
        InteriorSymbol acc = v[0];
        for (std::size_t i = 1; i < v.size(); ++i) acc = op == "product" ? sym::product(acc, v[i]) : sym::sum(acc, v[i]);
        out = acc;
      }
    } else if (op == "scaled") {
      const auto v = args();
      if (v.size() == 1) out = sym::scaled(v[0], o.number("factor", 1.0));
      else if (!v.empty()) is.add(o.at("args"), "scaled takes one symbol");
    } else if (op == "squared") {
      const auto v = args();
      if (v.size() == 1) out = sym::squared(v[0]);
      else if (!v.empty()) is.add(o.at("args"), "squared takes one symbol");
    } else if (!op.empty()) {
      is.add(o.at("op"), "unknown interior symbol '" + op + "'");
    }
  } catch (const Error& e) {
    is.add(path, e.what());
  }
  o.finish();
  return out;
}

inline std::optional<TangentialSymbol> parse_tangential(const json& j, const std::string& path, Issues& is,
                                                        const CollarChart& chart) {
  Obj o(j, path, is);
  const std::string op = o.required_str("op");
  std::optional<TangentialSymbol> out;
  auto args = [&]() {
    std::vector<TangentialSymbol> v;
    if (!o.has("args") || !o.raw("args").is_array() || o.raw("args").empty()) {
      is.add(o.at("args"), "expected a nonempty array of symbols");
      return v;
    }
    const json& a = o.raw("args");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (auto s = parse_tangential(a[i], o.at("args") + "[" + std::to_string(i) + "]", is, chart)) v.push_back(*s);
    return v;
  };
  try {
    if (op == "constant") {
      out = tsym::constant(o.number("value", 1.0));
    } else if (op == "collar_cutoff") {
      out = tsym::collar_cutoff(o.number("y0", 0.05, false, true), o.number("ramp", 0.05, true));
    } else if (op == "arc_bump") {
      out = tsym::arc_bump(o.number("theta0", 0.0), o.number("width", 0.5, true));
    } else if (op == "xi_band") {
      out = tsym::xi_band(o.number("lo", 0.9), o.number("hi", 1.1), o.number("ramp", 0.05, false, true));
    } else if (op == "lambda_band") {
      out = tsym::lambda_band(chart, o.number("lo", 1.3), o.number("hi", 1.6), o.number("ramp", 0.05, false, true));
    } else if (op == "product" || op == "sum") {
      const auto v = args();
      if (!v.empty()) {
        TangentialSymbol acc = v[0];
        for (std::size_t i = 1; i < v.size(); ++i) acc = op == "product" ? tsym::product(acc, v[i]) : tsym::sum(acc, v[i]);
        out = acc;
      }
    } else if (op == "squared") {
      const auto v = args();
      if (v.size() == 1) out = tsym::squared(v[0]);
      else if (!v.empty()) is.add(o.at("args"), "squared takes one symbol");
    } else if (!op.empty()) {
      is.add(o.at("op"), "unknown tangential symbol '" + op + "'");
    }
  } catch (const Error& e) {
    is.add(path, e.what());
  }
  o.finish();
  return out;
}

// ---- families --------------------------------------------------------------------

inline std::optional<FamilySpec> parse_family(const json& j, const std::string& path, Issues& is) {
  Obj o(j, path, is);
  FamilySpec fs;
  const std::string fam = o.str("family", "laplace");
  try {
    fs.family = mslab::parse_family(fam);
  } catch (const Error& e) {
    is.add(o.at("family"), e.what());
  }
  if (o.has("m")) fs.m = o.integer("m", 0, 0);
  if (o.has("m_ratio")) {
    const double r = o.number("m_ratio", 0.5);
    if (!(r > 0.0 && r < 1.0)) is.add(o.at("m_ratio"), "must lie in (0, 1)");
    fs.m_ratio = r;
  }
  fs.ks = o.integers("k", 1);
  fs.ms = o.integers("ms", 0);
  if (fs.ks.empty()) is.add(o.at("k"), "missing or empty");
  if (!fs.ms.empty()) {
    if (fs.ks.size() != 1) is.add(o.at("k"), "a family listing 'ms' needs exactly one k");
    if (fs.m || fs.m_ratio) is.add(path, "'ms' excludes 'm' and 'm_ratio'");
  } else if (fs.m.has_value() == fs.m_ratio.has_value()) {
    is.add(path, "exactly one of 'm', 'm_ratio', 'ms' is required");
  }
  o.finish();
  return fs;
}

// ---- experiments -----------------------------------------------------------------

struct Experiment {
  std::string id;
  std::string kind;
  std::string suite;  ///< optional tag used by `verify --suite`
  json spec;  ///< the experiment's own JSON (echoed into reports)
  std::shared_ptr<CollarChart> chart;

  // classify
  std::vector<std::pair<double, double>> points;
  std::vector<std::string> expect;
  int random_points = 0;
  double xi_lo = -1.5, xi_hi = 1.5;
  ClassifyOptions classify_opt;

  // trace
  std::optional<PhasePoint> start;
  std::optional<CartesianPoint> start_cartesian;
  double s_max = 1.0;
  TraceOptions trace_opt;

  // mode families and symbols
  std::optional<FamilySpec> family;
  std::optional<InteriorSymbol> symbol;
  std::optional<TangentialSymbol> tsymbol;
  std::optional<InteriorSymbol> spatial_cutoff;
  double s = 0.0;
  double R = 4.0;
  std::vector<double> R_nested;  ///< tail: extra radii for the nesting check

  // single mode
  std::optional<ModeSpec> mode;

  // parametrix
  std::vector<int> ms;
  std::vector<int> orders;
  double delta0 = 0.25;
  double hm = 1.0;  ///< parametrix: h = hm / m

  // band mass
  std::vector<double> y0_over_h;

  // husimi
  int husimi_n = 0;
};

struct RunConfig {
  std::string name;
  std::uint64_t seed = 0;
  Thresholds thresholds;
  std::vector<Experiment> experiments;
  json raw;
  std::string hash;
};

inline const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> k{"classify",      "trace",        "mode",          "measure",
                                       "invariance_gap", "support_gap",  "elliptic_mass", "car_mass",
                                       "tail",          "tangential_tail", "gliding_ratio", "parametrix",
                                       "band_mass",     "hidden_regularity", "husimi"};
  return k;
}

inline Experiment parse_experiment(const json& j, const std::string& path, Issues& is, const RunConfig& rc,
                                   const std::filesystem::path& base) {
  Experiment e;
  e.spec = j;
  Obj o(j, path, is);
  e.id = o.required_str("id");
  e.kind = o.required_str("kind");
  e.suite = o.str("suite", "");
  if (!e.kind.empty() && !experiment_kinds().count(e.kind)) is.add(o.at("kind"), "unknown experiment kind '" + e.kind + "'");
  e.chart = o.has("chart") ? parse_chart(o.raw("chart"), o.at("chart"), is, base)
                           : std::make_shared<CollarChart>(CollarChart::disk());

  // tolerances shared by classify and trace
  e.classify_opt.tol_g = o.number("tol_g", 1e-8);
  if (!(e.classify_opt.tol_g > 0.0)) is.add(o.at("tol_g"), "tol_g must be positive");
  e.classify_opt.tol_bracket = o.number("tol_bracket", 1e-6);
  if (!(e.classify_opt.tol_bracket > 0.0)) is.add(o.at("tol_bracket"), "tol_bracket must be positive");
  e.classify_opt.k_max = o.integer("k_max", 0, 0);
  e.trace_opt.tol_g = e.classify_opt.tol_g;
  e.trace_opt.tol_bracket = e.classify_opt.tol_bracket;

  const std::string& k = e.kind;
  if (k == "classify") {
    if (o.has("points")) {
      const json& p = o.raw("points");
      if (!p.is_array()) is.add(o.at("points"), "expected [[x', xi'], ...]");
      else
        for (std::size_t i = 0; i < p.size(); ++i) {
          if (!p[i].is_array() || p[i].size() != 2 || !p[i][0].is_number() || !p[i][1].is_number())
            is.add(o.at("points") + "[" + std::to_string(i) + "]", "expected [x', xi']");
          else e.points.emplace_back(p[i][0].get<double>(), p[i][1].get<double>());
        }
    }
    if (o.has("expect")) {
      const json& x = o.raw("expect");
      if (!x.is_array()) is.add(o.at("expect"), "expected an array of labels");
      else
        for (const auto& v : x) e.expect.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      if (e.expect.size() != e.points.size()) is.add(o.at("expect"), "needs one label per point");
    }
    e.random_points = o.integer("random_points", 0, 0);
    e.xi_lo = o.number("xi_lo", -1.5);
    e.xi_hi = o.number("xi_hi", 1.5);
    if (e.points.empty() && e.random_points == 0) is.add(path, "classify needs 'points' or 'random_points'");
  } else if (k == "trace") {
    if (o.has("start")) {
      const auto v = o.numbers("start");
      if (v.size() != 4) is.add(o.at("start"), "expected [y, x', eta, xi']");
      else e.start = PhasePoint{v[0], v[1], v[2], v[3]};
    }
    if (o.has("start_cartesian")) {
      const auto v = o.numbers("start_cartesian");
      if (v.size() != 4) is.add(o.at("start_cartesian"), "expected [x1, x2, xi1, xi2]");
      else e.start_cartesian = CartesianPoint{v[0], v[1], v[2], v[3]};
    }
    if (e.start.has_value() == e.start_cartesian.has_value()) is.add(path, "trace needs exactly one of 'start', 'start_cartesian'");
    e.s_max = o.number("s_max", 1.0, true);
    e.trace_opt.sample_ds = o.number("sample_ds", e.trace_opt.sample_ds, true);
  } else if (k == "mode" || k == "husimi") {
    ModeSpec ms;
    try {
      ms.family = mslab::parse_family(o.str("family", "laplace"));
    } catch (const Error& er) {
      is.add(o.at("family"), er.what());
    }
    ms.m = o.integer("m", 0, 0);
    ms.k = o.integer("k", 1, 1);
    ms.n_r = o.integer("n_r", 0, 0);
    ms.n_theta = o.integer("n_theta", 0, 0);
    e.mode = ms;
    if (k == "husimi") e.husimi_n = o.integer("n", 0, 0);
  } else if (k == "parametrix") {
    e.ms = o.integers("m", 1);
    if (e.ms.empty()) is.add(o.at("m"), "missing or empty");
    e.orders = o.integers("orders", 0);
    if (e.orders.empty()) e.orders = {0, 1};
    for (int ord : e.orders)
      if (ord != 0 && ord != 1) is.add(o.at("orders"), "orders must be 0 or 1");
    e.delta0 = o.number("delta0", 0.25, true);
    e.hm = o.number("hm", 1.0, true);
  } else {
    // family-based experiments
    if (!o.has("family")) is.add(o.at("family"), "missing");
    else e.family = parse_family(o.raw("family"), o.at("family"), is);
    const bool tangential = k == "elliptic_mass" || k == "gliding_ratio" || k == "tangential_tail";
    const bool needs_symbol = k != "hidden_regularity" && k != "band_mass";
    if (needs_symbol) {
      if (!o.has("symbol")) {
        is.add(o.at("symbol"), "missing");
      } else if (k == "measure") {
        const std::string where = o.str("space", "interior");
        if (where == "tangential") e.tsymbol = parse_tangential(o.raw("symbol"), o.at("symbol"), is, *e.chart);
        else if (where == "interior") e.symbol = parse_interior(o.raw("symbol"), o.at("symbol"), is);
        else is.add(o.at("space"), "must be 'interior' or 'tangential'");
      } else if (tangential) {
        if (e.chart) e.tsymbol = parse_tangential(o.raw("symbol"), o.at("symbol"), is, *e.chart);
      } else {
        e.symbol = parse_interior(o.raw("symbol"), o.at("symbol"), is);
      }
    }
    if (o.has("spatial_cutoff")) e.spatial_cutoff = parse_interior(o.raw("spatial_cutoff"), o.at("spatial_cutoff"), is);
    e.s = o.number("s", 0.0);
    e.R = o.number("R", 4.0);
    if ((k == "tail" || k == "tangential_tail") && !(e.R > 1.0)) is.add(o.at("R"), "must exceed 1");
    e.R_nested = o.numbers("R_nested");
    for (double r : e.R_nested)
      if (!(r > 1.0)) is.add(o.at("R_nested"), "radii must exceed 1");
    if (k == "band_mass") {
      e.y0_over_h = o.numbers("y0_over_h");
      if (e.y0_over_h.empty()) e.y0_over_h = {0.0, 1.0, 2.0, 3.0, 4.0};
      if (e.y0_over_h.size() < 2) is.add(o.at("y0_over_h"), "needs at least two depths");
      e.delta0 = o.number("delta0", 0.25, true);
    }
  }
  (void)rc;
  o.finish();
  return e;
}

inline Thresholds parse_thresholds(const json& j, const std::string& path, Issues& is, Thresholds t = {}) {
  Obj o(j, path, is);
  t.theta_pass = o.number("theta_pass", t.theta_pass, true);
  t.kappa = o.number("kappa", t.kappa, true);
  t.theta_floor = o.number("theta_floor", t.theta_floor, false, true);
  t.theta_tail = o.number("theta_tail", t.theta_tail, true);
  o.finish();
  return t;
}

/// Validates the whole document; throws ValidationError listing every problem.
inline RunConfig parse(const json& doc, const std::filesystem::path& base = {}) {
  Issues is;
  RunConfig rc;
  rc.raw = doc;
  rc.hash = io::config_hash(doc);
  Obj o(doc, "$", is);
  rc.name = o.str("name", "run");
  if (o.has("seed")) {
    const json& s = o.raw("seed");
    if (!s.is_number_unsigned()) is.add(o.at("seed"), "expected a nonnegative integer");
    else rc.seed = s.get<std::uint64_t>();
  }
  if (o.has("thresholds")) rc.thresholds = parse_thresholds(o.raw("thresholds"), o.at("thresholds"), is);
  if (o.has("experiments")) {
    const json& ex = o.raw("experiments");
    if (!ex.is_array()) {
      is.add(o.at("experiments"), "expected an array");
    } else {
      std::set<std::string> ids;
      for (std::size_t i = 0; i < ex.size(); ++i) {
        const std::string p = o.at("experiments") + "[" + std::to_string(i) + "]";
        Experiment e = parse_experiment(ex[i], p, is, rc, base);
        if (!e.id.empty() && !ids.insert(e.id).second) is.add(p + ".id", "duplicate id '" + e.id + "'");
        rc.experiments.push_back(std::move(e));
      }
    }
  }
  o.finish();
  is.raise();
  return rc;
}

inline RunConfig load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(f, nullptr, true, true);  // comments allowed
  } catch (const json::parse_error& e) {
    throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse(doc, path.parent_path());
}

}  // namespace mslab::config
