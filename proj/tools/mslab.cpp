// mslab command line: single-shot subcommands plus config-driven runs.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "mslab/config.hpp"
#include "mslab/runner.hpp"

using namespace mslab;
using json = nlohmann::json;

namespace {

std::string default_out() {
  const char* env = std::getenv("MSLAB_OUT");
  return env && *env ? env : "out";
}

json chart_json(const std::string& s) {
  if (s == "disk" || s == "annulus") return s;
  if (!s.empty() && s.front() == '{') return json::parse(s);
  return json{{"kind", "model"}, {"file", s}};
}

int run_doc(const json& doc, const runner::RunOptions& opt, const std::filesystem::path& base = {}) {
  const config::RunConfig rc = config::parse(doc, base);
  const runner::RunSummary sum = runner::run(rc, opt);
  for (const auto& r : sum.results) {
    std::cout << r.id << ' ' << r.status;
    if (!r.message.empty()) std::cout << " (" << r.message << ')';
    std::cout << '\n';
    for (const auto& f : r.files) std::cout << "  " << (sum.dir / f).string() << '\n';
  }
  return sum.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mslab: boundary phase-space experiments on disk and annulus charts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  runner::RunOptions ropt;
  std::string out = default_out();
  std::uint64_t seed = 0;
  app.add_option("--jobs,-j", ropt.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out,-o", out, "output root (default $MSLAB_OUT or ./out)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomized sampling (overrides the config)");

  // classify
  auto* c_classify = app.add_subcommand("classify", "classify a boundary phase point");
  std::string chart = "disk";
  std::vector<double> point;
  double tol_g = 1e-8, tol_bracket = 1e-6;
  int k_max = 0;
  c_classify->add_option("--chart", chart, "disk | annulus | model file | JSON chart object");
  c_classify->add_option("--point", point, "x' xi'")->expected(2)->required();
  c_classify->add_option("--tol-g", tol_g)->check(CLI::PositiveNumber);
  c_classify->add_option("--tol-bracket", tol_bracket)->check(CLI::PositiveNumber);
  c_classify->add_option("--k-max", k_max)->check(CLI::NonNegativeNumber);

  // trace
  auto* c_trace = app.add_subcommand("trace", "trace a generalized ray");
  std::vector<double> start, start_cart;
  double s_max = 1.0, sample_ds = 0.02;
  std::string id = "trace";
  c_trace->add_option("--chart", chart);
  auto* o_start = c_trace->add_option("--start", start, "y x' eta xi'")->expected(4);
  auto* o_cart = c_trace->add_option("--cartesian", start_cart, "x1 x2 xi1 xi2")->expected(4);
  o_start->excludes(o_cart);
  c_trace->add_option("--s-max", s_max)->check(CLI::PositiveNumber);
  c_trace->add_option("--sample-ds", sample_ds)->check(CLI::PositiveNumber);
  c_trace->add_option("--id", id, "output file stem");

  // mode
  auto* c_mode = app.add_subcommand("mode", "build a disk mode and write its fields");
  std::string family = "laplace";
  int m = 0, k = 1, n_r = 0, n_theta = 0;
  c_mode->add_option("--family", family)->check(CLI::IsMember({"laplace", "stokes"}));
  c_mode->add_option("--m", m)->check(CLI::NonNegativeNumber);
  c_mode->add_option("--k", k)->check(CLI::PositiveNumber);
  c_mode->add_option("--n-r", n_r);
  c_mode->add_option("--n-theta", n_theta);
  c_mode->add_option("--id", id);

  // parametrix
  auto* c_par = app.add_subcommand("parametrix", "pressure parametrix error against the Poisson extension");
  c_par->set_help_flag("--help", "print this help message and exit");
  std::vector<int> pm{32, 64, 128};
  std::vector<int> orders{0, 1};
  double ph = 0.0, delta0 = 0.25;
  c_par->add_option("--m", pm, "angular frequencies")->check(CLI::PositiveNumber);
  c_par->add_option("--h", ph, "semiclassical parameter (default 1/m)")->check(CLI::PositiveNumber);
  c_par->add_option("--order", orders, "0 and/or 1")->check(CLI::IsMember({0, 1}));
  c_par->add_option("--delta0", delta0)->check(CLI::PositiveNumber);

  // measure
  auto* c_meas = app.add_subcommand("measure", "pairing series of a symbol along a mode family");
  std::vector<int> ks;
  std::string symbol, space = "interior";
  c_meas->add_option("--family", family)->check(CLI::IsMember({"laplace", "stokes"}));
  c_meas->add_option("--m", m)->check(CLI::NonNegativeNumber);
  c_meas->add_option("--k", ks)->required();
  c_meas->add_option("--symbol", symbol, "symbol as JSON, e.g. '{\"op\":\"constant\"}'")->required();
  c_meas->add_option("--space", space)->check(CLI::IsMember({"interior", "tangential"}));
  c_meas->add_option("--chart", chart);
  c_meas->add_option("--id", id);

  // verify / run
  auto* c_verify = app.add_subcommand("verify", "run named suites from a config");
  std::string cfg_path;
  std::vector<std::string> suites;
  c_verify->add_option("--config,config", cfg_path)->required();
  c_verify->add_option("--suite", suites, "suite tags or experiment ids (default: all)");
  auto* c_run = app.add_subcommand("run", "run every experiment in a config");
  c_run->add_option("config", cfg_path)->required();

  // global options may follow the subcommand
  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  ropt.out = out;
  if (seed_opt->count()) ropt.seed = seed;

  try {
    if (*c_classify) {
      config::Issues is;
      auto ch = config::parse_chart(chart_json(chart), "chart", is);
      is.raise();
      ClassifyOptions co{tol_g, tol_bracket, k_max};
      std::cout << runner::classify_json(*ch, point[0], point[1], co).dump(2) << '\n';
      return 0;
    }
    if (*c_trace) {
      if (start.empty() && start_cart.empty()) throw ValidationError("trace needs --start or --cartesian");
      json e{{"id", id}, {"kind", "trace"}, {"chart", chart_json(chart)}, {"s_max", s_max}, {"sample_ds", sample_ds}};
      if (!start.empty()) e["start"] = start;
      else e["start_cartesian"] = start_cart;
      return run_doc({{"name", "trace"}, {"experiments", {e}}}, ropt);
    }
    if (*c_mode) {
      json e{{"id", id == "trace" ? family + "_m" + std::to_string(m) + "_k" + std::to_string(k) : id},
             {"kind", "mode"}, {"family", family}, {"m", m}, {"k", k}};
      if (n_r) e["n_r"] = n_r;
      if (n_theta) e["n_theta"] = n_theta;
      return run_doc({{"name", "mode"}, {"experiments", {e}}}, ropt);
    }
    if (*c_par) {
      const CollarChart disk = CollarChart::disk();
      io::Csv csv(io::Stamp{io::config_hash({{"m", pm}, {"h", ph}, {"order", orders}, {"delta0", delta0}})},
                  {"m", "h", "order", "abs_error", "ref_norm", "rel_error"});
      for (int ord : orders) {
        const ParametrixSymbol p = build_parametrix(disk, delta0, ord);
        for (int mm : pm) {
          const ParametrixError r = parametrix_error(p, mm, ph > 0.0 ? ph : 1.0 / mm);
          csv.row({std::to_string(r.m), io::num(r.h), std::to_string(r.order), io::num(r.abs_error),
                   io::num(r.ref_norm), io::num(r.rel_error)});
        }
      }
      std::cout << csv.str();
      return 0;
    }
    if (*c_meas) {
      json e{{"id", id == "trace" ? "measure" : id},
             {"kind", "measure"},
             {"chart", chart_json(chart)},
             {"family", {{"family", family}, {"m", m}, {"k", ks}}},
             {"symbol", json::parse(symbol)},
             {"space", space}};
      return run_doc({{"name", "measure"}, {"experiments", {e}}}, ropt);
    }
    if (*c_verify || *c_run) {
      const config::RunConfig rc = config::load(cfg_path);
      if (*c_verify) ropt.suites = suites;
      const runner::RunSummary sum = runner::run(rc, ropt);
      int n_fail = 0;
      for (const auto& r : sum.results) {
        std::cout << r.id << ' ' << r.status;
        if (!r.message.empty()) std::cout << " (" << r.message << ')';
        std::cout << '\n';
        if (r.status == "fail" || r.status == "error") ++n_fail;
      }
      std::cout << sum.results.size() << " experiments, " << n_fail << " failed; summary in "
                << (sum.dir / "summary.json").string() << '\n';
      return sum.exit_code();
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
