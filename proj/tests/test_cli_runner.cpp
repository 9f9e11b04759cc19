#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mslab/runner.hpp"

using namespace mslab;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mslab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Runs the CLI with stdout captured to out_file; returns the exit status.
int cli(const std::string& args, const fs::path& out_file, const std::string& env = "") {
  const std::string cmd = env + " \"" MSLAB_BIN "\" " + args + " > \"" + out_file.string() + "\" 2>/dev/null";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

std::string error_of(const json& doc) {
  try {
    config::parse(doc);
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

const fs::path kSmoke = fs::path(MSLAB_CONFIG_DIR) / "smoke.cfg";

}  // namespace

TEST(Config, NamesOffendingField) {
  const json doc = {{"experiments", {{{"id", "c"}, {"kind", "classify"}, {"chart", "disk"}, {"tol_g", -1.0}}}}};
  const std::string msg = error_of(doc);
  EXPECT_NE(msg.find("$.experiments[0].tol_g"), std::string::npos) << msg;
  EXPECT_NE(msg.find("positive"), std::string::npos) << msg;
}

TEST(Config, UnknownKeysAndDuplicates) {
  EXPECT_NE(error_of({{"experimnts", json::array()}}).find("experimnts"), std::string::npos);
  const json dup = {{"experiments",
                     {{{"id", "a"}, {"kind", "classify"}, {"chart", "disk"}, {"points", {{0.0, 0.5}}}},
                      {{"id", "a"}, {"kind", "classify"}, {"chart", "disk"}, {"points", {{0.0, 0.5}}}}}}};
  EXPECT_NE(error_of(dup).find("duplicate"), std::string::npos);
  EXPECT_NE(error_of({{"experiments", {{{"id", "x"}, {"kind", "bogus"}}}}}).find("kind"), std::string::npos);
  // every problem is reported, not just the first
  const std::string two = error_of({{"seed", -3}, {"experiments", {{{"id", "c"}, {"kind", "classify"}, {"chart", "cube"}}}}});
  EXPECT_NE(two.find("seed"), std::string::npos);
  EXPECT_NE(two.find("chart"), std::string::npos);
}

TEST(Config, HashIgnoresKeyOrderButNotValues) {
  const json a = json::parse(R"({"name": "x", "seed": 1, "experiments": []})");
  const json b = json::parse(R"({"experiments": [], "seed": 1, "name": "x"})");
  const json c = json::parse(R"({"experiments": [], "seed": 2, "name": "x"})");
  EXPECT_EQ(config::parse(a).hash, config::parse(b).hash);
  EXPECT_NE(config::parse(a).hash, config::parse(c).hash);
}

TEST(Io, Fnv1aKnownValues) {
  EXPECT_EQ(io::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(io::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Io, GridRoundTripAndStamp) {
  const fs::path d = scratch("grid");
  Eigen::MatrixXcd f(3, 4);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) f(i, j) = cplx(i + 0.1 * j, -1.0 / (1 + i + j));
  io::Stamp st;
  st.config_hash = "abc";
  io::save_grid(d / "f.bin", st, f, {{"name", "f"}});
  EXPECT_EQ(fs::file_size(d / "f.bin"), 3u * 4u * 16u);
  EXPECT_EQ((io::load_grid(d / "f.bin", 3, 4) - f).cwiseAbs().maxCoeff(), 0.0);
  const json meta = json::parse(slurp(d / "f.bin.json"));
  EXPECT_EQ(meta["version"], kVersion);
  EXPECT_EQ(meta["config_hash"], "abc");
  EXPECT_EQ(meta["rows"], 3);
  EXPECT_FALSE(fs::exists(d / "f.bin.tmp"));
}

TEST(Runner, EmptyConfigSucceeds) {
  const fs::path d = scratch("empty");
  const auto rc = config::parse(json::parse(R"({"name": "empty", "experiments": []})"));
  runner::RunOptions opt;
  opt.out = d;
  opt.quiet = true;
  const auto sum = runner::run(rc, opt);
  EXPECT_EQ(sum.exit_code(), 0);
  EXPECT_TRUE(fs::exists(d / "empty" / "summary.json"));
}

TEST(Runner, SuiteFilterAndSeedOverride) {
  const auto rc = config::load(kSmoke);
  runner::RunOptions opt;
  opt.quiet = true;
  opt.suites = {"classify_disk"};
  opt.out = scratch("seed_a");
  const auto a = runner::run(rc, opt);
  ASSERT_EQ(a.results.size(), 1u);
  EXPECT_EQ(a.results[0].status, "pass");
  opt.out = scratch("seed_b");
  opt.seed = 99;
  runner::run(rc, opt);
  EXPECT_NE(slurp(a.dir / "classify_disk.csv"), slurp(opt.out / "smoke" / "classify_disk.csv"));
}

TEST(Cli, SmokeRunIsFastStampedAndDeterministic) {
  const fs::path d1 = scratch("smoke1"), d2 = scratch("smoke2");
  const auto t0 = std::chrono::steady_clock::now();
  ASSERT_EQ(cli("run \"" + kSmoke.string() + "\" --out \"" + d1.string() + "\"", d1 / "stdout"), 0);
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  EXPECT_LT(sec, 10.0);
  ASSERT_EQ(cli("run \"" + kSmoke.string() + "\" --jobs 2", d2 / "stdout", "MSLAB_OUT=\"" + d2.string() + "\""), 0);

  const auto a = tree(d1 / "smoke"), b = tree(d2 / "smoke");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  const json sum = json::parse(a.at("summary.json"));
  EXPECT_EQ(sum["version"], kVersion);
  for (const auto& [name, bytes] : a) {
    if (name.size() > 4 && name.substr(name.size() - 4) == ".csv") {
      EXPECT_EQ(bytes.rfind("# mslab " + std::string(kVersion) + " config=" + sum["config_hash"].get<std::string>(), 0), 0u)
          << name;
    } else if (name.size() > 5 && name.substr(name.size() - 5) == ".json") {
      const json j = json::parse(bytes);
      EXPECT_EQ(j["config_hash"], sum["config_hash"]) << name;
    }
  }
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("codes");
  std::ofstream(d / "bad.cfg") << R"({"experiments": [{"id": "c", "kind": "classify", "chart": "disk", "tol_g": -1}]})";
  EXPECT_EQ(cli("run \"" + (d / "bad.cfg").string() + "\" --out \"" + d.string() + "\"", d / "o1"), 2);
  std::ofstream(d / "empty.cfg") << R"({"name": "e", "experiments": []})";
  EXPECT_EQ(cli("verify --config \"" + (d / "empty.cfg").string() + "\" --out \"" + d.string() + "\"", d / "o2"), 0);
  std::ofstream(d / "wrong.cfg")
      << R"({"name": "w", "experiments": [{"id": "c", "kind": "classify", "chart": "disk", "points": [[0, 0.5]], "expect": ["E"]}]})";
  EXPECT_EQ(cli("run \"" + (d / "wrong.cfg").string() + "\" --out \"" + d.string() + "\"", d / "o3"), 1);
  EXPECT_EQ(cli("run \"" + (d / "missing.cfg").string() + "\"", d / "o4"), 2);
}

TEST(Cli, ClassifyAndParametrixPrintResults) {
  const fs::path d = scratch("print");
  ASSERT_EQ(cli("classify --chart disk --point 0 1", d / "c"), 0);
  const json c = json::parse(slurp(d / "c"));
  EXPECT_EQ(c.is_array() ? c[0]["label"] : c["label"], "G2-");
  ASSERT_EQ(cli("parametrix --m 16 32", d / "p"), 0);
  const std::string csv = slurp(d / "p");
  EXPECT_EQ(csv.rfind("# mslab", 0), 0u);
  EXPECT_NE(csv.find("\n16,"), std::string::npos);
}
