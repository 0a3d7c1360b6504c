#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "scolab/version.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = scolab::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

json small_sweep() {
  return {{"family", {{"family", "coin"}, {"eps0", 0.1}}},
          {"d_grid", {1}},
          {"eps_grid", {0.3}},
          {"n_grid", {20, 60}},
          {"trials", 50},
          {"seed", 3},
          {"uniform_convergence", true}};
}

}  // namespace

TEST(Cli, RadInverse) {
  const Result r = run({"rad", "--family", "l2", "--inverse", "0.1"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "101\n");
  EXPECT_EQ(run({"rad", "--family", "linf", "--dim", "4", "--inverse", "0.5"}).out, "17\n");
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  const Result r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, Version) {
  const Result r = run({"--version"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, std::string(scolab::kVersion) + "\n");
}

TEST(Cli, UnknownConfigKeyExitsTwo) {
  const fs::path dir = scolab::test::scratch_dir("cli_badkey");
  json cfg = small_sweep();
  cfg["trails"] = 10;
  const Result r = run({"sweep", "--config", write_config(dir, "c.json", cfg).string(), "--out", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("trails"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "results.json"));
}

TEST(Cli, MalformedConfigExitsTwo) {
  const fs::path dir = scolab::test::scratch_dir("cli_malformed");
  std::ofstream(dir / "c.json") << "{\"family\": ";
  EXPECT_EQ(run({"sweep", "--config", (dir / "c.json").string()}).code, 2);
  EXPECT_EQ(run({"sweep", "--config", (dir / "absent.json").string()}).code, 2);
  EXPECT_EQ(run({"instance", "--instance", "{\"family\": \"coin\", \"eps0\": 0.1, \"x\": 1}"}).code, 2);
}

TEST(Cli, SweepIsByteIdentical) {
  const fs::path root = scolab::test::scratch_dir("cli_sweep");
  const fs::path cfg = write_config(root, "sweep.json", small_sweep());
  for (const char* sub : {"a", "b"}) {
    const Result r = run({"sweep", "--config", cfg.string(), "--out", (root / sub).string(),
                          "--jobs", sub[0] == 'a' ? "1" : "2"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"results.json", "results.csv", "plots.svg", "manifest.json"})
    EXPECT_EQ(slurp(root / "a" / f), slurp(root / "b" / f)) << f;

  const json manifest = json::parse(slurp(root / "a" / "manifest.json"));
  EXPECT_EQ(manifest.at("tool"), "scolab");
  EXPECT_EQ(manifest.at("version"), scolab::kVersion);
  EXPECT_EQ(manifest.at("command"), "sweep");
  EXPECT_EQ(manifest.at("seeds").at("master"), 3);
  EXPECT_EQ(manifest.at("config").at("trials"), 50);
}

TEST(Cli, SeedOverrideChangesResults) {
  const fs::path root = scolab::test::scratch_dir("cli_seed");
  const fs::path cfg = write_config(root, "sweep.json", small_sweep());
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", (root / "a").string()}).code, 0);
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", (root / "b").string(), "--seed", "4"}).code, 0);
  EXPECT_NE(slurp(root / "a" / "results.json"), slurp(root / "b" / "results.json"));
  EXPECT_EQ(json::parse(slurp(root / "b" / "manifest.json")).at("seeds").at("master"), 4);
}

TEST(Cli, OutputFromEnvironment) {
  const fs::path root = scolab::test::scratch_dir("cli_env");
  const fs::path cfg = write_config(root, "sweep.json", small_sweep());
  ::setenv("SCOLAB_OUT", (root / "env").string().c_str(), 1);
  const Result r = run({"sweep", "--config", cfg.string()});
  ::unsetenv("SCOLAB_OUT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(root / "env" / "results.json"));
}

TEST(Cli, ReportRegenerates) {
  const fs::path root = scolab::test::scratch_dir("cli_report");
  const fs::path cfg = write_config(root, "sweep.json", small_sweep());
  ASSERT_EQ(run({"sweep", "--config", cfg.string(), "--out", root.string()}).code, 0);
  const std::string csv = slurp(root / "results.csv");
  fs::remove(root / "results.csv");
  const Result r = run({"report", (root / "results.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(root / "results.csv"), csv);
  EXPECT_EQ(run({"report", (root / "nothing.json").string()}).code, 1);
}

TEST(Cli, VerifyShippedConfig) {
  const fs::path root = scolab::test::scratch_dir("cli_verify");
  const Result r =
      run({"verify", "--config", std::string(SCOLAB_SOURCE_DIR) + "/configs/verify.json", "--out", root.string()});
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("all checks passed"), std::string::npos);
  EXPECT_TRUE(fs::exists(root / "verify.json"));
  EXPECT_TRUE(fs::exists(root / "manifest.json"));
  const std::string csv = slurp(root / "verify.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "mode,n,trials,seed,empirical,analytic_bound,mc_stderr,pass");
}

TEST(Cli, VerifyFailureExitsOne) {
  const fs::path root = scolab::test::scratch_dir("cli_verify_fail");
  // The coin's certificate picks g_z = z, not 0.
  const json cfg = {{"seed", 1},
                    {"checks",
                     {{{"name", "wrong-cert"},
                       {"type", "certificate"},
                       {"instance", {{"family", "coin"}, {"eps0", 0.1}}},
                       {"x", {0.0}},
                       {"expect_g", {{0.0}, {0.0}}}}}}};
  const Result r = run({"verify", "--config", write_config(root, "v.json", cfg).string()});
  EXPECT_EQ(r.code, 1) << r.out << r.err;
  EXPECT_NE(r.out.find("FAIL wrong-cert"), std::string::npos);
}

TEST(Cli, InstanceAndDivergence) {
  const Result inst = run({"instance", "--instance", "{\"family\": \"coin\", \"eps0\": 0.1}"});
  EXPECT_EQ(inst.code, 0) << inst.err;
  const json summary = json::parse(inst.out);
  EXPECT_EQ(summary.at("lipschitz"), 1.2);
  const Result div = run({"divergence", "--instance", "{\"family\": \"coin\", \"eps0\": 0.1}", "--x", "[0.5]",
                          "--n", "10"});
  EXPECT_EQ(div.code, 0) << div.err;
  EXPECT_NEAR(json::parse(div.out).at("D").get<double>(), 0.1, 1e-12);
  const Result erm = run({"erm", "--instance", "{\"family\": \"coin\", \"eps0\": 0.1}", "--n", "25"});
  EXPECT_EQ(erm.code, 0) << erm.err;
  EXPECT_EQ(run({"net", "--family", "l2", "--dim", "30", "--eps", "0.01"}).code, 2);
}
