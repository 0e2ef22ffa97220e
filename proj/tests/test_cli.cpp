#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fluxnet/cli.hpp"

using namespace fluxnet;
using nlohmann::json;

namespace {

const std::string kData = FLUXNET_DATA_DIR;

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "fluxnet_cli_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p.string();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, AnalyzeJsonKeys) {
  const CliRun r = run({"analyze", kData + "/chain.rxn", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char* key : {"file", "species", "structure", "eigenvalues", "stationary"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  for (const char* key : {"complexes", "linkage_classes", "dim_stoich", "deficiency",
                          "weakly_reversible", "has_zero_complex"}) {
    EXPECT_TRUE(j["structure"].contains(key)) << key;
  }
  EXPECT_EQ(j["structure"]["deficiency"], 0);
  EXPECT_NEAR(j["stationary"]["variance"]["X2"].get<double>(), 1.0 / 12.0, 1e-12);
  EXPECT_NEAR(j["stationary"]["flux_variance"]["X2->0"].get<double>(), 1.0 / 3.0, 1e-12);
}

TEST(Cli, AnalyzeTextAndParams) {
  const CliRun r = run({"analyze", kData + "/chain-side.rxn", "--param", "L=1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("deficiency"), std::string::npos);
  EXPECT_NE(r.err.find("L=1000"), std::string::npos);
}

TEST(Cli, AnalyzeRejectsNonWeaklyReversible) {
  const std::string f = write_file("oneway.rxn", "species X1 X2\nreaction X1 -> X2 k=1\n");
  EXPECT_EQ(run({"analyze", f}).code, 3);
  EXPECT_EQ(run({"analyze", f, "--structure-only"}).code, 0);
}

TEST(Cli, ParseErrorsExitTwoWithPosition) {
  const std::string f =
      write_file("bad.rxn", "species X1 X2\ninput X1 rate=1\nreaction X1 -> X2 1.0\n");
  const CliRun r = run({"analyze", f});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3, col 19"), std::string::npos) << r.err;
  EXPECT_EQ(run({"analyze", "/nonexistent/file.rxn"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
}

TEST(Cli, SimulateWritesCsvAndMoments) {
  const auto prefix = scratch("sim").string();
  const CliRun r = run({"simulate", kData + "/chain-ou.rxn", "--t-end", "60", "--ensemble", "2",
                     "--seed", "5", "--stride", "50", "--out", prefix, "--ratio", "X1,X3->0,xi_X1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = read_file(prefix + ".csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,x_X1,x_X2,x_X3,xi_X1");
  const json m = json::parse(read_file(prefix + ".moments.json"));
  for (const char* key : {"mean", "variance", "stderr", "flux_variance", "n_samples",
                          "n_batches", "seed", "config", "ratio"}) {
    EXPECT_TRUE(m.contains(key)) << key;
  }
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["ratio"]["observables"].size(), 3u);
  EXPECT_NE(r.err.find("dt="), std::string::npos);
}

TEST(Cli, SimulateIsReproducible) {
  const std::vector<std::string> args{"simulate", kData + "/chain.rxn", "--t-end", "50",
                                      "--ensemble", "3", "--seed", "11", "--format", "json"};
  const CliRun a = run(args);
  const CliRun b = run(args);
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "2"});
  // Only the echoed thread count may differ.
  json ja = json::parse(a.out);
  json jt = json::parse(run(threaded).out);
  EXPECT_EQ(jt["config"]["threads"], 2);
  ja["config"].erase("threads");
  jt["config"].erase("threads");
  EXPECT_EQ(jt, ja);
}

TEST(Cli, SigmaZeroRemovesNoise) {
  const CliRun r = run({"simulate", kData + "/chain.rxn", "--t-end", "30", "--sigma", "0",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& [name, v] : json::parse(r.out)["variance"].items()) EXPECT_LT(v.get<double>(), 1e-20) << name;
}

TEST(Cli, SimulateBlowUpExitsFour) {
  const CliRun r = run({"simulate", kData + "/chain.rxn", "--dt", "5", "--t-end", "100000",
                     "--burn-in", "0"});
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, RatioNeedsOuInput) {
  const CliRun r = run({"simulate", kData + "/chain.rxn", "--t-end", "20", "--ratio", "X1"});
  EXPECT_EQ(r.code, 2) << r.err;
}

TEST(Cli, VerifyPassesAndWritesJson) {
  const auto path = scratch("verify.json");
  const CliRun r = run({"verify", "chain-monotonic", "--trials", "20", "--out", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
  const json j = json::parse(read_file(path));
  EXPECT_EQ(j["experiment"], "chain-monotonic");
  EXPECT_EQ(j["instances"].size(), 20u);
  EXPECT_TRUE(j["summary"]["pass"].get<bool>());
}

TEST(Cli, VerifySweepOnFile) {
  const CliRun r = run({"verify", "large-L", kData + "/chain-side.rxn", "--param", "L",
                     "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json::parse(r.out)["summary"]["pass"].get<bool>());
}

TEST(Cli, VerifyViolationExitsFive) {
  // Away from the small-k limit the ratio is nowhere near one.
  const CliRun r = run({"verify", "small-k", "--values", "1,2,4,8"});
  EXPECT_EQ(r.code, 5) << r.out << r.err;
  EXPECT_NE(r.err.find("violation"), std::string::npos);
}

TEST(Cli, UnknownExperimentListsNames) {
  const CliRun r = run({"verify", "nope"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("chain-monotonic"), std::string::npos);
}
