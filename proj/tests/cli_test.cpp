// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ibpm/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ibpm");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ibpm::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::string kLoopNest = std::string(IBPM_TEST_DATA_DIR) + "/loop_nest.json";

std::vector<std::set<int>> interval_sets(const nlohmann::json& intervals) {
  std::vector<std::set<int>> out;
  for (const auto& iv : intervals) out.emplace_back(iv["members"].begin(), iv["members"].end());
  return out;
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("ibpm_cli_" + std::to_string(::getpid()) + "_" +
                                       ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  fs::path dir;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Cli, HelpExitsZero) {
  const Result r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("intervals"), std::string::npos);
  EXPECT_EQ(run({"train", "--help"}).code, 0);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"intervals", "--graph", kLoopNest, "--no-such-flag"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"simulate", "--mode", "sideways", "--graph", kLoopNest}).code, 2);
}

TEST(Cli, DomainErrorsExitOneWithPrefix) {
  const Result r = run({"intervals", "--graph", "/nonexistent/graph.json"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.err.rfind("error: invalid-argument: ", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Cli, IntervalsOnLoopNest) {
  const Result r = run({"intervals", "--graph", kLoopNest});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  using S = std::vector<std::set<int>>;
  EXPECT_EQ(interval_sets(doc["partition"]["intervals"]), (S{{1}, {2}, {3, 4, 5, 6}, {7}}));
  const auto& levels = doc["sequence"]["levels"];
  ASSERT_EQ(levels.size(), 4u);
  EXPECT_EQ(interval_sets(levels[1]["intervals"]), (S{{1}, {2, 7, 8}}));
  EXPECT_EQ(interval_sets(levels[2]["intervals"]), (S{{1, 9}}));
  EXPECT_EQ(interval_sets(levels[3]["intervals"]), (S{{10}}));
  EXPECT_EQ(doc["sequence"]["terminal"], "SingleNode");
}

TEST_F(CliFiles, IntervalsWritesDotPerLevel) {
  ASSERT_EQ(run({"intervals", "--graph", kLoopNest, "--dot", path("dot"), "--out", path("seq.json")}).code, 0);
  for (int i = 1; i <= 4; ++i) EXPECT_TRUE(fs::exists(dir / "dot" / ("level" + std::to_string(i) + ".dot")));
  EXPECT_TRUE(fs::exists(dir / "seq.json"));
}

TEST(Cli, SimulateLedger) {
  const Result r = run({"simulate", "--graph", kLoopNest, "--mode", "standard"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["rounds"], 4);
  EXPECT_EQ(doc["total"], 36);
  EXPECT_EQ(doc["holds"], true);
  const auto ibpm = nlohmann::json::parse(run({"simulate", "--graph", kLoopNest}).out);
  EXPECT_LE(ibpm["total"].get<int>(), ibpm["bound"].get<int>());
}

TEST(Cli, SimulateTrialsAreSeeded) {
  const Result a = run({"simulate", "--trials", "20", "--seed", "7"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 21);
  EXPECT_EQ(a.out, run({"simulate", "--trials", "20", "--seed", "7"}).out);
  EXPECT_NE(a.out, run({"simulate", "--trials", "20", "--seed", "8"}).out);
}

TEST(Cli, SeedFromEnvironment) {
  ::setenv(ibpm::kSeedEnv, "7", 1);
  const std::string from_env = run({"simulate", "--trials", "5"}).out;
  ::setenv(ibpm::kSeedEnv, "oops", 1);
  EXPECT_EQ(run({"simulate", "--trials", "5"}).code, 1);
  ::unsetenv(ibpm::kSeedEnv);
  EXPECT_EQ(from_env, run({"simulate", "--trials", "5", "--seed", "7"}).out);
  EXPECT_EQ(ibpm::default_seed(), ibpm::kDefaultSeed);
}

TEST_F(CliFiles, ParseAndCfg) {
  std::ofstream(path("a.mini")) << "int f(int[] a, int i) {\n  if (i < len(a)) {\n    return a[i];\n  }\n  return 0;\n}\n";
  const Result p = run({"parse", path("a.mini")});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_NE(p.out.find("len(a)"), std::string::npos);
  const Result g = run({"cfg", path("a.mini"), "--method", "f", "--depth", "0"});
  ASSERT_EQ(g.code, 0) << g.err;
  EXPECT_EQ(nlohmann::json::parse(g.out)["method"], "f");
  EXPECT_EQ(run({"cfg", path("a.mini"), "--dot"}).out.rfind("digraph", 0), 0u);
  std::ofstream(path("bad.mini")) << "int f( {\n";
  const Result bad = run({"parse", path("bad.mini")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.err.rfind("error: parse: ", 0), 0u) << bad.err;
}

TEST_F(CliFiles, CorpusTrainEvalPredict) {
  const std::string corpus = path("c.jsonl"), model = path("m.json");
  ASSERT_EQ(run({"gen-corpus", "--n", "40", "--seed", "3", "--out", corpus}).code, 0);
  EXPECT_EQ(run({"gen-corpus", "--n", "40", "--seed", "3"}).out, slurp(corpus));
  const Result t = run({"-q", "train", "--corpus", corpus, "--model", model, "--epochs", "1", "--hidden", "8",
                        "--seed", "3"});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_TRUE(t.err.empty());
  EXPECT_EQ(nlohmann::json::parse(t.out)["epochs"].size(), 1u);
  const std::string checkpoint = slurp(model);
  ASSERT_EQ(run({"-q", "train", "--corpus", corpus, "--model", model, "--epochs", "1", "--hidden", "8", "--seed",
                 "3"})
                .code,
            0);
  EXPECT_EQ(slurp(model), checkpoint);

  const Result e = run({"eval", "--model", model, "--corpus", corpus, "--k", "1,3"});
  ASSERT_EQ(e.code, 0) << e.err;
  EXPECT_EQ(nlohmann::json::parse(e.out)["kinds"][0]["statement"].size(), 2u);
  const Result csv = run({"eval", "--model", model, "--corpus", corpus, "--format", "csv"});
  EXPECT_EQ(csv.out.rfind("kind,level,k", 0), 0u);
  EXPECT_EQ(run({"eval", "--model", model, "--corpus", corpus, "--k", "0"}).code, 1);

  std::ofstream(path("f.mini")) << "int f(int[] a, int i) {\n  int s = a[i];\n  return s;\n}\n";
  const Result p = run({"predict", "--model", model, "--source", path("f.mini"), "--k", "5", "--threshold", "0"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(nlohmann::json::parse(p.out)["ranked"].size(), 2u);
}
