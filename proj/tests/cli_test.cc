#include "ocd/cli.h"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace ocd {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("ocd_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result Run(std::vector<std::string> args) {
    args.insert(args.begin(), "ocd");
    std::ostringstream out, err;
    const int code = RunCli(args, out, err);
    return {code, out.str(), err.str()};
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }
  std::string Write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return Path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, BoundsPrintsRequiredN) {
  const Result r = Run({"bounds", "--alpha", "0.5", "--epsilon", "0.05", "--delta", "0.05"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("n = 7865"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("required_n,0.5,0.05,0.05,0.05,,,7865"), std::string::npos);

  const Result m = Run({"bounds", "--lambda", "1.5", "--alpha", "1", "--n", "8.73857105527563"});
  EXPECT_EQ(m.code, kExitOk);
  EXPECT_NE(m.out.find("massart_raw,,,,,,1.5,0.0222179930764846"), std::string::npos) << m.out;
  EXPECT_NE(m.out.find("achieved epsilon: 0.5"), std::string::npos) << m.out;
}

TEST_F(CliTest, ExitCodes) {
  EXPECT_EQ(Run({"bounds", "--alpha", "0.5", "--epsilon", "0.96"}).code, kExitDomain);
  EXPECT_EQ(Run({"bounds", "--alpha", "0.5", "--epsilon", "0.1", "--bogus", "1"}).code,
            kExitUsage);
  EXPECT_EQ(Run({"bounds", "--alpha", "abc", "--epsilon", "0.1"}).code, kExitUsage);
  EXPECT_EQ(Run({"bounds"}).code, kExitUsage);
  EXPECT_EQ(Run({"nosuch"}).code, kExitUsage);
  EXPECT_EQ(Run({}).code, kExitUsage);
  const Result help = Run({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("threshold"), std::string::npos);
  EXPECT_EQ(Run({"threshold", "--clean", Path("missing"), "--mixture", Path("missing"),
                 "--alpha", "0.5"})
                .code,
            kExitIo);
}

TEST_F(CliTest, ThresholdFixtureAndScore) {
  const auto a = Write("a.scores", "1\n2\n3\n4\n");
  const auto b = Write("b.scores", "score\n2\n3\n5\n6\n");
  const Result r = Run({"threshold", "--clean", a, "--mixture", b, "--alpha", "0.5", "--q",
                        "0.25", "--out", Path("t.json"), "--diagnostics", Path("fa.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("τ̂ = 4\n"), std::string::npos) << r.out;
  const auto doc = nlohmann::json::parse(Slurp(Path("t.json")));
  EXPECT_EQ(doc["tau"], 4.0);
  EXPECT_EQ(doc["flag_all"], false);
  EXPECT_EQ(doc["alpha"], 0.5);
  EXPECT_EQ(doc["q"], 0.25);
  EXPECT_EQ(doc["variant"], "basic");
  EXPECT_EQ(doc["inputs"].get<std::string>().rfind("fnv1a64:", 0), 0u);
  EXPECT_EQ(Slurp(Path("fa.csv")),
            "score,raw,legal\n1,-0.25,0\n2,0,0\n3,0.25,0.125\n4,0,0.125\n5,0.5,0.5\n6,1,1\n");

  const auto q = Write("q.scores", "3.9\n4\n4.1\n");
  const Result s = Run({"score", "--threshold-file", Path("t.json"), "--input", q});
  EXPECT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(s.out, "score,alarm\n3.9,0\n4,0\n4.1,1\n");

  const auto empty = Write("empty.csv", "");
  const Result e = Run({"score", "--threshold-file", Path("t.json"), "--input", empty, "--out",
                        Path("o.csv")});
  EXPECT_EQ(e.code, kExitIo);
  EXPECT_FALSE(fs::exists(Path("o.csv")));
  EXPECT_FALSE(fs::exists(Path("o.csv.tmp")));

  Write("bad.json", "{\"format\": \"other\"}");
  EXPECT_EQ(Run({"score", "--threshold-file", Path("bad.json"), "--input", q}).code, kExitIo);
}

TEST_F(CliTest, ThresholdFlagAllAndIso) {
  const auto a = Write("a.scores", "1\n");
  const auto b = Write("b.scores", "1\n2\n3\n4\n");
  const Result r = Run({"threshold", "--clean", a, "--mixture", b, "--alpha", "1", "--q", "0.1",
                        "--variant", "iso", "--out", Path("t.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("τ̂ = FLAG_ALL"), std::string::npos);
  const auto doc = nlohmann::json::parse(Slurp(Path("t.json")));
  EXPECT_TRUE(doc["tau"].is_null());
  EXPECT_EQ(doc["flag_all"], true);
  const Result s = Run({"score", "--threshold-file", Path("t.json"), "--input", a});
  EXPECT_EQ(s.out, "score,alarm\n1,1\n");
  EXPECT_EQ(Run({"threshold", "--clean", a, "--mixture", b, "--alpha", "0"}).code, kExitDomain);
}

TEST_F(CliTest, SynthTrainScore) {
  EXPECT_EQ(Run({"synth", "--kind", "nominal", "--n", "5", "--out", Path("x.csv")}).code,
            kExitUsage);  // no seed
  ASSERT_EQ(Run({"synth", "--kind", "mixture", "--n", "200", "--alpha", "0.1", "--seed", "3",
                 "--out", Path("m.csv")})
                .code,
            kExitOk);
  const std::string csv = Slurp(Path("m.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "f0,f1,f2,f3,f4,f5,f6,f7,f8,label");
  ASSERT_EQ(Run({"synth", "--kind", "mixture", "--n", "200", "--alpha", "0.1", "--seed", "3",
                 "--out", Path("m2.csv")})
                .code,
            kExitOk);
  EXPECT_EQ(Slurp(Path("m2.csv")), csv);

  for (const std::string det : {"iforest", "loda"}) {
    const Result t = Run({"train", "--detector", det, "--input", Path("m.csv"), "--seed", "1",
                          "--trees", "20", "--projections", "20", "--out", Path("model.json"),
                          "--oob-scores", Path("oob.csv")});
    ASSERT_EQ(t.code, kExitOk) << t.err;
    const Result s = Run({"score", "--model", Path("model.json"), "--input", Path("m.csv")});
    ASSERT_EQ(s.code, kExitOk) << s.err;
    EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 201);
    EXPECT_EQ(Slurp(Path("oob.csv")).substr(0, 6), "score\n");
  }
}

TEST_F(CliTest, ExperimentIsReproducible) {
  const auto cfg = Write("exp.cfg",
                         "n = 150\nalpha = 0.2\nrepetitions = 3\neval_size = 300\n"
                         "num_trees = 20\nvariant = both\noracle = true\n");
  EXPECT_EQ(Run({"experiment", "--config", cfg, "--out", Path("r0")}).code, kExitUsage);
  ASSERT_EQ(Run({"experiment", "--config", cfg, "--seed", "17", "--out", Path("r1")}).code,
            kExitOk);
  ASSERT_EQ(Run({"experiment", "--config", cfg, "--seed", "17", "--out", Path("r2"),
                 "--threads", "2"})
                .code,
            kExitOk);
  for (const char* f : {"trials.csv", "summary.csv", "fig1_recall.csv", "fig2_fpr.csv",
                        "fig3_nstar.csv", "config.resolved"}) {
    EXPECT_EQ(Slurp(dir_ / "r1" / f), Slurp(dir_ / "r2" / f)) << f;
    EXPECT_FALSE(Slurp(dir_ / "r1" / f).empty()) << f;
  }
  EXPECT_TRUE(fs::exists(dir_ / "r1" / "run_meta.json"));
  // The resolved echo is itself a valid config for the same run.
  ASSERT_EQ(Run({"experiment", "--config", Path("r1/config.resolved"), "--seed", "17", "--out",
                 Path("r3")})
                .code,
            kExitOk);
  EXPECT_EQ(Slurp(dir_ / "r1" / "trials.csv"), Slurp(dir_ / "r3" / "trials.csv"));

  const auto bad = Write("bad.cfg", "n = 150\nrepetitons = 3\n");
  EXPECT_EQ(Run({"experiment", "--config", bad, "--seed", "1", "--out", Path("r4")}).code,
            kExitUsage);
  EXPECT_EQ(Run({"experiment", "--config", Path("nope.cfg"), "--seed", "1", "--out",
                 Path("r5")})
                .code,
            kExitIo);
}

TEST_F(CliTest, CvAndSweep) {
  std::string clean = "score\n", mix = "score,label\n";
  for (int i = 0; i < 100; ++i) clean += std::to_string(i % 10) + "\n";
  for (int i = 0; i < 100; ++i) {
    mix += i < 30 ? std::to_string(20 + i) + ",1\n" : std::to_string(i % 10) + ",0\n";
  }
  Write("clean.csv", clean);
  Write("mix.csv", mix);
  const auto cfg = Write("cv.cfg", "clean_scores = " + Path("clean.csv") +
                                       "\nmixture_scores = " + Path("mix.csv") +
                                       "\nalpha = 0.3\nfolds = 5\n");
  const Result r = Run({"cv", "--config", cfg, "--seed", "2", "--out", Path("cv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"folds.csv", "summary.csv", "fig4_5_alpha.csv", "config.resolved"}) {
    EXPECT_TRUE(fs::exists(dir_ / "cv" / f)) << f;
  }

  const auto scfg = Write("sw.cfg", "n = 150\nalpha = 0.2\nrepetitions = 2\neval_size = 200\n"
                                    "num_trees = 10\nxi = 0.01, 0.02\n");
  const Result s = Run({"sweep", "--config", scfg, "--seed", "2", "--out", Path("sw")});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  const std::string sweep = Slurp(dir_ / "sw" / "fig7_sweep.csv");
  EXPECT_EQ(std::count(sweep.begin(), sweep.end(), '\n'), 4);
  EXPECT_NE(sweep.find("150,0.2,0,0.2,2,0,0,0"), std::string::npos) << sweep;
}

}  // namespace
}  // namespace ocd
