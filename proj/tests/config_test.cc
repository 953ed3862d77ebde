#include "ocd/config.h"

#include <functional>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ocd/random.h"
#include "ocd/status.h"

namespace ocd {
namespace {

KeyValueConfig Kv(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::Parse(in, "test.cfg");
}

ErrorKind KindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error";
  return ErrorKind::kIo;
}

TEST(KeyValueConfigTest, ParsesTypesAndComments) {
  KeyValueConfig kv = Kv(
      "# comment\n"
      "  name = iforest   # trailing\n"
      "x = 0.25\n"
      "k = 12\n"
      "flag = true\n"
      "list = 1, 2.5 ,3\n"
      "ints = 100,1000\n");
  EXPECT_EQ(kv.TakeString("name"), "iforest");
  EXPECT_EQ(kv.TakeDouble("x"), 0.25);
  EXPECT_EQ(kv.TakeInt("k"), 12);
  EXPECT_EQ(kv.TakeBool("flag"), true);
  EXPECT_EQ(kv.TakeDoubleList("list"), (std::vector<double>{1, 2.5, 3}));
  EXPECT_EQ(kv.TakeIntList("ints"), (std::vector<std::int64_t>{100, 1000}));
  EXPECT_FALSE(kv.TakeDouble("absent"));
  EXPECT_NO_THROW(kv.CheckAllUsed());
}

TEST(KeyValueConfigTest, Errors) {
  EXPECT_EQ(KindOf([] { Kv("no equals sign\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("a = 1\na = 2\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("x = abc\n").TakeDouble("x"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("x = 1.5\n").TakeInt("x"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("x = maybe\n").TakeBool("x"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("x = 1,,2\n").TakeDoubleList("x"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { Kv("typo = 1\n").CheckAllUsed(); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { KeyValueConfig::Load("/nonexistent/x.cfg"); }), ErrorKind::kIo);
}

TEST(ExperimentPlanTest, DefaultsAndExpansion) {
  KeyValueConfig kv = Kv("n = 100, 1000\nalpha = 0.05, 0.5\nrepetitions = 7\n");
  const ExperimentPlan plan = ParseExperimentPlan(kv, 99);
  EXPECT_EQ(plan.base.seed, 99u);
  EXPECT_EQ(plan.base.repetitions, 7);
  EXPECT_EQ(plan.base.q, 0.05);
  EXPECT_EQ(plan.base.eval_size, 20000u);
  EXPECT_EQ(plan.base.detector.num_trees, 1000);
  const auto cells = plan.Expand();
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].alpha, 0.05);
  EXPECT_EQ(cells[0].n, 100u);
  EXPECT_EQ(cells[1].alpha, 0.05);
  EXPECT_EQ(cells[1].n, 1000u);
  EXPECT_EQ(cells[2].alpha, 0.5);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(cells[i].seed, DeriveSeed(99, i));
  }
}

TEST(ExperimentPlanTest, ShiftPatterns) {
  KeyValueConfig kv = Kv("shift_patterns = 0.5:2; 0.5:5\n");
  const ExperimentPlan plan = ParseExperimentPlan(kv, 1);
  ASSERT_EQ(plan.base.synth.patterns.size(), 2u);
  EXPECT_EQ(plan.base.synth.patterns[1].shifted_dims, 5u);
  KeyValueConfig bad = Kv("shift_patterns = 0.5-2\n");
  EXPECT_EQ(KindOf([&] { ParseExperimentPlan(bad, 1); }), ErrorKind::kConfig);
  KeyValueConfig sum = Kv("shift_patterns = 0.5:2\n");
  EXPECT_THROW(ParseExperimentPlan(sum, 1), Error);
}

TEST(ExperimentPlanTest, RejectsUnknownAndInvalid) {
  KeyValueConfig kv = Kv("n = 100\nunknown_key = 3\n");
  EXPECT_EQ(KindOf([&] { ParseExperimentPlan(kv, 1); }), ErrorKind::kConfig);
  KeyValueConfig bad = Kv("variant = fancy\n");
  EXPECT_THROW(ParseExperimentPlan(bad, 1), Error);
  KeyValueConfig zero = Kv("n = 0\n");
  EXPECT_EQ(KindOf([&] { ParseExperimentPlan(zero, 1); }), ErrorKind::kConfig);
}

TEST(ExperimentPlanTest, ResolvedTextEchoesEveryDefault) {
  KeyValueConfig kv = Kv("alpha = 0.3\n");
  const ExperimentPlan plan = ParseExperimentPlan(kv, 5);
  const std::string text = ResolvedConfigText(plan);
  for (const char* key :
       {"detector", "num_trees", "subsample_fraction", "num_projections",
        "loda_bin_width", "n", "alpha", "alpha_prime", "q", "delta", "repetitions",
        "eval_size", "variant", "mixture_mode", "oracle", "oracle_size", "dim", "shift",
        "shift_patterns", "threads", "xi"}) {
    EXPECT_NE(text.find(std::string("\n") + key + " = "), std::string::npos) << key;
  }
  EXPECT_NE(text.find("# seed = 5"), std::string::npos);
  // The echo parses back to the same plan.
  KeyValueConfig again = Kv(text);
  const ExperimentPlan back = ParseExperimentPlan(again, 5);
  EXPECT_EQ(ResolvedConfigText(back), text);
}

TEST(CvPlanTest, NeedsOneInputKind) {
  KeyValueConfig none = Kv("alpha = 0.1\n");
  EXPECT_EQ(KindOf([&] { ParseCvPlan(none, 1); }), ErrorKind::kConfig);
  KeyValueConfig half = Kv("clean_scores = a.txt\n");
  EXPECT_EQ(KindOf([&] { ParseCvPlan(half, 1); }), ErrorKind::kConfig);
  KeyValueConfig no_classes = Kv("data = x.csv\n");
  EXPECT_EQ(KindOf([&] { ParseCvPlan(no_classes, 1); }), ErrorKind::kConfig);

  KeyValueConfig ok = Kv("data = x.csv\nnominal_classes = 1, 2\nalpha = 0.1, 0.2\nfolds = 4\n");
  const CvPlan plan = ParseCvPlan(ok, 8);
  EXPECT_EQ(plan.nominal_classes, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(plan.label_column, "class");
  const auto cells = plan.Expand();
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[1].alpha, 0.2);
  EXPECT_EQ(cells[1].folds, 4);
  const std::string text = ResolvedConfigText(plan);
  for (const char* key : {"folds", "repetitions", "nominal_classes", "label_column", "q"}) {
    EXPECT_NE(text.find(std::string("\n") + key + " = "), std::string::npos) << key;
  }
  KeyValueConfig again = Kv(text);
  EXPECT_EQ(ResolvedConfigText(ParseCvPlan(again, 8)), text);

  KeyValueConfig scores = Kv("clean_scores = a\nmixture_scores = b\n");
  const std::string score_text = ResolvedConfigText(ParseCvPlan(scores, 8));
  KeyValueConfig score_again = Kv(score_text);
  EXPECT_EQ(ResolvedConfigText(ParseCvPlan(score_again, 8)), score_text);
}

}  // namespace
}  // namespace ocd
