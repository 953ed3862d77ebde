#include "ocd/iforest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "ocd/detectors.h"
#include "ocd/parallel.h"
#include "ocd/point_set.h"
#include "ocd/status.h"

namespace ocd {
namespace {

PointSet Gaussian(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n * d);
  for (double& x : v) x = z(rng);
  return PointSet(d, std::move(v));
}

// Replays the subsample down the tree and checks splits and leaves.
void CheckLeaves(const IsolationTree& tree, const PointSet& data) {
  const auto& nodes = tree.nodes();
  std::vector<std::pair<std::int32_t, std::vector<std::uint32_t>>> stack = {
      {0, tree.subsample()}};
  while (!stack.empty()) {
    auto [id, rows] = stack.back();
    stack.pop_back();
    const auto& node = nodes[id];
    ASSERT_EQ(static_cast<std::size_t>(node.num_rows), rows.size());
    if (node.is_leaf()) {
      // One row, or all rows identical.
      for (const auto r : rows) {
        EXPECT_TRUE(std::equal(data.row(r).begin(), data.row(r).end(),
                               data.row(rows.front()).begin()));
      }
      continue;
    }
    std::vector<std::uint32_t> left, right;
    for (const auto r : rows) {
      (data.row(r)[node.feature] < node.split ? left : right).push_back(r);
    }
    EXPECT_FALSE(left.empty());
    EXPECT_FALSE(right.empty());
    stack.push_back({node.left, left});
    stack.push_back({node.right, right});
  }
}

TEST(AveragePathLengthTest, Values) {
  EXPECT_EQ(AveragePathLength(1), 0.0);
  EXPECT_DOUBLE_EQ(AveragePathLength(2), 1.0);
  // 2 H(2) - 2 * 2 / 3 = 3 - 4/3.
  EXPECT_NEAR(AveragePathLength(3), 3.0 - 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(AveragePathLength(256), 2 * (std::log(255.0) + 0.5772156649) - 2 * 255.0 / 256,
              1e-2);
}

TEST(IsolationForestTest, TwoPointsIsolatedAtDepthOne) {
  const PointSet data(2, {0, 0, 1, 1});
  const auto forest = IsolationForest::Train(data, {1, 1.0, 3});
  ASSERT_EQ(forest.trees().size(), 1u);
  EXPECT_EQ(forest.subsample_size(), 2u);
  const auto scores = forest.Score(data);
  EXPECT_DOUBLE_EQ(scores[0], 0.5);
  EXPECT_DOUBLE_EQ(scores[1], 0.5);
}

TEST(IsolationForestTest, IdenticalPointsGiveSingleLeaf) {
  const PointSet data(3, std::vector<double>(3 * 20, 1.5));
  const auto forest = IsolationForest::Train(data, {5, 0.5, 1});
  for (const auto& tree : forest.trees()) {
    ASSERT_EQ(tree.nodes().size(), 1u);
    EXPECT_EQ(tree.PathLength(data.row(0)), 0);
  }
  // Single-leaf trees give path length 0 and score 2^0.
  for (const double s : forest.Score(PointSet(3, {7, 8, 9}))) EXPECT_EQ(s, 1.0);
}

TEST(IsolationForestTest, RejectsBadOptions) {
  const PointSet data = Gaussian(10, 2, 1);
  EXPECT_THROW(IsolationForest::Train(data, {0, 0.2, 1}), Error);
  EXPECT_THROW(IsolationForest::Train(data, {10, 0.0, 1}), Error);
  EXPECT_THROW(IsolationForest::Train(data, {10, 1.5, 1}), Error);
  EXPECT_THROW(IsolationForest::Train(PointSet(), {10, 0.2, 1}), Error);
  const auto forest = IsolationForest::Train(data, {10, 0.2, 1});
  EXPECT_THROW(forest.Score(Gaussian(3, 5, 1)), Error);
}

TEST(IsolationForestTest, SubsampleSizeAndMembership) {
  const PointSet data = Gaussian(101, 3, 2);
  const auto forest = IsolationForest::Train(data, {40, 0.2, 9});
  EXPECT_EQ(forest.subsample_size(), 21u);  // ceil(20.2)
  for (const auto& tree : forest.trees()) {
    const auto& s = tree.subsample();
    EXPECT_EQ(s.size(), 21u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::set<std::uint32_t>(s.begin(), s.end()).size(), s.size());
    EXPECT_LT(s.back(), 101u);
  }
}

TEST(IsolationForestTest, FullDepthAndDepthBound) {
  std::vector<double> v;
  std::mt19937_64 rng(4);
  // Many duplicates so zero-spread leaves occur.
  for (int i = 0; i < 300; ++i) v.push_back(static_cast<double>(rng() % 5));
  const PointSet data(3, v);
  const auto forest = IsolationForest::Train(data, {30, 0.5, 4});
  for (const auto& tree : forest.trees()) {
    CheckLeaves(tree, data);
    for (std::size_t i = 0; i < data.size(); ++i) {
      EXPECT_LE(tree.PathLength(data.row(i)),
                static_cast<int>(forest.subsample_size()) - 1);
    }
  }
}

TEST(IsolationForestTest, OutOfBagMembershipAudit) {
  const PointSet data = Gaussian(60, 2, 5);
  const auto forest = IsolationForest::Train(data, {50, 0.3, 5});
  for (std::uint32_t r = 0; r < data.size(); ++r) {
    const auto used = forest.OutOfBagTrees(r);
    std::set<std::size_t> used_set(used.begin(), used.end());
    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
      const auto& s = forest.trees()[t].subsample();
      const bool in_bag = std::binary_search(s.begin(), s.end(), r);
      EXPECT_EQ(forest.trees()[t].InBag(r), in_bag);
      EXPECT_NE(used_set.count(t) > 0, in_bag);
    }
  }
  // OOB score recomputed from the audited tree set.
  const auto oob = forest.ScoreOutOfBag(data);
  for (std::uint32_t r = 0; r < data.size(); ++r) {
    double sum = 0;
    const auto used = forest.OutOfBagTrees(r);
    for (const auto t : used) sum += forest.trees()[t].PathLength(data.row(r));
    const double expected =
        std::pow(2.0, -(sum / used.size()) / AveragePathLength(forest.subsample_size()));
    EXPECT_DOUBLE_EQ(oob[r], expected);
  }
}

TEST(IsolationForestTest, OutOfBagFailsWhenRowAlwaysInBag) {
  const PointSet data = Gaussian(5, 1, 6);
  const auto forest = IsolationForest::Train(data, {3, 1.0, 6});
  try {
    forest.ScoreOutOfBag(data);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidArgument);
    EXPECT_NE(std::string(e.what()).find("0"), std::string::npos);
  }
}

TEST(IsolationForestTest, FarQueryOutscoresCluster) {
  // The far point is part of the training set; outside it, a 1-d query
  // beyond the range follows the subsample maximum's path.
  std::vector<double> v;
  for (int i = 0; i < 10; ++i) v.push_back(i / 10.0);
  v.push_back(100.0);
  const PointSet data(1, v);
  const auto forest = IsolationForest::Train(data, {200, 0.2, 77});
  const auto oob = forest.ScoreOutOfBag(data);
  const double far = forest.Score(PointSet(1, {100.0}))[0];
  for (std::size_t i = 0; i < 10; ++i) EXPECT_GT(far, oob[i]);
}

TEST(IsolationForestTest, ScoreOrientation9d) {
  const PointSet data = Gaussian(500, 9, 8);
  const auto forest = IsolationForest::Train(data, {100, 0.2, 8});
  const auto s = forest.Score(PointSet(9, std::vector<double>(18, 0.0)));
  std::vector<double> far(9, 6.0);
  EXPECT_GT(forest.Score(PointSet(9, far))[0], s[0]);
  EXPECT_EQ(s[0], s[1]);
}

TEST(IsolationForestTest, DeterministicAndThreadIndependent) {
  const PointSet data = Gaussian(200, 4, 9);
  const std::size_t saved = ParallelismSetting();
  ParallelismSetting() = 1;
  const auto a = IsolationForest::Train(data, {64, 0.2, 123});
  ParallelismSetting() = 4;
  const auto b = IsolationForest::Train(data, {64, 0.2, 123});
  ParallelismSetting() = saved;
  EXPECT_TRUE(a == b);
  EXPECT_EQ(a.Score(data), b.Score(data));
  const auto c = IsolationForest::Train(data, {64, 0.2, 124});
  EXPECT_FALSE(a == c);
}

TEST(IsolationForestTest, JsonRoundTrip) {
  const PointSet data = Gaussian(80, 3, 10);
  const auto forest = IsolationForest::Train(data, {20, 0.25, 10});
  const auto back = IsolationForest::FromJson(nlohmann::json::parse(forest.ToJson().dump()));
  EXPECT_TRUE(back == forest);
  EXPECT_EQ(back.Score(data), forest.Score(data));
  auto bad = forest.ToJson();
  bad["version"] = 99;
  EXPECT_THROW(IsolationForest::FromJson(bad), Error);
}

TEST(DetectorTest, FactoryAndNames) {
  EXPECT_EQ(ParseDetectorKind("iforest"), DetectorKind::kIsolationForest);
  EXPECT_EQ(DetectorName(ParseDetectorKind("loda")), "loda");
  EXPECT_EQ(ParseDetectorKind("external"), DetectorKind::kExternal);
  EXPECT_THROW(ParseDetectorKind("ocsvm"), Error);
  DetectorOptions opts;
  opts.kind = DetectorKind::kExternal;
  EXPECT_THROW(MakeDetector(opts), Error);

  opts.kind = DetectorKind::kIsolationForest;
  opts.num_trees = 30;
  auto det = MakeDetector(opts);
  const PointSet data = Gaussian(50, 2, 11);
  const auto oob = det->Fit(data, 5);
  EXPECT_EQ(oob.size(), 50u);
  EXPECT_EQ(det->Score(data).size(), 50u);
}

}  // namespace
}  // namespace ocd
