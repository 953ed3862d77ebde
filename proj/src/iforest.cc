#include "ocd/iforest.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "ocd/parallel.h"
#include "ocd/status.h"

namespace ocd {
namespace {

constexpr char kFormatName[] = "ocd.isolation_forest";
constexpr int kFormatVersion = 1;

// Rows per scoring work item.
constexpr std::size_t kScoreBlock = 256;

struct PendingNode {
  std::int32_t node;
  std::size_t begin;
  std::size_t end;
};

}  // namespace

double AveragePathLength(std::size_t m) {
  if (m <= 1) return 0.0;
  double harmonic = 0.0;
  for (std::size_t i = 1; i < m; ++i) harmonic += 1.0 / static_cast<double>(i);
  const double md = static_cast<double>(m);
  return 2.0 * harmonic - 2.0 * (md - 1.0) / md;
}

IsolationTree IsolationTree::Grow(const PointSet& data,
                                  std::vector<std::uint32_t> rows, Rng& rng) {
  IsolationTree tree;
  std::sort(rows.begin(), rows.end());
  tree.subsample_ = rows;
  if (rows.empty()) return tree;

  const std::size_t dim = data.dim();
  std::vector<double> lo(dim);
  std::vector<double> hi(dim);
  std::vector<std::size_t> splittable;
  splittable.reserve(dim);

  tree.nodes_.push_back({});
  std::vector<PendingNode> stack = {{0, 0, rows.size()}};
  while (!stack.empty()) {
    const PendingNode pending = stack.back();
    stack.pop_back();
    const std::size_t count = pending.end - pending.begin;
    tree.nodes_[pending.node].num_rows = static_cast<std::int32_t>(count);
    if (count <= 1) continue;

    std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
    std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = pending.begin; i < pending.end; ++i) {
      const auto x = data.row(rows[i]);
      for (std::size_t f = 0; f < dim; ++f) {
        lo[f] = std::min(lo[f], x[f]);
        hi[f] = std::max(hi[f], x[f]);
      }
    }
    splittable.clear();
    for (std::size_t f = 0; f < dim; ++f) {
      if (hi[f] > lo[f]) splittable.push_back(f);
    }
    // Zero spread on every feature: a group of duplicates stays a leaf.
    if (splittable.empty()) continue;

    const std::size_t feature = splittable[std::uniform_int_distribution<
        std::size_t>(0, splittable.size() - 1)(rng)];
    std::uniform_real_distribution<double> cut(lo[feature], hi[feature]);
    double split = cut(rng);
    while (split <= lo[feature]) split = cut(rng);

    const auto middle = std::partition(
        rows.begin() + static_cast<std::ptrdiff_t>(pending.begin),
        rows.begin() + static_cast<std::ptrdiff_t>(pending.end),
        [&](std::uint32_t r) { return data.row(r)[feature] < split; });
    const auto mid = static_cast<std::size_t>(middle - rows.begin());

    const auto left = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    Node& node = tree.nodes_[pending.node];
    node.feature = static_cast<std::int32_t>(feature);
    node.split = split;
    node.left = left;
    node.right = left + 1;
    stack.push_back({left + 1, mid, pending.end});
    stack.push_back({left, pending.begin, mid});
  }
  return tree;
}

int IsolationTree::PathLength(std::span<const double> x) const {
  int depth = 0;
  std::int32_t index = 0;
  while (!nodes_[index].is_leaf()) {
    const Node& node = nodes_[index];
    index = x[node.feature] < node.split ? node.left : node.right;
    ++depth;
  }
  return depth;
}

bool IsolationTree::InBag(std::uint32_t row) const {
  return std::binary_search(subsample_.begin(), subsample_.end(), row);
}

IsolationForest IsolationForest::Train(const PointSet& data,
                                       const IsolationForestOptions& options) {
  if (data.empty()) throw InvalidArgumentError("cannot train on empty data");
  if (options.num_trees < 1) {
    throw InvalidArgumentError(
        fmt::format("num_trees must be >= 1, got {}", options.num_trees));
  }
  if (!(options.subsample_fraction > 0.0 && options.subsample_fraction <= 1.0)) {
    throw InvalidArgumentError(fmt::format(
        "subsample_fraction must lie in (0, 1], got {}",
        options.subsample_fraction));
  }
  IsolationForest forest;
  forest.options_ = options;
  forest.training_size_ = data.size();
  forest.dim_ = data.dim();
  const double target =
      std::ceil(options.subsample_fraction * static_cast<double>(data.size()) -
                1e-9);
  forest.psi_ = std::clamp<std::size_t>(static_cast<std::size_t>(target), 1,
                                        data.size());

  std::vector<std::uint32_t> all(data.size());
  std::iota(all.begin(), all.end(), 0u);
  forest.trees_.resize(static_cast<std::size_t>(options.num_trees));
  ParallelFor(forest.trees_.size(), [&](std::size_t t) {
    Rng rng = MakeRng(options.seed, t);
    std::vector<std::uint32_t> rows;
    rows.reserve(forest.psi_);
    std::sample(all.begin(), all.end(), std::back_inserter(rows), forest.psi_,
                rng);
    forest.trees_[t] = IsolationTree::Grow(data, std::move(rows), rng);
  });
  return forest;
}

double IsolationForest::ScoreFromMeanPath(double mean_path) const {
  double normalizer = AveragePathLength(psi_);
  if (normalizer <= 0.0) normalizer = 1.0;
  return std::exp2(-mean_path / normalizer);
}

std::vector<double> IsolationForest::Score(const PointSet& points) const {
  if (!points.empty() && points.dim() != dim_) {
    throw InvalidArgumentError(fmt::format(
        "points have dimension {}, model expects {}", points.dim(), dim_));
  }
  std::vector<double> scores(points.size());
  const std::size_t blocks = (points.size() + kScoreBlock - 1) / kScoreBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(points.size(), (b + 1) * kScoreBlock);
    for (std::size_t i = b * kScoreBlock; i < end; ++i) {
      const auto x = points.row(i);
      long total = 0;
      for (const IsolationTree& tree : trees_) total += tree.PathLength(x);
      scores[i] = ScoreFromMeanPath(static_cast<double>(total) /
                                    static_cast<double>(trees_.size()));
    }
  });
  return scores;
}

std::vector<double> IsolationForest::ScoreOutOfBag(
    const PointSet& training) const {
  if (training.size() != training_size_ || training.dim() != dim_) {
    throw InvalidArgumentError(fmt::format(
        "out-of-bag scoring needs the {}x{} training set, got {}x{}",
        training_size_, dim_, training.size(), training.dim()));
  }
  // in_bag[t * n + row]
  const std::size_t n = training_size_;
  std::vector<std::uint8_t> in_bag(trees_.size() * n, 0);
  std::vector<std::size_t> bag_count(n, 0);
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    for (const std::uint32_t r : trees_[t].subsample()) {
      in_bag[t * n + r] = 1;
      ++bag_count[r];
    }
  }
  std::vector<std::size_t> uncovered;
  for (std::size_t r = 0; r < n; ++r) {
    if (bag_count[r] == trees_.size()) uncovered.push_back(r);
  }
  if (!uncovered.empty()) {
    throw InvalidArgumentError(fmt::format(
        "cannot score out of bag: row(s) {} are in every tree's subsample",
        fmt::join(uncovered.begin(),
                  uncovered.begin() +
                      static_cast<std::ptrdiff_t>(
                          std::min<std::size_t>(uncovered.size(), 20)),
                  ", ")));
  }

  std::vector<double> scores(n);
  const std::size_t blocks = (n + kScoreBlock - 1) / kScoreBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kScoreBlock);
    for (std::size_t i = b * kScoreBlock; i < end; ++i) {
      const auto x = training.row(i);
      long total = 0;
      for (std::size_t t = 0; t < trees_.size(); ++t) {
        if (!in_bag[t * n + i]) total += trees_[t].PathLength(x);
      }
      const auto used = static_cast<double>(trees_.size() - bag_count[i]);
      scores[i] = ScoreFromMeanPath(static_cast<double>(total) / used);
    }
  });
  return scores;
}

std::vector<std::size_t> IsolationForest::OutOfBagTrees(
    std::uint32_t row) const {
  std::vector<std::size_t> used;
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    if (!trees_[t].InBag(row)) used.push_back(t);
  }
  return used;
}

nlohmann::json IsolationForest::ToJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const IsolationTree& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes()) {
      nodes.push_back(
          {node.feature, node.split, node.left, node.right, node.num_rows});
    }
    trees.push_back({{"subsample", tree.subsample()}, {"nodes", nodes}});
  }
  return {
      {"format", kFormatName},
      {"version", kFormatVersion},
      {"num_trees", options_.num_trees},
      {"subsample_fraction", options_.subsample_fraction},
      {"seed", options_.seed},
      {"subsample_size", psi_},
      {"training_size", training_size_},
      {"dim", dim_},
      {"trees", trees},
  };
}

IsolationForest IsolationForest::FromJson(const nlohmann::json& json) {
  try {
    if (json.at("format").get<std::string>() != kFormatName ||
        json.at("version").get<int>() != kFormatVersion) {
      throw IoError("not an isolation forest model (format/version mismatch)");
    }
    IsolationForest forest;
    forest.options_.num_trees = json.at("num_trees").get<int>();
    forest.options_.subsample_fraction =
        json.at("subsample_fraction").get<double>();
    forest.options_.seed = json.at("seed").get<std::uint64_t>();
    forest.psi_ = json.at("subsample_size").get<std::size_t>();
    forest.training_size_ = json.at("training_size").get<std::size_t>();
    forest.dim_ = json.at("dim").get<std::size_t>();
    for (const auto& jt : json.at("trees")) {
      IsolationTree tree;
      tree.subsample_ = jt.at("subsample").get<std::vector<std::uint32_t>>();
      for (const auto& jn : jt.at("nodes")) {
        IsolationTree::Node node;
        node.feature = jn.at(0).get<std::int32_t>();
        node.split = jn.at(1).get<double>();
        node.left = jn.at(2).get<std::int32_t>();
        node.right = jn.at(3).get<std::int32_t>();
        node.num_rows = jn.at(4).get<std::int32_t>();
        tree.nodes_.push_back(node);
      }
      forest.trees_.push_back(std::move(tree));
    }
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(fmt::format("malformed isolation forest model: {}", e.what()));
  }
}

}  // namespace ocd
