#ifndef OCD_IFOREST_H_
#define OCD_IFOREST_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

#include "ocd/point_set.h"
#include "ocd/random.h"

namespace ocd {

struct IsolationForestOptions {
  int num_trees = 1000;
  // Each tree is grown on ceil(subsample_fraction * n) rows drawn without
  // replacement.
  double subsample_fraction = 0.2;
  std::uint64_t seed = 0;

  friend bool operator==(const IsolationForestOptions&,
                         const IsolationForestOptions&) = default;
};

// Average path length of an unsuccessful BST search over m items,
// c(m) = 2 H(m - 1) - 2 (m - 1) / m, with c(1) = 0.
double AveragePathLength(std::size_t m);

// A fully grown isolation tree: every leaf holds a single row or a group of
// identical rows.
class IsolationTree {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    double split = 0.0;         // go left iff x[feature] < split
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t num_rows = 0;

    bool is_leaf() const { return feature < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };

  // Grows a tree on `rows` of `data`. The subsample is remembered for
  // out-of-bag scoring.
  static IsolationTree Grow(const PointSet& data,
                            std::vector<std::uint32_t> rows, Rng& rng);

  // Number of edges from the root to the leaf reached by x.
  int PathLength(std::span<const double> x) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  // Sorted training-row indices this tree was grown on.
  const std::vector<std::uint32_t>& subsample() const { return subsample_; }
  bool InBag(std::uint32_t row) const;

  friend bool operator==(const IsolationTree&, const IsolationTree&) = default;

 private:
  friend class IsolationForest;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> subsample_;
};

class IsolationForest {
 public:
  // Deterministic in (data, options). Throws InvalidArgument if data is
  // empty, num_trees < 1 or subsample_fraction is outside (0, 1].
  static IsolationForest Train(const PointSet& data,
                               const IsolationForestOptions& options);

  // s(x) = 2^(-mean path length / c(psi)); higher is more anomalous.
  std::vector<double> Score(const PointSet& points) const;

  // Scores each training row using only the trees whose subsample excluded
  // it. `training` must be the exact point set the forest was trained on.
  // Throws InvalidArgument naming the rows that are in-bag for every tree.
  std::vector<double> ScoreOutOfBag(const PointSet& training) const;

  // Indices of the trees used to score training row `row` out of bag.
  std::vector<std::size_t> OutOfBagTrees(std::uint32_t row) const;

  const std::vector<IsolationTree>& trees() const { return trees_; }
  std::size_t subsample_size() const { return psi_; }
  std::size_t training_size() const { return training_size_; }
  std::size_t dim() const { return dim_; }
  const IsolationForestOptions& options() const { return options_; }

  nlohmann::json ToJson() const;
  static IsolationForest FromJson(const nlohmann::json& json);

  friend bool operator==(const IsolationForest&,
                         const IsolationForest&) = default;

 private:
  double ScoreFromMeanPath(double mean_path) const;

  IsolationForestOptions options_;
  std::size_t psi_ = 0;
  std::size_t training_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<IsolationTree> trees_;
};

}  // namespace ocd

#endif  // OCD_IFOREST_H_
