#ifndef OCD_SYNTHDATA_H_
#define OCD_SYNTHDATA_H_

// Synthetic benchmark: nominal points are standard normal in every dimension;
// each alien point draws a shift pattern (3 dims w.p. 0.4, 4 dims w.p. 0.6),
// picks that many dimensions uniformly at random and moves their mean to 3.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ocd/point_set.h"

namespace ocd {

struct ShiftPattern {
  double probability;
  std::size_t shifted_dims;
};

struct SynthConfig {
  std::size_t dim = 9;
  double shift = 3.0;
  std::vector<ShiftPattern> patterns = {{0.4, 3}, {0.6, 4}};

  // Throws InvalidArgument unless probabilities sum to 1 and every pattern
  // fits in dim (dim <= 64).
  void Validate() const;
};

enum class Label : std::uint8_t { kNominal = 0, kAlien = 1 };

// Points plus ground-truth labels. Labels are for evaluation only: detectors
// and threshold fitting accept the unlabeled PointSet view.
class LabeledPointSet {
 public:
  LabeledPointSet() = default;
  LabeledPointSet(PointSet points, std::vector<Label> labels);

  const PointSet& unlabeled() const { return points_; }
  const std::vector<Label>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t CountAliens() const;
  // Labels as 0/1 ints, for CSV output.
  std::vector<int> LabelInts() const;

 private:
  PointSet points_;
  std::vector<Label> labels_;
};

PointSet GenerateNominal(std::size_t n, const SynthConfig& config,
                         std::uint64_t seed);

struct AlienDraw {
  PointSet points;
  // Bit f of masks[i] is set iff dimension f of row i was shifted.
  std::vector<std::uint64_t> masks;
};
AlienDraw GenerateAlienWithMasks(std::size_t n, const SynthConfig& config,
                                 std::uint64_t seed);
PointSet GenerateAlien(std::size_t n, const SynthConfig& config,
                       std::uint64_t seed);

enum class MixtureMode { kExactCount, kIid };
std::string_view MixtureModeName(MixtureMode mode);
MixtureMode ParseMixtureMode(std::string_view name);

// kExactCount: exactly round(alpha n) aliens at shuffled positions.
// kIid: each row is an alien independently with probability alpha.
LabeledPointSet GenerateMixture(std::size_t n, double alpha, MixtureMode mode,
                                const SynthConfig& config, std::uint64_t seed);

}  // namespace ocd

#endif  // OCD_SYNTHDATA_H_
