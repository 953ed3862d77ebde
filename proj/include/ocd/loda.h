#ifndef OCD_LODA_H_
#define OCD_LODA_H_

// Lightweight on-line detector of anomalies: an ensemble of sparse random
// projections, each paired with a fixed-width histogram of a bootstrap
// resample. score(x) = -mean_k log p_k(w_k . x).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "ocd/point_set.h"

namespace ocd {

struct LodaOptions {
  int num_projections = 1000;
  std::uint64_t seed = 0;
  // Fixed bin width for every histogram; by default each histogram picks
  // 2 IQR m^(-1/3) from its own bootstrap sample.
  std::optional<double> bin_width;

  friend bool operator==(const LodaOptions&, const LodaOptions&) = default;
};

// Fixed-width histogram with bins [origin + k w, origin + (k+1) w).
class Histogram1d {
 public:
  Histogram1d() = default;
  // Throws InvalidArgument for empty input or a non-positive width.
  static Histogram1d Build(std::span<const double> values,
                           std::optional<double> bin_width = std::nullopt);

  // Density estimate count / (m w); empty bins and points outside the
  // histogram count 1/m instead of 0.
  double Density(double z) const;

  double origin() const { return origin_; }
  double width() const { return width_; }
  const std::vector<std::uint32_t>& counts() const { return counts_; }
  std::size_t sample_size() const { return sample_size_; }

  friend bool operator==(const Histogram1d&, const Histogram1d&) = default;

 private:
  friend class Loda;
  double origin_ = 0.0;
  double width_ = 1.0;
  std::vector<std::uint32_t> counts_;
  std::size_t sample_size_ = 0;
};

// Bin width 2 IQR m^(-1/3) with fallbacks for degenerate spread.
double FreedmanDiaconisWidth(std::span<const double> values);

struct LodaProjection {
  std::vector<std::uint32_t> features;  // nonzero coordinates, ascending
  std::vector<double> weights;          // unit norm together
  Histogram1d histogram;
  std::vector<std::uint32_t> bootstrap;  // sorted multiset of training rows

  double Project(std::span<const double> x) const;
  bool InBag(std::uint32_t row) const;

  friend bool operator==(const LodaProjection&,
                         const LodaProjection&) = default;
};

class Loda {
 public:
  // Deterministic in (data, options). Throws InvalidArgument for empty data
  // or num_projections < 1.
  static Loda Train(const PointSet& data, const LodaOptions& options);

  std::vector<double> Score(const PointSet& points) const;

  // Scores each training row with only the projections whose bootstrap
  // excluded it. Throws InvalidArgument naming rows present in every
  // bootstrap.
  std::vector<double> ScoreLeaveOut(const PointSet& training) const;

  std::vector<std::size_t> LeaveOutProjections(std::uint32_t row) const;

  const std::vector<LodaProjection>& projections() const {
    return projections_;
  }
  std::size_t dim() const { return dim_; }
  std::size_t training_size() const { return training_size_; }
  const LodaOptions& options() const { return options_; }

  nlohmann::json ToJson() const;
  static Loda FromJson(const nlohmann::json& json);

  friend bool operator==(const Loda&, const Loda&) = default;

 private:
  LodaOptions options_;
  std::size_t dim_ = 0;
  std::size_t training_size_ = 0;
  std::vector<LodaProjection> projections_;
};

}  // namespace ocd

#endif  // OCD_LODA_H_
