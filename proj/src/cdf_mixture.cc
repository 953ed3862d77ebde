#include "ocd/cdf_mixture.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <utility>

#include <fmt/format.h>

#include "ocd/status.h"

namespace ocd {

ScoreSample::ScoreSample(std::vector<double> values, ScoreSource source)
    : values_(std::move(values)), source_(source) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgumentError(
          fmt::format("non-finite score at index {}", i));
    }
  }
  std::sort(values_.begin(), values_.end());
}

EmpiricalCdf::EmpiricalCdf(const ScoreSample& sample) : n_(sample.size()) {
  if (sample.empty()) throw InvalidArgumentError("empty sample");
  const auto values = sample.values();
  std::size_t i = 0;
  while (i < values.size()) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    support_.push_back(values[i]);
    counts_.push_back(j);
    i = j;
  }
  cum_.reserve(counts_.size());
  for (const std::size_t c : counts_) {
    cum_.push_back(static_cast<double>(c) / static_cast<double>(n_));
  }
  cum_.back() = 1.0;
}

std::size_t EmpiricalCdf::CountAtOrBelow(double x) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0;
  return counts_[std::distance(support_.begin(), it) - 1];
}

double EmpiricalCdf::operator()(double x) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cum_[std::distance(support_.begin(), it) - 1];
}

EmpiricalCdf BuildEmpiricalCdf(const ScoreSample& sample) {
  return EmpiricalCdf(sample);
}

std::vector<double> UnionGrid(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  std::vector<double> grid;
  grid.reserve(a.support().size() + b.support().size());
  std::set_union(a.support().begin(), a.support().end(), b.support().begin(),
                 b.support().end(), std::back_inserter(grid));
  return grid;
}

AlienCdfEstimate EstimateAlienCdf(const EmpiricalCdf& clean,
                                  const EmpiricalCdf& mixture, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidArgumentError(fmt::format("invalid alpha: {}", alpha));
  }
  AlienCdfEstimate est;
  est.alpha = alpha;
  est.grid = UnionGrid(clean, mixture);
  est.raw.reserve(est.grid.size());

  // Both supports are subsets of the grid, so a single merge pass evaluates
  // the two step functions at every grid point.
  const auto s0 = clean.support();
  const auto c0 = clean.cum();
  const auto sm = mixture.support();
  const auto cm = mixture.cum();
  std::size_t i0 = 0;
  std::size_t im = 0;
  double f0 = 0.0;
  double fm = 0.0;
  for (const double g : est.grid) {
    while (i0 < s0.size() && s0[i0] <= g) f0 = c0[i0++];
    while (im < sm.size() && sm[im] <= g) fm = cm[im++];
    est.raw.push_back((fm - (1.0 - alpha) * f0) / alpha);
  }
  return est;
}

std::vector<double> IsotonicRegression(std::span<const double> values) {
  // Blocks of pooled values: (mean, weight).
  std::vector<double> means;
  std::vector<std::size_t> weights;
  means.reserve(values.size());
  weights.reserve(values.size());
  for (const double v : values) {
    double mean = v;
    std::size_t weight = 1;
    while (!means.empty() && means.back() > mean) {
      const double w_prev = static_cast<double>(weights.back());
      const double w_cur = static_cast<double>(weight);
      mean = (means.back() * w_prev + mean * w_cur) / (w_prev + w_cur);
      weight += weights.back();
      means.pop_back();
      weights.pop_back();
    }
    means.push_back(mean);
    weights.push_back(weight);
  }
  std::vector<double> fitted;
  fitted.reserve(values.size());
  for (std::size_t b = 0; b < means.size(); ++b) {
    fitted.insert(fitted.end(), weights[b], means[b]);
  }
  return fitted;
}

AlienCdfEstimate IsotonizeAndClip(AlienCdfEstimate estimate) {
  std::vector<double> legal = IsotonicRegression(estimate.raw);
  for (double& v : legal) v = std::clamp(v, 0.0, 1.0);
  estimate.legal = std::move(legal);
  return estimate;
}

std::string_view VariantName(ThresholdVariant variant) {
  return variant == ThresholdVariant::kBasic ? "basic" : "iso";
}

ThresholdVariant ParseVariant(std::string_view name) {
  if (name == "basic") return ThresholdVariant::kBasic;
  if (name == "iso") return ThresholdVariant::kIso;
  throw InvalidArgumentError(fmt::format("unknown threshold variant '{}'", name));
}

DetectionThreshold SelectThreshold(const AlienCdfEstimate& estimate, double q,
                                   ThresholdVariant variant) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidArgumentError(fmt::format("q must lie in (0, 1), got {}", q));
  }
  const std::vector<double>* values = &estimate.raw;
  if (variant == ThresholdVariant::kIso) {
    if (!estimate.legal) {
      throw InvalidArgumentError(
          "iso threshold requested on an estimate that was not isotonized");
    }
    values = &*estimate.legal;
  }
  DetectionThreshold threshold;
  threshold.q = q;
  threshold.variant = variant;
  threshold.alpha = estimate.alpha;
  for (std::size_t i = values->size(); i-- > 0;) {
    if ((*values)[i] <= q + kCdfTolerance) {
      threshold.tau = estimate.grid[i];
      break;
    }
  }
  return threshold;
}

std::vector<bool> Classify(std::span<const double> scores,
                           const DetectionThreshold& threshold) {
  std::vector<bool> flags(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    flags[i] = threshold.Alarm(scores[i]);
  }
  return flags;
}

double AlarmRate(std::span<const double> scores,
                 const DetectionThreshold& threshold) {
  if (scores.empty()) return 0.0;
  const auto alarms = std::count_if(
      scores.begin(), scores.end(),
      [&](double s) { return threshold.Alarm(s); });
  return static_cast<double>(alarms) / static_cast<double>(scores.size());
}

FittedThreshold FitThreshold(const ScoreSample& clean,
                             const ScoreSample& mixture, double alpha,
                             double q, ThresholdVariant variant) {
  FittedThreshold fitted;
  fitted.estimate =
      EstimateAlienCdf(EmpiricalCdf(clean), EmpiricalCdf(mixture), alpha);
  if (variant == ThresholdVariant::kIso) {
    fitted.estimate = IsotonizeAndClip(std::move(fitted.estimate));
  }
  fitted.threshold = SelectThreshold(fitted.estimate, q, variant);
  return fitted;
}

}  // namespace ocd
