#ifndef OCD_CDF_MIXTURE_H_
#define OCD_CDF_MIXTURE_H_

// Step-function CDF arithmetic for open category detection: empirical CDFs of
// anomaly scores, the mixture-corrected alien score CDF, its isotonic/clipped
// legal form, and alarm-threshold selection.
//
// Scores are oriented so that higher means more anomalous. A threshold raises
// an alarm on every score strictly greater than it.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ocd {

enum class ScoreSource { kClean, kMixture, kExternal };

// A finite multiset of anomaly scores, stored sorted ascending.
class ScoreSample {
 public:
  ScoreSample() = default;
  // Throws InvalidArgument if any value is NaN or infinite.
  explicit ScoreSample(std::vector<double> values,
                       ScoreSource source = ScoreSource::kExternal);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }
  ScoreSource source() const { return source_; }

 private:
  std::vector<double> values_;
  ScoreSource source_ = ScoreSource::kExternal;
};

// Right-continuous empirical CDF: F(x) = #{v <= x} / n.
class EmpiricalCdf {
 public:
  // Throws InvalidArgument("empty sample") for an empty sample.
  explicit EmpiricalCdf(const ScoreSample& sample);

  double operator()(double x) const;

  // Number of sample values <= x. Exact integer form of operator().
  std::size_t CountAtOrBelow(double x) const;

  std::span<const double> support() const { return support_; }
  std::span<const double> cum() const { return cum_; }
  std::size_t sample_size() const { return n_; }

 private:
  std::vector<double> support_;        // distinct values, ascending
  std::vector<std::size_t> counts_;    // cumulative counts per support value
  std::vector<double> cum_;            // counts_ / n_, last entry exactly 1
  std::size_t n_ = 0;
};

// Convenience wrapper for EmpiricalCdf(sample).
EmpiricalCdf BuildEmpiricalCdf(const ScoreSample& sample);

// Sorted distinct union of the supports of two CDFs.
std::vector<double> UnionGrid(const EmpiricalCdf& a, const EmpiricalCdf& b);

// Alien score CDF estimate F_a = (F_m - (1 - alpha) F_0) / alpha evaluated on
// the union of the clean and mixture supports. `raw` may leave [0, 1] and
// need not be monotone; `legal` holds the isotonized and clipped version once
// IsotonizeAndClip has been applied.
struct AlienCdfEstimate {
  std::vector<double> grid;
  std::vector<double> raw;
  std::optional<std::vector<double>> legal;
  double alpha = 1.0;
};

// Throws InvalidArgument("invalid alpha") unless 0 < alpha <= 1.
AlienCdfEstimate EstimateAlienCdf(const EmpiricalCdf& clean,
                                  const EmpiricalCdf& mixture, double alpha);

// Uniform-weight least-squares projection onto non-decreasing sequences
// (pool adjacent violators).
std::vector<double> IsotonicRegression(std::span<const double> values);

// Returns a copy of `estimate` with `legal` = clip(isotonic(raw), 0, 1).
AlienCdfEstimate IsotonizeAndClip(AlienCdfEstimate estimate);

enum class ThresholdVariant { kBasic, kIso };

std::string_view VariantName(ThresholdVariant variant);
// Accepts "basic" or "iso"; throws InvalidArgument otherwise.
ThresholdVariant ParseVariant(std::string_view name);

// An alarm threshold. An empty `tau` is the flag-all sentinel: the threshold
// lies below every score, so every query raises an alarm.
struct DetectionThreshold {
  std::optional<double> tau;
  double q = 0.05;
  ThresholdVariant variant = ThresholdVariant::kBasic;
  double alpha = 1.0;

  bool flags_all() const { return !tau.has_value(); }
  bool Alarm(double score) const { return !tau || score > *tau; }
};

// Values at grid points compare <= q within this tolerance.
inline constexpr double kCdfTolerance = 1e-12;

// Largest grid point u with F(u) <= q, where F is `raw` (basic) or `legal`
// (iso). Returns the flag-all sentinel when no grid point qualifies.
// Throws InvalidArgument if q is not in (0, 1) or if the iso variant is
// requested before IsotonizeAndClip.
DetectionThreshold SelectThreshold(const AlienCdfEstimate& estimate, double q,
                                   ThresholdVariant variant);

// Alarm flag per score, in input order.
std::vector<bool> Classify(std::span<const double> scores,
                           const DetectionThreshold& threshold);

// Fraction of scores that raise an alarm; 0 for an empty span.
double AlarmRate(std::span<const double> scores,
                 const DetectionThreshold& threshold);

// End to end: empirical CDFs, alien CDF estimate (isotonized when
// the iso variant is requested), threshold.
struct FittedThreshold {
  AlienCdfEstimate estimate;
  DetectionThreshold threshold;
};
FittedThreshold FitThreshold(const ScoreSample& clean,
                             const ScoreSample& mixture, double alpha,
                             double q, ThresholdVariant variant);

}  // namespace ocd

#endif  // OCD_CDF_MIXTURE_H_
