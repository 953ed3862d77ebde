#ifndef OCD_HARNESS_H_
#define OCD_HARNESS_H_

// Experiment orchestration: repeated synthetic trials, bound looseness,
// cross-validated benchmark runs, alpha' misspecification sweeps, and metric
// aggregation.
//
// Every trial depends only on (config, trial seed). Trials run concurrently,
// each writing to its own slot, and are reduced sequentially, so concurrent
// and sequential runs produce identical results.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ocd/cdf_mixture.h"
#include "ocd/detectors.h"
#include "ocd/synthdata.h"

namespace ocd {

enum class VariantSelection { kBasic, kIso, kBoth };
std::string_view VariantSelectionName(VariantSelection selection);
VariantSelection ParseVariantSelection(std::string_view name);
std::vector<ThresholdVariant> ExpandVariants(VariantSelection selection);

struct ExperimentConfig {
  DetectorOptions detector;
  std::size_t n = 1000;  // |S0| = |Sm|
  double alpha = 0.1;    // alien fraction used to generate Sm
  std::optional<double> alpha_prime;  // fit with this upper bound if set
  double q = 0.05;
  double delta = 0.05;
  int repetitions = 100;
  std::size_t eval_size = 20000;  // |G0| = |Ga|
  VariantSelection variant = VariantSelection::kBasic;
  MixtureMode mixture_mode = MixtureMode::kExactCount;
  bool oracle = false;          // also compute the oracle threshold
  std::size_t oracle_size = 0;  // pure-alien pool size; 0 means eval_size
  std::uint64_t seed = 0;
  SynthConfig synth;

  // The fraction handed to the threshold fit.
  double FitAlpha() const { return alpha_prime.value_or(alpha); }
  // Throws InvalidArgument / ConfigError on invalid ranges.
  void Validate() const;
};

// Scores of one trial's datasets.
struct TrialScores {
  std::vector<double> clean;        // S0, out of bag
  std::vector<double> mixture;      // Sm
  std::vector<double> eval_nominal; // G0
  std::vector<double> eval_alien;   // Ga
  std::vector<double> oracle_alien; // large pure-alien pool, if requested
};

struct TrialMetrics {
  std::uint64_t trial_seed = 0;
  ThresholdVariant variant = ThresholdVariant::kBasic;
  std::optional<double> tau;  // empty: flag-all sentinel
  double recall = 0.0;        // fraction of Ga flagged
  double fpr = 0.0;           // fraction of G0 flagged
  std::optional<double> oracle_tau;
  std::optional<double> oracle_fpr;
};

// One trial: one TrialMetrics per selected variant.
struct TrialOutcome {
  std::uint64_t trial_seed = 0;
  std::vector<TrialMetrics> metrics;
};

std::uint64_t TrialSeed(std::uint64_t experiment_seed, std::size_t index);

// Draws S0, Sm, G0, Ga (and the oracle pool) from trial_seed, trains the
// detector on S0 and scores everything. `factory` overrides the detector in
// cfg.detector.
TrialScores GenerateTrialScores(const ExperimentConfig& cfg,
                                std::uint64_t trial_seed,
                                const DetectorFactory* factory = nullptr);

// Fits the threshold from (clean, mixture) with fit_alpha and measures it on
// G0/Ga. fit_alpha == 0 means the mixture carries no alien signal, so the
// flag-all sentinel is returned.
TrialMetrics EvaluateTrial(const TrialScores& scores, double fit_alpha,
                           double q, ThresholdVariant variant);

TrialOutcome RunSyntheticTrial(const ExperimentConfig& cfg,
                               std::uint64_t trial_seed,
                               const DetectorFactory* factory = nullptr);

// 1 - eta is the k-th smallest recall with k = floor(delta R) + 1, so that at
// least (1 - delta) R runs reach recall >= 1 - eta.
double EmpiricalEta(std::span<const double> recalls, double delta);

struct LoosenessResult {
  double empirical_eta = 0.0;
  std::optional<double> epsilon;       // eta - q, when in (0, 1 - q)
  std::optional<std::int64_t> n_star;  // sample size the bound requires
  std::string status = "ok";
};

// Chains the empirical eta to the sample-size bound evaluated at fit_alpha.
LoosenessResult AnalyzeLooseness(std::span<const double> recalls, double q,
                                 double delta, double fit_alpha);

// Nearest-rank quantile: the ceil(p R)-th smallest value (1-based, at least 1).
double NearestRankQuantile(std::span<const double> values, double p);

struct AggregateMetrics {
  ThresholdVariant variant = ThresholdVariant::kBasic;
  std::size_t trials = 0;
  double mean_recall = 0.0;
  std::optional<double> recall_ci95;  // half width; empty when trials < 2
  double mean_fpr = 0.0;
  std::optional<double> fpr_ci95;
  double fpr_q25 = 0.0;
  double fpr_median = 0.0;
  double fpr_q75 = 0.0;
  std::optional<double> oracle_fpr_mean;
  std::optional<double> oracle_fpr_median;
  LoosenessResult looseness;
};

// Mean, normal-approximation 95% CI (1.96 sd / sqrt(R), sample sd) and
// nearest-rank FPR quartiles over trials of one variant.
AggregateMetrics Aggregate(std::span<const TrialMetrics> trials, double q,
                           double delta, double fit_alpha);

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialOutcome> trials;
  std::vector<AggregateMetrics> summary;  // one per selected variant
};

ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const DetectorFactory* factory = nullptr);

// CSV renderings. Columns are fixed; optional values print as "NA".
std::string TrialsCsv(std::span<const ExperimentResult> results);
std::string SummaryCsv(std::span<const ExperimentResult> results);
// Recall per (alpha, n) setting with CI (recall plot).
std::string RecallPlotCsv(std::span<const ExperimentResult> results);
// FPR quartiles and oracle FPR per setting (FPR plot).
std::string FprPlotCsv(std::span<const ExperimentResult> results);
// (n, n_star) pairs (looseness plot).
std::string LoosenessPlotCsv(std::span<const ExperimentResult> results);

// ---- Cross-validated benchmark ----

struct CvConfig {
  DetectorOptions detector;
  double alpha = 0.1;
  std::optional<double> alpha_prime;
  double q = 0.05;
  double delta = 0.05;
  int folds = 10;
  int repetitions = 1;
  // Per-repetition |S0| = |Sm| when sampling from labeled points; 0 picks
  // the largest size the class pools allow.
  std::size_t n = 0;
  VariantSelection variant = VariantSelection::kBasic;
  std::uint64_t seed = 0;

  double FitAlpha() const { return alpha_prime.value_or(alpha); }
  void Validate() const;
};

// Labeled points with the class split: rows whose class is in
// nominal_classes are nominal, all others alien.
struct CvPointData {
  PointSet points;
  std::vector<std::int64_t> classes;
  std::vector<std::int64_t> nominal_classes;
};

// Precomputed scores: clean scores plus labeled mixture scores.
struct CvScoreData {
  std::vector<double> clean;
  std::vector<double> mixture;
  std::vector<Label> mixture_labels;
};

struct FoldMetrics {
  int repetition = 0;
  int fold = 0;
  ThresholdVariant variant = ThresholdVariant::kBasic;
  std::optional<double> tau;
  std::size_t held_out_aliens = 0;
  std::size_t held_out_nominals = 0;
  std::optional<double> recall;  // empty when the fold holds no aliens
  std::optional<double> fpr;     // empty when the fold holds no nominals
};

struct CvResult {
  CvConfig config;
  std::size_t n = 0;  // realized |S0| = |Sm|
  std::vector<FoldMetrics> folds;
  std::vector<TrialMetrics> repetitions;  // fold means per repetition
  std::size_t excluded_folds = 0;         // folds with undefined recall
  std::vector<AggregateMetrics> summary;
};

// Fits on all clean scores plus folds-1 mixture groups and evaluates on the
// held-out group, for each fold.
std::vector<FoldMetrics> CrossValidateScores(const CvScoreData& data,
                                             const CvConfig& cfg,
                                             int repetition,
                                             std::uint64_t fold_seed);

CvResult RunCvBenchmark(const CvPointData& data, const CvConfig& cfg,
                        const DetectorFactory* factory = nullptr);
CvResult RunCvBenchmark(const CvScoreData& data, const CvConfig& cfg);

std::string CvFoldsCsv(std::span<const CvResult> results);
std::string CvSummaryCsv(std::span<const CvResult> results);

// ---- alpha' misspecification sweep ----

struct SweepRow {
  double xi = 0.0;
  double alpha_prime = 0.0;
  std::vector<double> delta_recall;  // per trial, against xi = 0
  std::vector<double> delta_fpr;
  double mean_delta_recall = 0.0;
  double mean_delta_fpr = 0.0;
  // Trials with empirical admissibility on the scores above the baseline
  // threshold whose recall nevertheless dropped.
  std::size_t monotonicity_violations = 0;
};

struct SweepResult {
  ExperimentConfig config;
  std::vector<std::uint64_t> trial_seeds;
  std::vector<bool> admissible;       // F0 >= Fm on the whole grid
  std::vector<bool> tail_admissible;  // F0 >= Fm above the baseline tau
  std::vector<SweepRow> rows;         // first row is xi = 0
};

// Basic-variant thresholds fitted with alpha' = alpha + xi on shared trial
// scores (paired). Throws InvalidArgument if any alpha + xi > 1.
SweepResult AlphaSweep(const ExperimentConfig& cfg,
                       std::span<const double> xis,
                       const DetectorFactory* factory = nullptr);

std::string SweepCsv(const SweepResult& result);
std::string SweepTrialsCsv(const SweepResult& result);

}  // namespace ocd

#endif  // OCD_HARNESS_H_
