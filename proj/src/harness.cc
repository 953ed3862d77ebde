#include "ocd/harness.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "ocd/io.h"
#include "ocd/pac_bounds.h"
#include "ocd/parallel.h"
#include "ocd/random.h"
#include "ocd/status.h"

namespace ocd {
namespace {

// Substream indices within a trial.
enum TrialStream : std::uint64_t {
  kCleanStream = 1,
  kMixtureStream = 2,
  kEvalNominalStream = 3,
  kEvalAlienStream = 4,
  kDetectorStream = 5,
  kOracleStream = 6,
};

double Mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::optional<double> Ci95HalfWidth(std::span<const double> v) {
  if (v.size() < 2) return std::nullopt;
  const double mean = Mean(v);
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
}

std::string Opt(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : "NA";
}

std::string OptInt(const std::optional<std::int64_t>& v) {
  return v ? fmt::format("{}", *v) : "NA";
}

std::string OptTau(const std::optional<double>& tau) {
  return tau ? FormatDouble(*tau) : "FLAG_ALL";
}

void CheckUnit(double v, const char* name, bool allow_zero) {
  const bool ok = allow_zero ? (v >= 0.0 && v <= 1.0) : (v > 0.0 && v <= 1.0);
  if (!ok) {
    throw InvalidArgumentError(fmt::format("{} must lie in {}0, 1], got {}",
                                           name, allow_zero ? "[" : "(", v));
  }
}

void CheckQDelta(double q, double delta) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidArgumentError(fmt::format("q must lie in (0, 1), got {}", q));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidArgumentError(
        fmt::format("delta must lie in (0, 1), got {}", delta));
  }
}

DetectionThreshold FitOnScores(std::span<const double> clean,
                               std::span<const double> mixture,
                               double fit_alpha, double q,
                               ThresholdVariant variant) {
  if (fit_alpha == 0.0) {
    DetectionThreshold flag_all;
    flag_all.q = q;
    flag_all.variant = variant;
    flag_all.alpha = 0.0;
    return flag_all;
  }
  return FitThreshold(
             ScoreSample({clean.begin(), clean.end()}, ScoreSource::kClean),
             ScoreSample({mixture.begin(), mixture.end()},
                         ScoreSource::kMixture),
             fit_alpha, q, variant)
      .threshold;
}

std::vector<TrialMetrics> MetricsForVariant(
    std::span<const TrialOutcome> trials, ThresholdVariant variant) {
  std::vector<TrialMetrics> out;
  for (const auto& t : trials) {
    for (const auto& m : t.metrics) {
      if (m.variant == variant) out.push_back(m);
    }
  }
  return out;
}

}  // namespace

std::string_view VariantSelectionName(VariantSelection selection) {
  switch (selection) {
    case VariantSelection::kBasic:
      return "basic";
    case VariantSelection::kIso:
      return "iso";
    case VariantSelection::kBoth:
      return "both";
  }
  return "basic";
}

VariantSelection ParseVariantSelection(std::string_view name) {
  if (name == "basic") return VariantSelection::kBasic;
  if (name == "iso") return VariantSelection::kIso;
  if (name == "both") return VariantSelection::kBoth;
  throw InvalidArgumentError(fmt::format("unknown variant '{}'", name));
}

std::vector<ThresholdVariant> ExpandVariants(VariantSelection selection) {
  switch (selection) {
    case VariantSelection::kBasic:
      return {ThresholdVariant::kBasic};
    case VariantSelection::kIso:
      return {ThresholdVariant::kIso};
    case VariantSelection::kBoth:
      return {ThresholdVariant::kBasic, ThresholdVariant::kIso};
  }
  return {};
}

void ExperimentConfig::Validate() const {
  if (n < 1) throw InvalidArgumentError("n must be >= 1");
  CheckUnit(alpha, "alpha", /*allow_zero=*/true);
  if (alpha_prime) {
    CheckUnit(*alpha_prime, "alpha_prime", /*allow_zero=*/false);
    if (*alpha_prime < alpha) {
      throw InvalidArgumentError(fmt::format(
          "alpha_prime ({}) must be >= alpha ({})", *alpha_prime, alpha));
    }
  }
  CheckQDelta(q, delta);
  if (repetitions < 1) throw InvalidArgumentError("repetitions must be >= 1");
  if (eval_size < 1) throw InvalidArgumentError("eval_size must be >= 1");
  if (detector.kind == DetectorKind::kExternal) {
    throw InvalidArgumentError(
        "synthetic experiments need a feature-space detector (iforest or loda)");
  }
  synth.Validate();
}

std::uint64_t TrialSeed(std::uint64_t experiment_seed, std::size_t index) {
  return DeriveSeed(experiment_seed, index);
}

TrialScores GenerateTrialScores(const ExperimentConfig& cfg,
                                std::uint64_t trial_seed,
                                const DetectorFactory* factory) {
  const PointSet clean =
      GenerateNominal(cfg.n, cfg.synth, DeriveSeed(trial_seed, kCleanStream));
  const LabeledPointSet mixture =
      GenerateMixture(cfg.n, cfg.alpha, cfg.mixture_mode, cfg.synth,
                      DeriveSeed(trial_seed, kMixtureStream));
  const PointSet eval_nominal = GenerateNominal(
      cfg.eval_size, cfg.synth, DeriveSeed(trial_seed, kEvalNominalStream));
  const PointSet eval_alien = GenerateAlien(
      cfg.eval_size, cfg.synth, DeriveSeed(trial_seed, kEvalAlienStream));

  std::unique_ptr<Detector> detector =
      factory ? (*factory)() : MakeDetector(cfg.detector);
  TrialScores scores;
  scores.clean = detector->Fit(clean, DeriveSeed(trial_seed, kDetectorStream));
  scores.mixture = detector->Score(mixture.unlabeled());
  scores.eval_nominal = detector->Score(eval_nominal);
  scores.eval_alien = detector->Score(eval_alien);
  if (cfg.oracle) {
    const std::size_t pool = std::max(cfg.oracle_size, cfg.eval_size);
    scores.oracle_alien = detector->Score(
        GenerateAlien(pool, cfg.synth, DeriveSeed(trial_seed, kOracleStream)));
  }
  return scores;
}

TrialMetrics EvaluateTrial(const TrialScores& scores, double fit_alpha,
                           double q, ThresholdVariant variant) {
  const DetectionThreshold threshold =
      FitOnScores(scores.clean, scores.mixture, fit_alpha, q, variant);
  TrialMetrics m;
  m.variant = variant;
  m.tau = threshold.tau;
  m.recall = AlarmRate(scores.eval_alien, threshold);
  m.fpr = AlarmRate(scores.eval_nominal, threshold);
  if (!scores.oracle_alien.empty()) {
    // The oracle threshold is the q-quantile of the pure alien scores, under
    // the same step-function convention as the fitted threshold.
    const EmpiricalCdf alien_cdf(ScoreSample(
        {scores.oracle_alien.begin(), scores.oracle_alien.end()}));
    const DetectionThreshold oracle = SelectThreshold(
        EstimateAlienCdf(alien_cdf, alien_cdf, 1.0), q,
        ThresholdVariant::kBasic);
    m.oracle_tau = oracle.tau;
    m.oracle_fpr = AlarmRate(scores.eval_nominal, oracle);
  }
  return m;
}

TrialOutcome RunSyntheticTrial(const ExperimentConfig& cfg,
                               std::uint64_t trial_seed,
                               const DetectorFactory* factory) {
  cfg.Validate();
  const TrialScores scores = GenerateTrialScores(cfg, trial_seed, factory);
  TrialOutcome outcome;
  outcome.trial_seed = trial_seed;
  for (const ThresholdVariant v : ExpandVariants(cfg.variant)) {
    TrialMetrics m = EvaluateTrial(scores, cfg.FitAlpha(), cfg.q, v);
    m.trial_seed = trial_seed;
    outcome.metrics.push_back(m);
  }
  return outcome;
}

double EmpiricalEta(std::span<const double> recalls, double delta) {
  if (recalls.empty()) throw InvalidArgumentError("no recalls");
  std::vector<double> sorted(recalls.begin(), recalls.end());
  std::sort(sorted.begin(), sorted.end());
  const double r = static_cast<double>(sorted.size());
  auto k = static_cast<std::size_t>(std::floor(delta * r + 1e-9)) + 1;
  k = std::min(k, sorted.size());
  return 1.0 - sorted[k - 1];
}

LoosenessResult AnalyzeLooseness(std::span<const double> recalls, double q,
                                 double delta, double fit_alpha) {
  LoosenessResult result;
  result.empirical_eta = EmpiricalEta(recalls, delta);
  const double epsilon = result.empirical_eta - q;
  if (epsilon <= 0.0) {
    result.status = "guarantee already met; epsilon undefined";
    return result;
  }
  if (epsilon >= 1.0 - q) {
    result.status = "epsilon outside (0, 1-q); invalid";
    return result;
  }
  result.epsilon = epsilon;
  if (!(fit_alpha > 0.0)) {
    result.status = "alpha is 0; bound undefined";
    return result;
  }
  PacParams params;
  params.alpha = fit_alpha;
  params.q = q;
  params.epsilon = epsilon;
  params.delta = delta;
  result.n_star = RequiredSampleSize(params);
  return result;
}

double NearestRankQuantile(std::span<const double> values, double p) {
  if (values.empty()) throw InvalidArgumentError("no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  auto rank = static_cast<std::size_t>(
      std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

AggregateMetrics Aggregate(std::span<const TrialMetrics> trials, double q,
                           double delta, double fit_alpha) {
  if (trials.empty()) throw InvalidArgumentError("no trials to aggregate");
  AggregateMetrics agg;
  agg.variant = trials.front().variant;
  agg.trials = trials.size();
  std::vector<double> recalls;
  std::vector<double> fprs;
  std::vector<double> oracle_fprs;
  for (const auto& t : trials) {
    recalls.push_back(t.recall);
    fprs.push_back(t.fpr);
    if (t.oracle_fpr) oracle_fprs.push_back(*t.oracle_fpr);
  }
  agg.mean_recall = Mean(recalls);
  agg.recall_ci95 = Ci95HalfWidth(recalls);
  agg.mean_fpr = Mean(fprs);
  agg.fpr_ci95 = Ci95HalfWidth(fprs);
  agg.fpr_q25 = NearestRankQuantile(fprs, 0.25);
  agg.fpr_median = NearestRankQuantile(fprs, 0.5);
  agg.fpr_q75 = NearestRankQuantile(fprs, 0.75);
  if (oracle_fprs.size() == trials.size()) {
    agg.oracle_fpr_mean = Mean(oracle_fprs);
    agg.oracle_fpr_median = NearestRankQuantile(oracle_fprs, 0.5);
  }
  agg.looseness = AnalyzeLooseness(recalls, q, delta, fit_alpha);
  return agg;
}

ExperimentResult RunExperiment(const ExperimentConfig& cfg,
                               const DetectorFactory* factory) {
  cfg.Validate();
  ExperimentResult result;
  result.config = cfg;
  result.trials.resize(static_cast<std::size_t>(cfg.repetitions));
  ParallelFor(result.trials.size(), [&](std::size_t r) {
    result.trials[r] = RunSyntheticTrial(cfg, TrialSeed(cfg.seed, r), factory);
  });
  for (const ThresholdVariant v : ExpandVariants(cfg.variant)) {
    const auto metrics = MetricsForVariant(result.trials, v);
    result.summary.push_back(
        Aggregate(metrics, cfg.q, cfg.delta, cfg.FitAlpha()));
  }
  return result;
}

std::string TrialsCsv(std::span<const ExperimentResult> results) {
  std::string out =
      "alpha,alpha_prime,n,trial,seed,variant,tau,recall,fpr,oracle_tau,"
      "oracle_fpr\n";
  for (const auto& res : results) {
    const auto& c = res.config;
    for (std::size_t r = 0; r < res.trials.size(); ++r) {
      for (const auto& m : res.trials[r].metrics) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n",
                           FormatDouble(c.alpha), Opt(c.alpha_prime), c.n, r,
                           m.trial_seed, VariantName(m.variant), OptTau(m.tau),
                           FormatDouble(m.recall), FormatDouble(m.fpr),
                           m.oracle_fpr ? OptTau(m.oracle_tau) : "NA",
                           Opt(m.oracle_fpr));
      }
    }
  }
  return out;
}

std::string SummaryCsv(std::span<const ExperimentResult> results) {
  std::string out =
      "detector,mixture_mode,alpha,alpha_prime,n,q,delta,variant,trials,"
      "recall_mean,recall_ci95,fpr_mean,fpr_ci95,fpr_q25,fpr_median,fpr_q75,"
      "oracle_fpr_mean,oracle_fpr_median,empirical_eta,epsilon,n_star,"
      "looseness_status\n";
  for (const auto& res : results) {
    const auto& c = res.config;
    for (const auto& a : res.summary) {
      out += fmt::format(
          "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
          DetectorName(c.detector.kind), MixtureModeName(c.mixture_mode),
          FormatDouble(c.alpha), Opt(c.alpha_prime), c.n, FormatDouble(c.q),
          FormatDouble(c.delta), VariantName(a.variant), a.trials,
          FormatDouble(a.mean_recall), Opt(a.recall_ci95),
          FormatDouble(a.mean_fpr), Opt(a.fpr_ci95), FormatDouble(a.fpr_q25),
          FormatDouble(a.fpr_median), FormatDouble(a.fpr_q75),
          Opt(a.oracle_fpr_mean), Opt(a.oracle_fpr_median),
          FormatDouble(a.looseness.empirical_eta), Opt(a.looseness.epsilon),
          OptInt(a.looseness.n_star), a.looseness.status);
    }
  }
  return out;
}

std::string RecallPlotCsv(std::span<const ExperimentResult> results) {
  std::string out = "alpha,n,variant,recall_mean,recall_ci95,target_recall\n";
  for (const auto& res : results) {
    for (const auto& a : res.summary) {
      out += fmt::format("{},{},{},{},{},{}\n", FormatDouble(res.config.alpha),
                         res.config.n, VariantName(a.variant),
                         FormatDouble(a.mean_recall), Opt(a.recall_ci95),
                         FormatDouble(1.0 - res.config.q));
    }
  }
  return out;
}

std::string FprPlotCsv(std::span<const ExperimentResult> results) {
  std::string out =
      "alpha,n,variant,fpr_q25,fpr_median,fpr_q75,oracle_fpr_median\n";
  for (const auto& res : results) {
    for (const auto& a : res.summary) {
      out += fmt::format("{},{},{},{},{},{},{}\n",
                         FormatDouble(res.config.alpha), res.config.n,
                         VariantName(a.variant), FormatDouble(a.fpr_q25),
                         FormatDouble(a.fpr_median), FormatDouble(a.fpr_q75),
                         Opt(a.oracle_fpr_median));
    }
  }
  return out;
}

std::string LoosenessPlotCsv(std::span<const ExperimentResult> results) {
  std::string out = "alpha,n,variant,empirical_eta,epsilon,n_star,status\n";
  for (const auto& res : results) {
    for (const auto& a : res.summary) {
      out += fmt::format("{},{},{},{},{},{},{}\n",
                         FormatDouble(res.config.alpha), res.config.n,
                         VariantName(a.variant),
                         FormatDouble(a.looseness.empirical_eta),
                         Opt(a.looseness.epsilon), OptInt(a.looseness.n_star),
                         a.looseness.status);
    }
  }
  return out;
}

// ---- Cross-validated benchmark ----

void CvConfig::Validate() const {
  CheckUnit(alpha, "alpha", /*allow_zero=*/true);
  if (alpha_prime) {
    CheckUnit(*alpha_prime, "alpha_prime", /*allow_zero=*/false);
    if (*alpha_prime < alpha) {
      throw InvalidArgumentError("alpha_prime must be >= alpha");
    }
  }
  CheckQDelta(q, delta);
  if (folds < 2) {
    throw ConfigError(fmt::format("folds must be >= 2, got {}", folds));
  }
  if (repetitions < 1) throw InvalidArgumentError("repetitions must be >= 1");
}

std::vector<FoldMetrics> CrossValidateScores(const CvScoreData& data,
                                             const CvConfig& cfg,
                                             int repetition,
                                             std::uint64_t fold_seed) {
  cfg.Validate();
  const std::size_t m = data.mixture.size();
  if (data.mixture_labels.size() != m) {
    throw InvalidArgumentError("mixture scores and labels differ in length");
  }
  if (data.clean.empty()) throw InvalidArgumentError("no clean scores");
  if (static_cast<std::size_t>(cfg.folds) >= m) {
    throw ConfigError(fmt::format(
        "folds ({}) must be smaller than the mixture size ({})", cfg.folds, m));
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(fold_seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold_of(m);
  for (std::size_t i = 0; i < m; ++i) {
    fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(cfg.folds));
  }

  std::vector<FoldMetrics> out;
  for (int f = 0; f < cfg.folds; ++f) {
    std::vector<double> train;
    std::vector<double> held_alien;
    std::vector<double> held_nominal;
    for (std::size_t i = 0; i < m; ++i) {
      if (fold_of[i] != f) {
        train.push_back(data.mixture[i]);
      } else if (data.mixture_labels[i] == Label::kAlien) {
        held_alien.push_back(data.mixture[i]);
      } else {
        held_nominal.push_back(data.mixture[i]);
      }
    }
    for (const ThresholdVariant v : ExpandVariants(cfg.variant)) {
      const DetectionThreshold threshold =
          FitOnScores(data.clean, train, cfg.FitAlpha(), cfg.q, v);
      FoldMetrics fm;
      fm.repetition = repetition;
      fm.fold = f;
      fm.variant = v;
      fm.tau = threshold.tau;
      fm.held_out_aliens = held_alien.size();
      fm.held_out_nominals = held_nominal.size();
      if (!held_alien.empty()) fm.recall = AlarmRate(held_alien, threshold);
      if (!held_nominal.empty()) fm.fpr = AlarmRate(held_nominal, threshold);
      out.push_back(fm);
    }
  }
  return out;
}

namespace {

void FinishCv(CvResult& result) {
  const CvConfig& cfg = result.config;
  for (const ThresholdVariant v : ExpandVariants(cfg.variant)) {
    std::vector<TrialMetrics> reps;
    for (int r = 0; r < cfg.repetitions; ++r) {
      std::vector<double> recalls;
      std::vector<double> fprs;
      for (const auto& f : result.folds) {
        if (f.repetition != r || f.variant != v) continue;
        if (f.recall) recalls.push_back(*f.recall);
        if (f.fpr) fprs.push_back(*f.fpr);
      }
      if (recalls.empty()) continue;
      TrialMetrics m;
      m.trial_seed = TrialSeed(cfg.seed, static_cast<std::size_t>(r));
      m.variant = v;
      m.recall = Mean(recalls);
      m.fpr = Mean(fprs);
      reps.push_back(m);
    }
    if (reps.empty()) {
      throw InvalidArgumentError("every fold lacks aliens; recall undefined");
    }
    result.summary.push_back(Aggregate(reps, cfg.q, cfg.delta, cfg.FitAlpha()));
    result.repetitions.insert(result.repetitions.end(), reps.begin(),
                              reps.end());
  }
  const auto variants = ExpandVariants(cfg.variant).size();
  result.excluded_folds =
      static_cast<std::size_t>(std::count_if(
          result.folds.begin(), result.folds.end(),
          [](const FoldMetrics& f) { return !f.recall; })) /
      variants;
}

// Largest n with 2n - round(alpha n) <= nominal_pool and
// round(alpha n) <= alien_pool.
std::size_t LargestFeasibleN(std::size_t nominal_pool, std::size_t alien_pool,
                             double alpha) {
  for (std::size_t n = nominal_pool; n > 0; --n) {
    const auto aliens =
        static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
    if (aliens <= alien_pool && 2 * n - aliens <= nominal_pool) return n;
  }
  return 0;
}

}  // namespace

CvResult RunCvBenchmark(const CvPointData& data, const CvConfig& cfg,
                        const DetectorFactory* factory) {
  cfg.Validate();
  if (data.classes.size() != data.points.size()) {
    throw InvalidArgumentError("points and class labels differ in length");
  }
  if (data.nominal_classes.empty()) {
    throw ConfigError("no nominal classes configured");
  }
  std::vector<std::size_t> nominal_pool;
  std::vector<std::size_t> alien_pool;
  for (std::size_t i = 0; i < data.classes.size(); ++i) {
    const bool nominal =
        std::find(data.nominal_classes.begin(), data.nominal_classes.end(),
                  data.classes[i]) != data.nominal_classes.end();
    (nominal ? nominal_pool : alien_pool).push_back(i);
  }
  const std::size_t n =
      cfg.n > 0 ? cfg.n
                : LargestFeasibleN(nominal_pool.size(), alien_pool.size(),
                                   cfg.alpha);
  const auto aliens =
      static_cast<std::size_t>(std::llround(cfg.alpha * static_cast<double>(n)));
  if (n == 0 || aliens > alien_pool.size() ||
      2 * n - aliens > nominal_pool.size()) {
    throw InvalidArgumentError(fmt::format(
        "class pools ({} nominal, {} alien) cannot supply n = {} at alpha = {}",
        nominal_pool.size(), alien_pool.size(), n, cfg.alpha));
  }

  CvResult result;
  result.config = cfg;
  result.n = n;
  std::vector<std::vector<FoldMetrics>> per_rep(
      static_cast<std::size_t>(cfg.repetitions));
  ParallelFor(per_rep.size(), [&](std::size_t r) {
    const std::uint64_t rep_seed = TrialSeed(cfg.seed, r);
    Rng rng = MakeRng(rep_seed, 0);
    std::vector<std::size_t> nominal = nominal_pool;
    std::vector<std::size_t> alien = alien_pool;
    std::shuffle(nominal.begin(), nominal.end(), rng);
    std::shuffle(alien.begin(), alien.end(), rng);
    const std::vector<std::size_t> clean_rows(nominal.begin(),
                                              nominal.begin() + n);
    std::vector<std::size_t> mixture_rows(nominal.begin() + n,
                                          nominal.begin() + (2 * n - aliens));
    std::vector<Label> labels(mixture_rows.size(), Label::kNominal);
    mixture_rows.insert(mixture_rows.end(), alien.begin(),
                        alien.begin() + aliens);
    labels.resize(mixture_rows.size(), Label::kAlien);

    std::unique_ptr<Detector> detector =
        factory ? (*factory)() : MakeDetector(cfg.detector);
    CvScoreData scores;
    scores.clean = detector->Fit(data.points.Subset(clean_rows),
                                 DeriveSeed(rep_seed, 1));
    scores.mixture = detector->Score(data.points.Subset(mixture_rows));
    scores.mixture_labels = std::move(labels);
    per_rep[r] = CrossValidateScores(scores, cfg, static_cast<int>(r),
                                     DeriveSeed(rep_seed, 2));
  });
  for (auto& folds : per_rep) {
    result.folds.insert(result.folds.end(), folds.begin(), folds.end());
  }
  FinishCv(result);
  return result;
}

CvResult RunCvBenchmark(const CvScoreData& data, const CvConfig& cfg) {
  cfg.Validate();
  CvResult result;
  result.config = cfg;
  result.n = data.mixture.size();
  for (int r = 0; r < cfg.repetitions; ++r) {
    const std::uint64_t rep_seed =
        TrialSeed(cfg.seed, static_cast<std::size_t>(r));
    auto folds = CrossValidateScores(data, cfg, r, DeriveSeed(rep_seed, 2));
    result.folds.insert(result.folds.end(), folds.begin(), folds.end());
  }
  FinishCv(result);
  return result;
}

std::string CvFoldsCsv(std::span<const CvResult> results) {
  std::string out =
      "alpha,alpha_prime,n,repetition,fold,variant,tau,held_out_aliens,"
      "held_out_nominals,recall,fpr\n";
  for (const auto& res : results) {
    for (const auto& f : res.folds) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n",
                         FormatDouble(res.config.alpha),
                         Opt(res.config.alpha_prime), res.n, f.repetition,
                         f.fold, VariantName(f.variant), OptTau(f.tau),
                         f.held_out_aliens, f.held_out_nominals, Opt(f.recall),
                         Opt(f.fpr));
    }
  }
  return out;
}

std::string CvSummaryCsv(std::span<const CvResult> results) {
  std::string out =
      "detector,alpha,alpha_prime,n,q,delta,folds,variant,repetitions,"
      "excluded_folds,recall_mean,recall_ci95,fpr_mean,fpr_ci95,fpr_q25,"
      "fpr_median,fpr_q75,empirical_eta,epsilon,n_star,looseness_status\n";
  for (const auto& res : results) {
    const auto& c = res.config;
    for (const auto& a : res.summary) {
      out += fmt::format(
          "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
          DetectorName(c.detector.kind), FormatDouble(c.alpha),
          Opt(c.alpha_prime), res.n, FormatDouble(c.q), FormatDouble(c.delta),
          c.folds, VariantName(a.variant), a.trials, res.excluded_folds,
          FormatDouble(a.mean_recall), Opt(a.recall_ci95),
          FormatDouble(a.mean_fpr), Opt(a.fpr_ci95), FormatDouble(a.fpr_q25),
          FormatDouble(a.fpr_median), FormatDouble(a.fpr_q75),
          FormatDouble(a.looseness.empirical_eta), Opt(a.looseness.epsilon),
          OptInt(a.looseness.n_star), a.looseness.status);
    }
  }
  return out;
}

// ---- alpha' misspecification sweep ----

SweepResult AlphaSweep(const ExperimentConfig& cfg,
                       std::span<const double> xis,
                       const DetectorFactory* factory) {
  cfg.Validate();
  if (!(cfg.alpha > 0.0)) {
    throw InvalidArgumentError("the sweep baseline needs alpha > 0");
  }
  std::vector<double> all_xis = {0.0};
  for (const double xi : xis) {
    if (!(xi >= 0.0) || cfg.alpha + xi > 1.0) {
      throw InvalidArgumentError(fmt::format(
          "xi = {} gives alpha' = {} outside [alpha, 1]", xi, cfg.alpha + xi));
    }
    if (xi != 0.0) all_xis.push_back(xi);
  }
  const std::size_t trials = static_cast<std::size_t>(cfg.repetitions);

  SweepResult result;
  result.config = cfg;
  result.trial_seeds.resize(trials);
  result.admissible.resize(trials);
  result.tail_admissible.resize(trials);
  // [trial][xi index]
  std::vector<std::vector<TrialMetrics>> metrics(trials);
  std::vector<char> admissible(trials);
  std::vector<char> tail_admissible(trials);
  ParallelFor(trials, [&](std::size_t t) {
    const std::uint64_t seed = TrialSeed(cfg.seed, t);
    result.trial_seeds[t] = seed;
    const TrialScores scores = GenerateTrialScores(cfg, seed, factory);
    for (const double xi : all_xis) {
      TrialMetrics m =
          EvaluateTrial(scores, cfg.alpha + xi, cfg.q, ThresholdVariant::kBasic);
      m.trial_seed = seed;
      metrics[t].push_back(m);
    }
    const EmpiricalCdf f0(ScoreSample(scores.clean));
    const EmpiricalCdf fm(ScoreSample(scores.mixture));
    admissible[t] = CheckAdmissibility(f0, fm).admissible;
    tail_admissible[t] =
        CheckAdmissibilityAbove(f0, fm, metrics[t].front().tau).admissible;
  });
  for (std::size_t t = 0; t < trials; ++t) {
    result.admissible[t] = admissible[t] != 0;
    result.tail_admissible[t] = tail_admissible[t] != 0;
  }

  for (std::size_t k = 0; k < all_xis.size(); ++k) {
    SweepRow row;
    row.xi = all_xis[k];
    row.alpha_prime = cfg.alpha + all_xis[k];
    for (std::size_t t = 0; t < trials; ++t) {
      const double dr = metrics[t][k].recall - metrics[t][0].recall;
      const double df = metrics[t][k].fpr - metrics[t][0].fpr;
      row.delta_recall.push_back(dr);
      row.delta_fpr.push_back(df);
      if (result.tail_admissible[t] && dr < 0.0) ++row.monotonicity_violations;
    }
    row.mean_delta_recall = Mean(row.delta_recall);
    row.mean_delta_fpr = Mean(row.delta_fpr);
    result.rows.push_back(std::move(row));
  }
  return result;
}

std::string SweepCsv(const SweepResult& result) {
  std::string out =
      "alpha,xi,alpha_prime,trials,mean_delta_recall,mean_delta_fpr,"
      "monotonicity_violations\n";
  for (const auto& row : result.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n",
                       FormatDouble(result.config.alpha), FormatDouble(row.xi),
                       FormatDouble(row.alpha_prime), row.delta_recall.size(),
                       FormatDouble(row.mean_delta_recall),
                       FormatDouble(row.mean_delta_fpr),
                       row.monotonicity_violations);
  }
  return out;
}

std::string SweepTrialsCsv(const SweepResult& result) {
  std::string out =
      "trial,seed,admissible,tail_admissible,xi,delta_recall,delta_fpr\n";
  for (std::size_t t = 0; t < result.trial_seeds.size(); ++t) {
    for (const auto& row : result.rows) {
      out += fmt::format("{},{},{},{},{},{},{}\n", t, result.trial_seeds[t],
                         result.admissible[t] ? 1 : 0,
                         result.tail_admissible[t] ? 1 : 0,
                         FormatDouble(row.xi),
                         FormatDouble(row.delta_recall[t]),
                         FormatDouble(row.delta_fpr[t]));
    }
  }
  return out;
}

}  // namespace ocd
