#include "ocd/cli.h"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "ocd/cdf_mixture.h"
#include "ocd/config.h"
#include "ocd/harness.h"
#include "ocd/iforest.h"
#include "ocd/io.h"
#include "ocd/loda.h"
#include "ocd/pac_bounds.h"
#include "ocd/parallel.h"
#include "ocd/status.h"
#include "ocd/synthdata.h"

namespace ocd {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kThresholdFormat[] = "ocd.threshold";
constexpr int kThresholdVersion = 1;

// FNV-1a over the raw bytes of the given files.
std::string FingerprintFiles(const std::vector<fs::path>& paths) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& p : paths) {
    std::ifstream in(p, std::ios::binary);
    char c;
    while (in.get(c)) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    h ^= 0xff;  // file separator
    h *= 0x100000001b3ULL;
  }
  return fmt::format("fnv1a64:{:016x}", h);
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(fmt::format("'{}' is not valid JSON: {}", path.string(),
                              e.what()));
  }
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError(fmt::format("cannot create output directory '{}'",
                              dir.string()));
  }
}

void WriteRunMetadata(const fs::path& dir, const std::string& subcommand) {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(
                        now.time_since_epoch())
                        .count();
  const json meta = {{"subcommand", subcommand},
                     {"finished_unix_seconds", secs},
                     {"ci95_rule", "normal approximation, 1.96 sd/sqrt(R)"},
                     {"quartile_rule", "nearest rank"}};
  WriteFileAtomically(dir / "run_meta.json", meta.dump(2) + "\n");
}

// ---- threshold documents ----

json ThresholdToJson(const DetectionThreshold& t, std::size_t clean_size,
                     std::size_t mixture_size, const std::string& provenance) {
  return {{"format", kThresholdFormat},
          {"version", kThresholdVersion},
          {"tau", t.tau ? json(*t.tau) : json(nullptr)},
          {"flag_all", t.flags_all()},
          {"q", t.q},
          {"variant", std::string(VariantName(t.variant))},
          {"alpha", t.alpha},
          {"clean_size", clean_size},
          {"mixture_size", mixture_size},
          {"inputs", provenance}};
}

DetectionThreshold ThresholdFromJson(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kThresholdFormat ||
        j.at("version").get<int>() != kThresholdVersion) {
      throw IoError("not a threshold document (format/version mismatch)");
    }
    DetectionThreshold t;
    if (!j.at("flag_all").get<bool>()) t.tau = j.at("tau").get<double>();
    t.q = j.at("q").get<double>();
    t.variant = ParseVariant(j.at("variant").get<std::string>());
    t.alpha = j.at("alpha").get<double>();
    return t;
  } catch (const json::exception& e) {
    throw IoError(fmt::format("malformed threshold document: {}", e.what()));
  }
}

// ---- models ----

using Model = std::variant<IsolationForest, Loda>;

Model LoadModel(const fs::path& path) {
  const json j = ReadJsonFile(path);
  const std::string format = j.value("format", "");
  if (format == "ocd.isolation_forest") return IsolationForest::FromJson(j);
  if (format == "ocd.loda") return Loda::FromJson(j);
  throw IoError(fmt::format("'{}' is not a model file", path.string()));
}

std::vector<double> ScoreWithModel(const Model& model, const PointSet& points) {
  return std::visit([&](const auto& m) { return m.Score(points); }, model);
}

// ---- subcommands ----

struct BoundsArgs {
  std::optional<double> alpha;
  std::optional<double> alpha_prime;
  std::optional<double> epsilon;
  double delta = 0.05;
  double q = 0.05;
  std::optional<double> n;
  std::optional<double> lambda;
};

int RunBounds(const BoundsArgs& a, std::ostream& out) {
  if (!a.epsilon && !a.n && !a.lambda) {
    throw ConfigError("bounds needs --epsilon, --n or --lambda");
  }
  if ((a.epsilon || a.n) && !a.alpha) {
    throw ConfigError("--alpha is required with --epsilon or --n");
  }
  std::vector<std::string> csv = {"quantity,alpha,epsilon,delta,q,n,lambda,value"};
  if (a.epsilon) {
    PacParams p;
    p.alpha = *a.alpha;
    p.alpha_prime = a.alpha_prime;
    p.q = a.q;
    p.epsilon = *a.epsilon;
    p.delta = a.delta;
    const std::int64_t n = RequiredSampleSize(p);
    fmt::print(out,
               "required sample size: n = {} (alpha = {}, epsilon = {}, "
               "delta = {}, q = {}, eta = {})\n",
               n, p.alpha, p.epsilon, p.delta, p.q, FormatDouble(p.eta()));
    csv.push_back(fmt::format("required_n,{},{},{},{},,,{}", p.alpha,
                              p.epsilon, p.delta, p.q, n));
    if (a.alpha_prime) {
      const std::int64_t n_prime = RequiredSampleSize(p, true);
      fmt::print(out, "required sample size with alpha' = {}: n = {}\n",
                 *a.alpha_prime, n_prime);
      csv.push_back(fmt::format("required_n_alpha_prime,{},{},{},{},,,{}",
                                *a.alpha_prime, p.epsilon, p.delta, p.q,
                                n_prime));
    }
  }
  if (a.n) {
    const double eps = AchievedEpsilon(*a.n, a.delta, *a.alpha);
    fmt::print(out, "achieved epsilon: {} (n = {}, alpha = {}, delta = {})\n",
               FormatDouble(eps), *a.n, *a.alpha, a.delta);
    csv.push_back(fmt::format("achieved_epsilon,{},,{},,{},,{}", *a.alpha,
                              a.delta, *a.n, FormatDouble(eps)));
  }
  if (a.lambda) {
    const MassartBound b = ComputeMassartBound({*a.lambda, 1});
    fmt::print(out, "massart bound: 2exp(-2 lambda^2) = {} (clamped {})\n",
               FormatDouble(b.raw), FormatDouble(b.clamped));
    csv.push_back(fmt::format("massart_raw,,,,,,{},{}", *a.lambda,
                              FormatDouble(b.raw)));
    csv.push_back(fmt::format("massart_clamped,,,,,,{},{}", *a.lambda,
                              FormatDouble(b.clamped)));
  }
  out << "\n";
  for (const auto& line : csv) out << line << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string kind = "mixture";
  std::int64_t n = 1000;
  double alpha = 0.1;
  std::string mode = "exact_count";
  std::optional<std::uint64_t> seed;
  std::string out;
  std::int64_t dim = 9;
  double shift = 3.0;
  bool labels = false;
};

int RunSynth(const SynthArgs& a, std::ostream& out) {
  if (!a.seed) throw ConfigError("synth requires --seed");
  if (a.n < 1) throw InvalidArgumentError("--n must be >= 1");
  SynthConfig config;
  config.dim = static_cast<std::size_t>(a.dim);
  config.shift = a.shift;
  const auto n = static_cast<std::size_t>(a.n);
  std::ostringstream csv;
  if (a.kind == "mixture") {
    const LabeledPointSet mix =
        GenerateMixture(n, a.alpha, ParseMixtureMode(a.mode), config, *a.seed);
    const std::vector<int> labels = mix.LabelInts();
    WritePointTable(csv, mix.unlabeled(), &labels);
  } else if (a.kind == "nominal" || a.kind == "alien") {
    const PointSet points = a.kind == "nominal"
                                ? GenerateNominal(n, config, *a.seed)
                                : GenerateAlien(n, config, *a.seed);
    const std::vector<int> labels(n, a.kind == "alien" ? 1 : 0);
    WritePointTable(csv, points, a.labels ? &labels : nullptr);
  } else {
    throw ConfigError(
        fmt::format("--kind must be nominal, alien or mixture, got '{}'", a.kind));
  }
  WriteFileAtomically(a.out, csv.str());
  fmt::print(out, "wrote {} {} rows to {}\n", n, a.kind, a.out);
  return kExitOk;
}

struct TrainArgs {
  std::string detector = "iforest";
  std::string input;
  std::string label_column = "label";
  std::optional<std::uint64_t> seed;
  std::string out;
  int trees = 1000;
  double fraction = 0.2;
  int projections = 1000;
  std::optional<double> bin_width;
  std::optional<std::string> oob_scores;
};

int RunTrain(const TrainArgs& a, std::ostream& out) {
  if (!a.seed) throw ConfigError("train requires --seed");
  const PointTable table = ReadPointTable(a.input, a.label_column);
  json model;
  std::vector<double> oob;
  switch (ParseDetectorKind(a.detector)) {
    case DetectorKind::kIsolationForest: {
      const auto forest =
          IsolationForest::Train(table.points, {a.trees, a.fraction, *a.seed});
      model = forest.ToJson();
      if (a.oob_scores) oob = forest.ScoreOutOfBag(table.points);
      break;
    }
    case DetectorKind::kLoda: {
      const auto loda =
          Loda::Train(table.points, {a.projections, *a.seed, a.bin_width});
      model = loda.ToJson();
      if (a.oob_scores) oob = loda.ScoreLeaveOut(table.points);
      break;
    }
    case DetectorKind::kExternal:
      throw ConfigError("the external detector cannot be trained");
  }
  WriteFileAtomically(a.out, model.dump() + "\n");
  if (a.oob_scores) {
    std::string text = "score\n";
    for (const double s : oob) text += FormatDouble(s) + "\n";
    WriteFileAtomically(*a.oob_scores, text);
  }
  fmt::print(out, "trained {} on {} rows x {} features; model written to {}\n",
             a.detector, table.points.size(), table.points.dim(), a.out);
  return kExitOk;
}

struct ThresholdArgs {
  std::string clean;
  std::string mixture;
  double alpha = 0.1;
  double q = 0.05;
  std::string variant = "basic";
  std::optional<std::string> out;
  std::optional<std::string> diagnostics;
};

int RunThreshold(const ThresholdArgs& a, std::ostream& out) {
  const auto [clean, mixture] = LoadExternalScores(a.clean, a.mixture);
  const ThresholdVariant variant = ParseVariant(a.variant);
  // Always isotonize so diagnostics can show both forms.
  AlienCdfEstimate est = IsotonizeAndClip(
      EstimateAlienCdf(EmpiricalCdf(clean), EmpiricalCdf(mixture), a.alpha));
  const DetectionThreshold t = SelectThreshold(est, a.q, variant);
  const AdmissibilityReport adm =
      CheckAdmissibility(EmpiricalCdf(clean), EmpiricalCdf(mixture));

  std::size_t outside = 0;
  std::size_t decreases = 0;
  for (std::size_t i = 0; i < est.raw.size(); ++i) {
    if (est.raw[i] < 0.0 || est.raw[i] > 1.0) ++outside;
    if (i > 0 && est.raw[i] < est.raw[i - 1]) ++decreases;
  }
  const auto [lo, hi] = std::minmax_element(est.raw.begin(), est.raw.end());
  fmt::print(out, "τ̂ = {}\n", t.tau ? FormatDouble(*t.tau) : "FLAG_ALL");
  fmt::print(out, "variant = {}, q = {}, alpha = {}\n", VariantName(variant),
             a.q, a.alpha);
  fmt::print(out, "clean scores = {}, mixture scores = {}, grid points = {}\n",
             clean.size(), mixture.size(), est.grid.size());
  fmt::print(out,
             "alien CDF estimate: min {} max {}, {} point(s) outside [0,1], "
             "{} decrease(s)\n",
             FormatDouble(*lo), FormatDouble(*hi), outside, decreases);
  fmt::print(out, "admissible (F0 >= Fm on grid): {} (max violation {})\n",
             adm.admissible ? "yes" : "no", FormatDouble(adm.max_violation));

  if (a.diagnostics) {
    std::string text = "score,raw,legal\n";
    for (std::size_t i = 0; i < est.grid.size(); ++i) {
      text += fmt::format("{},{},{}\n", FormatDouble(est.grid[i]),
                          FormatDouble(est.raw[i]),
                          FormatDouble((*est.legal)[i]));
    }
    WriteFileAtomically(*a.diagnostics, text);
  }
  if (a.out) {
    const json doc = ThresholdToJson(t, clean.size(), mixture.size(),
                                     FingerprintFiles({a.clean, a.mixture}));
    WriteFileAtomically(*a.out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

struct ScoreArgs {
  std::optional<std::string> threshold_file;
  std::optional<std::string> model;
  std::string input;
  std::string label_column = "label";
  std::optional<std::string> out;
};

int RunScore(const ScoreArgs& a, std::ostream& out) {
  if (!a.threshold_file && !a.model) {
    throw ConfigError("score needs --threshold-file, --model, or both");
  }
  std::optional<DetectionThreshold> threshold;
  if (a.threshold_file) threshold = ThresholdFromJson(ReadJsonFile(*a.threshold_file));
  std::vector<double> scores;
  if (a.model) {
    const Model model = LoadModel(*a.model);
    scores = ScoreWithModel(model, ReadPointTable(a.input, a.label_column).points);
  } else {
    scores = ReadScores(a.input);
  }
  std::string text = threshold ? "score,alarm\n" : "score\n";
  std::size_t alarms = 0;
  for (const double s : scores) {
    if (threshold) {
      const bool alarm = threshold->Alarm(s);
      alarms += alarm ? 1 : 0;
      text += fmt::format("{},{}\n", FormatDouble(s), alarm ? 1 : 0);
    } else {
      text += FormatDouble(s) + "\n";
    }
  }
  if (a.out) {
    WriteFileAtomically(*a.out, text);
  } else {
    out << text;
  }
  if (threshold) {
    fmt::print(a.out ? out : std::cerr, "{} of {} scores raise an alarm\n",
               alarms, scores.size());
  }
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;
};

std::uint64_t RequireSeed(const RunArgs& a, const char* subcommand) {
  if (!a.seed) {
    throw ConfigError(fmt::format("{} requires --seed", subcommand));
  }
  return *a.seed;
}

void ApplyThreads(std::size_t plan_threads, const RunArgs& a) {
  ParallelismSetting() = a.threads.value_or(plan_threads);
}

int RunExperimentCommand(const RunArgs& a, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(a, "experiment");
  KeyValueConfig kv = KeyValueConfig::Load(a.config);
  const ExperimentPlan plan = ParseExperimentPlan(kv, seed);
  ApplyThreads(plan.threads, a);
  const fs::path dir = a.out;
  EnsureDirectory(dir);
  WriteFileAtomically(dir / "config.resolved", ResolvedConfigText(plan));

  std::vector<ExperimentResult> results;
  for (const ExperimentConfig& cfg : plan.Expand()) {
    results.push_back(RunExperiment(cfg));
    for (const auto& s : results.back().summary) {
      fmt::print(out,
                 "alpha={} n={} {}: recall {:.3f}+-{} fpr {:.3f}+-{} "
                 "eta {:.3f} n*={}\n",
                 cfg.alpha, cfg.n, VariantName(s.variant), s.mean_recall,
                 s.recall_ci95 ? fmt::format("{:.3f}", *s.recall_ci95) : "NA",
                 s.mean_fpr,
                 s.fpr_ci95 ? fmt::format("{:.3f}", *s.fpr_ci95) : "NA",
                 s.looseness.empirical_eta,
                 s.looseness.n_star ? fmt::format("{}", *s.looseness.n_star)
                                    : s.looseness.status);
    }
  }
  WriteFileAtomically(dir / "trials.csv", TrialsCsv(results));
  WriteFileAtomically(dir / "summary.csv", SummaryCsv(results));
  WriteFileAtomically(dir / "fig1_recall.csv", RecallPlotCsv(results));
  WriteFileAtomically(dir / "fig2_fpr.csv", FprPlotCsv(results));
  WriteFileAtomically(dir / "fig3_nstar.csv", LoosenessPlotCsv(results));
  WriteRunMetadata(dir, "experiment");
  fmt::print(out, "results written to {}\n", dir.string());
  return kExitOk;
}

std::string CvAlphaPlotCsv(std::span<const CvResult> results) {
  std::string text =
      "alpha,n,variant,recall_mean,recall_ci95,fpr_mean,fpr_ci95\n";
  for (const auto& r : results) {
    for (const auto& s : r.summary) {
      text += fmt::format(
          "{},{},{},{},{},{},{}\n", FormatDouble(r.config.alpha), r.n,
          VariantName(s.variant), FormatDouble(s.mean_recall),
          s.recall_ci95 ? FormatDouble(*s.recall_ci95) : "NA",
          FormatDouble(s.mean_fpr),
          s.fpr_ci95 ? FormatDouble(*s.fpr_ci95) : "NA");
    }
  }
  return text;
}

int RunCvCommand(const RunArgs& a, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(a, "cv");
  KeyValueConfig kv = KeyValueConfig::Load(a.config);
  const CvPlan plan = ParseCvPlan(kv, seed);
  ApplyThreads(plan.threads, a);
  const fs::path dir = a.out;
  EnsureDirectory(dir);
  WriteFileAtomically(dir / "config.resolved", ResolvedConfigText(plan));

  std::optional<CvPointData> points;
  std::optional<CvScoreData> scores;
  if (plan.data) {
    PointTable table = ReadPointTable(*plan.data, plan.label_column);
    if (!table.labels) {
      throw IoError(fmt::format("'{}' has no '{}' column",
                                plan.data->string(), plan.label_column));
    }
    points = CvPointData{std::move(table.points), std::move(*table.labels),
                         plan.nominal_classes};
  } else {
    ScoreTable mix = ReadScoreTable(*plan.mixture_scores);
    if (!mix.labels) {
      throw IoError(fmt::format("'{}' needs a label column for evaluation",
                                plan.mixture_scores->string()));
    }
    CvScoreData data;
    data.clean = ReadScores(*plan.clean_scores);
    data.mixture = std::move(mix.scores);
    for (const int l : *mix.labels) {
      data.mixture_labels.push_back(l ? Label::kAlien : Label::kNominal);
    }
    scores = std::move(data);
  }

  std::vector<CvResult> results;
  for (const CvConfig& cfg : plan.Expand()) {
    results.push_back(points ? RunCvBenchmark(*points, cfg)
                             : RunCvBenchmark(*scores, cfg));
    for (const auto& s : results.back().summary) {
      fmt::print(out,
                 "alpha={} n={} {}: recall {:.3f} fpr {:.3f} "
                 "(excluded folds: {})\n",
                 cfg.alpha, results.back().n, VariantName(s.variant),
                 s.mean_recall, s.mean_fpr, results.back().excluded_folds);
    }
  }
  WriteFileAtomically(dir / "folds.csv", CvFoldsCsv(results));
  WriteFileAtomically(dir / "summary.csv", CvSummaryCsv(results));
  WriteFileAtomically(dir / "fig4_5_alpha.csv", CvAlphaPlotCsv(results));
  WriteRunMetadata(dir, "cv");
  fmt::print(out, "results written to {}\n", dir.string());
  return kExitOk;
}

int RunSweepCommand(const RunArgs& a, std::ostream& out) {
  const std::uint64_t seed = RequireSeed(a, "sweep");
  KeyValueConfig kv = KeyValueConfig::Load(a.config);
  const ExperimentPlan plan = ParseExperimentPlan(kv, seed);
  ApplyThreads(plan.threads, a);
  const fs::path dir = a.out;
  EnsureDirectory(dir);
  WriteFileAtomically(dir / "config.resolved", ResolvedConfigText(plan));

  std::string sweep_csv;
  std::string trials_csv;
  for (const ExperimentConfig& cfg : plan.Expand()) {
    const SweepResult result = AlphaSweep(cfg, plan.xis);
    const std::string csv = SweepCsv(result);
    const std::string trials = SweepTrialsCsv(result);
    const auto body = [](const std::string& s) { return s.substr(s.find('\n') + 1); };
    const auto header = [](const std::string& s) { return s.substr(0, s.find('\n') + 1); };
    if (sweep_csv.empty()) sweep_csv = "n," + header(csv);
    if (trials_csv.empty()) trials_csv = "alpha,n," + header(trials);
    std::istringstream rows(body(csv));
    for (std::string line; std::getline(rows, line);) {
      sweep_csv += fmt::format("{},{}\n", cfg.n, line);
    }
    std::istringstream trows(body(trials));
    for (std::string line; std::getline(trows, line);) {
      trials_csv += fmt::format("{},{},{}\n", FormatDouble(cfg.alpha), cfg.n, line);
    }
    for (const auto& row : result.rows) {
      fmt::print(out, "alpha={} n={} xi={}: delta recall {:+.4f}, delta fpr {:+.4f}\n",
                 cfg.alpha, cfg.n, row.xi, row.mean_delta_recall,
                 row.mean_delta_fpr);
    }
  }
  WriteFileAtomically(dir / "fig7_sweep.csv", sweep_csv);
  WriteFileAtomically(dir / "sweep_trials.csv", trials_csv);
  WriteRunMetadata(dir, "sweep");
  fmt::print(out, "results written to {}\n", dir.string());
  return kExitOk;
}

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return kExitUsage;
    case ErrorKind::kIo:
      return kExitIo;
    case ErrorKind::kInvalidArgument:
      return kExitDomain;
  }
  return kExitInternal;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Open category detection with alien detection-rate guarantees",
               "ocd"};
  app.require_subcommand(1);

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand(
      "bounds", "Sample-size, achieved-epsilon and Massart bound calculators");
  bounds_cmd->add_option("--alpha", bounds.alpha, "Mixture fraction alpha");
  bounds_cmd->add_option("--alpha-prime", bounds.alpha_prime,
                         "Upper bound alpha' >= alpha");
  bounds_cmd->add_option("--epsilon", bounds.epsilon, "Slack epsilon");
  bounds_cmd->add_option("--delta", bounds.delta, "Failure probability")
      ->capture_default_str();
  bounds_cmd->add_option("--q", bounds.q, "Target quantile")
      ->capture_default_str();
  bounds_cmd->add_option("--n", bounds.n, "Sample size for achieved epsilon");
  bounds_cmd->add_option("--lambda", bounds.lambda, "Massart lambda");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic data as CSV");
  synth_cmd->add_option("--kind", synth.kind, "nominal, alien or mixture")
      ->capture_default_str();
  synth_cmd->add_option("--n", synth.n, "Rows")->capture_default_str();
  synth_cmd->add_option("--alpha", synth.alpha, "Alien fraction (mixture)")
      ->capture_default_str();
  synth_cmd->add_option("--mode", synth.mode, "exact_count or iid")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output CSV")->required();
  synth_cmd->add_option("--dim", synth.dim, "Dimensions")->capture_default_str();
  synth_cmd->add_option("--shift", synth.shift, "Alien mean shift")
      ->capture_default_str();
  synth_cmd->add_flag("--labels", synth.labels,
                      "Add a label column to nominal/alien output");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a detector model");
  train_cmd->add_option("--detector", train.detector, "iforest or loda")
      ->capture_default_str();
  train_cmd->add_option("--input", train.input, "Feature CSV")->required();
  train_cmd->add_option("--label-column", train.label_column,
                        "Column excluded from features")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed");
  train_cmd->add_option("--out", train.out, "Model JSON")->required();
  train_cmd->add_option("--trees", train.trees, "Isolation trees")
      ->capture_default_str();
  train_cmd->add_option("--fraction", train.fraction, "Subsample fraction")
      ->capture_default_str();
  train_cmd->add_option("--projections", train.projections, "LODA projections")
      ->capture_default_str();
  train_cmd->add_option("--bin-width", train.bin_width, "LODA bin width");
  train_cmd->add_option("--oob-scores", train.oob_scores,
                        "Write out-of-bag scores of the training rows");

  ThresholdArgs threshold;
  auto* threshold_cmd =
      app.add_subcommand("threshold", "Fit the alarm threshold from scores");
  threshold_cmd->add_option("--clean", threshold.clean, "Clean score file")
      ->required();
  threshold_cmd->add_option("--mixture", threshold.mixture,
                            "Mixture score file")
      ->required();
  threshold_cmd->add_option("--alpha", threshold.alpha,
                            "Mixture fraction (or its upper bound)")
      ->required();
  threshold_cmd->add_option("--q", threshold.q, "Target quantile")
      ->capture_default_str();
  threshold_cmd->add_option("--variant", threshold.variant, "basic or iso")
      ->capture_default_str();
  threshold_cmd->add_option("--out", threshold.out, "Threshold JSON");
  threshold_cmd->add_option("--diagnostics", threshold.diagnostics,
                            "Alien CDF estimate CSV");

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand(
      "score", "Score points with a model and/or classify against a threshold");
  score_cmd->add_option("--threshold-file", score.threshold_file,
                        "Threshold JSON");
  score_cmd->add_option("--model", score.model, "Model JSON");
  score_cmd->add_option("--input", score.input,
                        "Score file, or feature CSV with --model")
      ->required();
  score_cmd->add_option("--label-column", score.label_column,
                        "Column excluded from features")
      ->capture_default_str();
  score_cmd->add_option("--out", score.out, "Output CSV (default stdout)");

  RunArgs run;
  CLI::App* run_cmds[3];
  const char* names[3] = {"experiment", "cv", "sweep"};
  const char* help[3] = {"Repeated synthetic trials",
                         "Cross-validated benchmark",
                         "alpha' misspecification sweep"};
  for (int i = 0; i < 3; ++i) {
    run_cmds[i] = app.add_subcommand(names[i], help[i]);
    run_cmds[i]->add_option("--config", run.config, "Config file")->required();
    run_cmds[i]->add_option("--seed", run.seed, "Root random seed");
    run_cmds[i]->add_option("--out", run.out, "Output directory")->required();
    run_cmds[i]->add_option("--threads", run.threads,
                            "Worker threads (default: config, then all cores)");
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (bounds_cmd->parsed()) return RunBounds(bounds, out);
    if (synth_cmd->parsed()) return RunSynth(synth, out);
    if (train_cmd->parsed()) return RunTrain(train, out);
    if (threshold_cmd->parsed()) return RunThreshold(threshold, out);
    if (score_cmd->parsed()) return RunScore(score, out);
    if (run_cmds[0]->parsed()) return RunExperimentCommand(run, out);
    if (run_cmds[1]->parsed()) return RunCvCommand(run, out);
    if (run_cmds[2]->parsed()) return RunSweepCommand(run, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace ocd
