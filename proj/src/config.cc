#include "ocd/config.h"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "ocd/io.h"
#include "ocd/random.h"
#include "ocd/status.h"

namespace ocd {
namespace {

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (true) {
    const auto comma = s.find(',', start);
    items.push_back(Trim(s.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return items;
}

std::optional<std::int64_t> ParseInt(const std::string& s) {
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string JoinDoubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += FormatDouble(v[i]);
  }
  return out;
}

template <typename T>
std::string JoinInts(const std::vector<T>& v) {
  return fmt::format("{}", fmt::join(v, ","));
}

std::string OptText(const std::optional<double>& v, const char* unset) {
  return v ? FormatDouble(*v) : unset;
}

// Keys shared by experiment and cross-validation plans.
void ParseDetectorKeys(KeyValueConfig& kv, DetectorOptions& d) {
  if (auto v = kv.TakeString("detector")) d.kind = ParseDetectorKind(*v);
  if (auto v = kv.TakeInt("num_trees")) d.num_trees = static_cast<int>(*v);
  if (auto v = kv.TakeDouble("subsample_fraction")) d.subsample_fraction = *v;
  if (auto v = kv.TakeInt("num_projections")) {
    d.num_projections = static_cast<int>(*v);
  }
  if (!kv.TakeSentinel("loda_bin_width", "auto")) {
    if (auto v = kv.TakeDouble("loda_bin_width")) d.loda_bin_width = *v;
  }
}

std::string DetectorText(const DetectorOptions& d) {
  return fmt::format(
      "detector = {}\nnum_trees = {}\nsubsample_fraction = {}\n"
      "num_projections = {}\nloda_bin_width = {}\n",
      DetectorName(d.kind), d.num_trees, FormatDouble(d.subsample_fraction),
      d.num_projections, OptText(d.loda_bin_width, "auto"));
}

std::size_t NonNegative(std::int64_t v, const char* key) {
  if (v < 0) throw ConfigError(fmt::format("{} must be >= 0", key));
  return static_cast<std::size_t>(v);
}

// "p:k;p:k" shift patterns.
std::vector<ShiftPattern> ParsePatterns(const std::string& text) {
  std::vector<ShiftPattern> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto semi = std::min(text.find(';', start), text.size());
    const std::string item = Trim(text.substr(start, semi - start));
    const auto colon = item.find(':');
    const auto p = colon == std::string::npos
                       ? std::nullopt
                       : ParseFiniteDouble(item.substr(0, colon));
    const auto k = colon == std::string::npos
                       ? std::nullopt
                       : ParseInt(Trim(item.substr(colon + 1)));
    if (!p || !k || *k < 0) {
      throw ConfigError(
          fmt::format("shift_patterns: malformed entry '{}' (want p:k)", item));
    }
    out.push_back({*p, static_cast<std::size_t>(*k)});
    start = semi + 1;
  }
  return out;
}

constexpr char kRulesComment[] =
    "# ci95 = 1.96 * sample sd / sqrt(trials); quartiles = nearest rank\n";

}  // namespace

KeyValueConfig KeyValueConfig::Parse(std::istream& in,
                                     const std::string& source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(
          fmt::format("{}:{}: expected 'key = value'", source, line_no));
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(fmt::format("{}:{}: empty key", source, line_no));
    }
    if (!kv.values_.emplace(key, value).second) {
      throw ConfigError(
          fmt::format("{}:{}: duplicate key '{}'", source, line_no, key));
    }
  }
  return kv;
}

KeyValueConfig KeyValueConfig::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config '{}'", path.string()));
  return Parse(in, path.string());
}

std::optional<std::string> KeyValueConfig::TakeString(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  used_.insert(key);
  return it->second;
}

std::optional<double> KeyValueConfig::TakeDouble(const std::string& key) {
  const auto s = TakeString(key);
  if (!s) return std::nullopt;
  const auto v = ParseFiniteDouble(*s);
  if (!v) {
    throw ConfigError(
        fmt::format("{}: '{}' is not a finite number: '{}'", source_, key, *s));
  }
  return v;
}

std::optional<std::int64_t> KeyValueConfig::TakeInt(const std::string& key) {
  const auto s = TakeString(key);
  if (!s) return std::nullopt;
  const auto v = ParseInt(*s);
  if (!v) {
    throw ConfigError(
        fmt::format("{}: '{}' is not an integer: '{}'", source_, key, *s));
  }
  return v;
}

std::optional<bool> KeyValueConfig::TakeBool(const std::string& key) {
  const auto s = TakeString(key);
  if (!s) return std::nullopt;
  if (*s == "true" || *s == "1") return true;
  if (*s == "false" || *s == "0") return false;
  throw ConfigError(
      fmt::format("{}: '{}' must be true or false, got '{}'", source_, key, *s));
}

std::optional<std::vector<double>> KeyValueConfig::TakeDoubleList(
    const std::string& key) {
  const auto s = TakeString(key);
  if (!s) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : SplitList(*s)) {
    const auto v = ParseFiniteDouble(item);
    if (!v) {
      throw ConfigError(fmt::format("{}: '{}' has a malformed entry '{}'",
                                    source_, key, item));
    }
    out.push_back(*v);
  }
  return out;
}

std::optional<std::vector<std::int64_t>> KeyValueConfig::TakeIntList(
    const std::string& key) {
  const auto s = TakeString(key);
  if (!s) return std::nullopt;
  std::vector<std::int64_t> out;
  for (const auto& item : SplitList(*s)) {
    const auto v = ParseInt(item);
    if (!v) {
      throw ConfigError(fmt::format("{}: '{}' has a malformed entry '{}'",
                                    source_, key, item));
    }
    out.push_back(*v);
  }
  return out;
}

bool KeyValueConfig::TakeSentinel(const std::string& key,
                                  const std::string& sentinel) {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second != sentinel) return false;
  used_.insert(key);
  return true;
}

void KeyValueConfig::CheckAllUsed() const {
  std::vector<std::string> unknown;
  for (const auto& [key, value] : values_) {
    if (!used_.count(key)) unknown.push_back(key);
  }
  if (!unknown.empty()) {
    throw ConfigError(fmt::format("{}: unknown key(s): {}", source_,
                                  fmt::join(unknown, ", ")));
  }
}

std::vector<ExperimentConfig> ExperimentPlan::Expand() const {
  std::vector<ExperimentConfig> out;
  std::size_t cell = 0;
  for (const double alpha : alpha_values) {
    for (const std::size_t n : n_values) {
      ExperimentConfig cfg = base;
      cfg.alpha = alpha;
      cfg.n = n;
      cfg.seed = DeriveSeed(base.seed, cell++);
      out.push_back(cfg);
    }
  }
  return out;
}

ExperimentPlan ParseExperimentPlan(KeyValueConfig& kv, std::uint64_t seed) {
  ExperimentPlan plan;
  ExperimentConfig& c = plan.base;
  c.seed = seed;
  ParseDetectorKeys(kv, c.detector);
  if (auto v = kv.TakeIntList("n")) {
    plan.n_values.clear();
    for (const auto x : *v) {
      if (x < 1) throw ConfigError("n values must be >= 1");
      plan.n_values.push_back(static_cast<std::size_t>(x));
    }
  }
  if (auto v = kv.TakeDoubleList("alpha")) plan.alpha_values = *v;
  if (!kv.TakeSentinel("alpha_prime", "unset")) {
    if (auto v = kv.TakeDouble("alpha_prime")) c.alpha_prime = *v;
  }
  if (auto v = kv.TakeDouble("q")) c.q = *v;
  if (auto v = kv.TakeDouble("delta")) c.delta = *v;
  if (auto v = kv.TakeInt("repetitions")) c.repetitions = static_cast<int>(*v);
  if (auto v = kv.TakeInt("eval_size")) c.eval_size = NonNegative(*v, "eval_size");
  if (auto v = kv.TakeString("variant")) c.variant = ParseVariantSelection(*v);
  if (auto v = kv.TakeString("mixture_mode")) c.mixture_mode = ParseMixtureMode(*v);
  if (auto v = kv.TakeBool("oracle")) c.oracle = *v;
  if (auto v = kv.TakeInt("oracle_size")) {
    c.oracle_size = NonNegative(*v, "oracle_size");
  }
  if (auto v = kv.TakeInt("dim")) c.synth.dim = NonNegative(*v, "dim");
  if (auto v = kv.TakeDouble("shift")) c.synth.shift = *v;
  if (auto v = kv.TakeString("shift_patterns")) {
    c.synth.patterns = ParsePatterns(*v);
  }
  if (auto v = kv.TakeInt("threads")) plan.threads = NonNegative(*v, "threads");
  if (auto v = kv.TakeDoubleList("xi")) plan.xis = *v;
  kv.CheckAllUsed();
  if (plan.n_values.empty() || plan.alpha_values.empty()) {
    throw ConfigError("n and alpha need at least one value");
  }
  for (const auto& cfg : plan.Expand()) cfg.Validate();
  return plan;
}

std::string ResolvedConfigText(const ExperimentPlan& plan) {
  const ExperimentConfig& c = plan.base;
  std::string out = "# resolved experiment configuration\n";
  out += fmt::format("# seed = {} (from --seed)\n", c.seed);
  out += DetectorText(c.detector);
  out += fmt::format(
      "n = {}\nalpha = {}\nalpha_prime = {}\nq = {}\ndelta = {}\n"
      "repetitions = {}\neval_size = {}\nvariant = {}\nmixture_mode = {}\n"
      "oracle = {}\noracle_size = {}\ndim = {}\nshift = {}\n"
      "shift_patterns = {}\nthreads = {}\nxi = {}\n",
      JoinInts(plan.n_values), JoinDoubles(plan.alpha_values),
      OptText(c.alpha_prime, "unset"), FormatDouble(c.q),
      FormatDouble(c.delta), c.repetitions, c.eval_size,
      VariantSelectionName(c.variant), MixtureModeName(c.mixture_mode),
      c.oracle ? "true" : "false",
      c.oracle_size == 0 ? c.eval_size : c.oracle_size, c.synth.dim,
      FormatDouble(c.synth.shift),
      [&] {
        std::string s;
        for (const auto& p : c.synth.patterns) {
          if (!s.empty()) s += ';';
          s += fmt::format("{}:{}", FormatDouble(p.probability), p.shifted_dims);
        }
        return s;
      }(),
      plan.threads, JoinDoubles(plan.xis));
  out += kRulesComment;
  return out;
}

std::vector<CvConfig> CvPlan::Expand() const {
  std::vector<CvConfig> out;
  std::size_t cell = 0;
  for (const double alpha : alpha_values) {
    CvConfig cfg = base;
    cfg.alpha = alpha;
    cfg.seed = DeriveSeed(base.seed, cell++);
    out.push_back(cfg);
  }
  return out;
}

CvPlan ParseCvPlan(KeyValueConfig& kv, std::uint64_t seed) {
  CvPlan plan;
  CvConfig& c = plan.base;
  c.seed = seed;
  ParseDetectorKeys(kv, c.detector);
  if (!kv.TakeSentinel("data", "unset")) {
    if (auto v = kv.TakeString("data")) plan.data = *v;
  }
  if (auto v = kv.TakeString("label_column")) plan.label_column = *v;
  if (!kv.TakeSentinel("nominal_classes", "none")) {
    if (auto v = kv.TakeIntList("nominal_classes")) plan.nominal_classes = *v;
  }
  if (!kv.TakeSentinel("clean_scores", "unset")) {
    if (auto v = kv.TakeString("clean_scores")) plan.clean_scores = *v;
  }
  if (!kv.TakeSentinel("mixture_scores", "unset")) {
    if (auto v = kv.TakeString("mixture_scores")) plan.mixture_scores = *v;
  }
  if (auto v = kv.TakeDoubleList("alpha")) plan.alpha_values = *v;
  if (!kv.TakeSentinel("alpha_prime", "unset")) {
    if (auto v = kv.TakeDouble("alpha_prime")) c.alpha_prime = *v;
  }
  if (auto v = kv.TakeDouble("q")) c.q = *v;
  if (auto v = kv.TakeDouble("delta")) c.delta = *v;
  if (auto v = kv.TakeInt("folds")) c.folds = static_cast<int>(*v);
  if (auto v = kv.TakeInt("repetitions")) c.repetitions = static_cast<int>(*v);
  if (!kv.TakeSentinel("n", "auto")) {
    if (auto v = kv.TakeInt("n")) c.n = NonNegative(*v, "n");
  }
  if (auto v = kv.TakeString("variant")) c.variant = ParseVariantSelection(*v);
  if (auto v = kv.TakeInt("threads")) plan.threads = NonNegative(*v, "threads");
  kv.CheckAllUsed();

  const bool has_points = plan.data.has_value();
  const bool has_scores =
      plan.clean_scores.has_value() || plan.mixture_scores.has_value();
  if (has_points == has_scores) {
    throw ConfigError(
        "set exactly one input: 'data' (feature CSV) or "
        "'clean_scores' + 'mixture_scores'");
  }
  if (has_scores && !(plan.clean_scores && plan.mixture_scores)) {
    throw ConfigError("score input needs both clean_scores and mixture_scores");
  }
  if (has_points && plan.nominal_classes.empty()) {
    throw ConfigError("feature input needs nominal_classes");
  }
  if (has_scores) c.detector.kind = DetectorKind::kExternal;
  if (plan.alpha_values.empty()) throw ConfigError("alpha needs a value");
  for (const auto& cfg : plan.Expand()) cfg.Validate();
  return plan;
}

std::string ResolvedConfigText(const CvPlan& plan) {
  const CvConfig& c = plan.base;
  std::string out = "# resolved cross-validation configuration\n";
  out += fmt::format("# seed = {} (from --seed)\n", c.seed);
  out += DetectorText(c.detector);
  out += fmt::format(
      "data = {}\nlabel_column = {}\nnominal_classes = {}\n"
      "clean_scores = {}\nmixture_scores = {}\nalpha = {}\n"
      "alpha_prime = {}\nq = {}\ndelta = {}\nfolds = {}\nrepetitions = {}\n"
      "n = {}\nvariant = {}\nthreads = {}\n",
      plan.data ? plan.data->string() : "unset", plan.label_column,
      plan.nominal_classes.empty() ? std::string("none")
                                   : JoinInts(plan.nominal_classes),
      plan.clean_scores ? plan.clean_scores->string() : "unset",
      plan.mixture_scores ? plan.mixture_scores->string() : "unset",
      JoinDoubles(plan.alpha_values), OptText(c.alpha_prime, "unset"),
      FormatDouble(c.q), FormatDouble(c.delta), c.folds, c.repetitions,
      c.n == 0 ? std::string("auto") : fmt::format("{}", c.n),
      VariantSelectionName(c.variant), plan.threads);
  out += kRulesComment;
  return out;
}

}  // namespace ocd
