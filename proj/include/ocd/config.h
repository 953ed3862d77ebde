#ifndef OCD_CONFIG_H_
#define OCD_CONFIG_H_

// Run configuration files: one `key = value` per line, `#` starts a comment,
// list values are comma separated. Unknown keys are rejected.
//
// Experiment / sweep keys (defaults in parentheses):
//   detector (iforest)  num_trees (1000)  subsample_fraction (0.2)
//   num_projections (1000)  loda_bin_width (auto)
//   n (1000; list)  alpha (0.1; list)  alpha_prime (unset)  q (0.05)
//   delta (0.05)  repetitions (100)  eval_size (20000)  variant (basic)
//   mixture_mode (exact_count)  oracle (false)  oracle_size (0 = eval_size)
//   dim (9)  shift (3)  shift_patterns (0.4:3;0.6:4)  threads (0 = all cores)
//   xi (0.002,0.004,0.006,0.008,0.01; list, sweep only)
//
// "unset" / "auto" / "none" are accepted where the resolved echo prints them,
// so an echoed config.resolved can be fed back in.
//
// Cross-validation keys: the detector keys above, plus
//   data, label_column (class), nominal_classes (list)  -- feature CSV
//   clean_scores, mixture_scores                        -- score files
//   alpha (list), alpha_prime, q, delta, folds (10), repetitions (1),
//   n (0 = largest feasible), variant, threads

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ocd/harness.h"

namespace ocd {

class KeyValueConfig {
 public:
  // Throws ConfigError on malformed lines or duplicate keys.
  static KeyValueConfig Parse(std::istream& in, const std::string& source);
  // Throws IoError if the file cannot be read.
  static KeyValueConfig Load(const std::filesystem::path& path);

  bool Has(const std::string& key) const { return values_.count(key) > 0; }

  // Typed accessors; each marks the key as used. Malformed values throw
  // ConfigError naming the key.
  std::optional<std::string> TakeString(const std::string& key);
  std::optional<double> TakeDouble(const std::string& key);
  std::optional<std::int64_t> TakeInt(const std::string& key);
  std::optional<bool> TakeBool(const std::string& key);
  std::optional<std::vector<double>> TakeDoubleList(const std::string& key);
  std::optional<std::vector<std::int64_t>> TakeIntList(const std::string& key);
  // True (and the key marked used) when the value is exactly `sentinel`, such
  // as "unset" or "auto" in a resolved-config echo.
  bool TakeSentinel(const std::string& key, const std::string& sentinel);

  // Throws ConfigError listing keys no accessor consumed.
  void CheckAllUsed() const;

 private:
  std::string source_;
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

struct ExperimentPlan {
  ExperimentConfig base;
  std::vector<std::size_t> n_values = {1000};
  std::vector<double> alpha_values = {0.1};
  std::vector<double> xis = {0.002, 0.004, 0.006, 0.008, 0.010};
  std::size_t threads = 0;

  // One config per (alpha, n) cell, alpha-major, each with its own seed
  // derived from the base seed and the cell index.
  std::vector<ExperimentConfig> Expand() const;
};

// `seed` comes from the command line, never from the file.
ExperimentPlan ParseExperimentPlan(KeyValueConfig& kv, std::uint64_t seed);
std::string ResolvedConfigText(const ExperimentPlan& plan);

struct CvPlan {
  CvConfig base;
  std::vector<double> alpha_values = {0.1};
  std::optional<std::filesystem::path> data;
  std::string label_column = "class";
  std::vector<std::int64_t> nominal_classes;
  std::optional<std::filesystem::path> clean_scores;
  std::optional<std::filesystem::path> mixture_scores;
  std::size_t threads = 0;

  std::vector<CvConfig> Expand() const;
};

CvPlan ParseCvPlan(KeyValueConfig& kv, std::uint64_t seed);
std::string ResolvedConfigText(const CvPlan& plan);

}  // namespace ocd

#endif  // OCD_CONFIG_H_
