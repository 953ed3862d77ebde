#ifndef OCD_IO_H_
#define OCD_IO_H_

// File formats.
//
// Score files: either one decimal score per line, or a comma-separated table
// whose header names a `score` column (an optional `label` column carries
// 0 = nominal / 1 = alien for evaluation). Non-finite values are rejected.
//
// Point files: comma-separated, header row of column names. Every column
// except the optional label column is a feature.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ocd/cdf_mixture.h"
#include "ocd/point_set.h"

namespace ocd {

// Parses a finite double, ignoring surrounding whitespace.
std::optional<double> ParseFiniteDouble(std::string_view text);

struct ScoreTable {
  std::vector<double> scores;                    // file order
  std::optional<std::vector<int>> labels;        // present iff a label column
};

// Throws IoError for unreadable or empty files and for malformed or
// non-finite entries (the message names the 1-based line number).
ScoreTable ReadScoreTable(const std::filesystem::path& path);
ScoreTable ParseScoreTable(std::istream& in, const std::string& source_name);

std::vector<double> ReadScores(const std::filesystem::path& path);

// Clean and mixture samples for the threshold fit.
std::pair<ScoreSample, ScoreSample> LoadExternalScores(
    const std::filesystem::path& clean_path,
    const std::filesystem::path& mixture_path);

struct PointTable {
  PointSet points;
  std::vector<std::string> feature_names;
  std::optional<std::vector<std::int64_t>> labels;
};

PointTable ReadPointTable(const std::filesystem::path& path,
                          const std::string& label_column = "label");
PointTable ParsePointTable(std::istream& in, const std::string& source_name,
                           const std::string& label_column = "label");

// Header f0..f{d-1}[,label]; values in shortest round-trip form.
void WritePointTable(std::ostream& out, const PointSet& points,
                     const std::vector<int>* labels);

// Shortest decimal representation that round-trips.
std::string FormatDouble(double value);

// Writes `contents` to `path` via a temporary file and rename, so a failed
// run leaves no partial output. Throws IoError.
void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents);

}  // namespace ocd

#endif  // OCD_IO_H_
