#include "ocd/io.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>

#include <fmt/format.h>

#include "ocd/status.h"

namespace ocd {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Any double, including nan/inf spellings.
std::optional<double> ParseAnyDouble(std::string_view text) {
  text = Trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::ifstream OpenForRead(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  return in;
}

}  // namespace

std::optional<double> ParseFiniteDouble(std::string_view text) {
  const auto value = ParseAnyDouble(text);
  if (!value || !std::isfinite(*value)) return std::nullopt;
  return value;
}

ScoreTable ParseScoreTable(std::istream& in, const std::string& source_name) {
  ScoreTable table;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> score_col;
  std::optional<std::size_t> label_col;
  std::size_t num_cols = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = Trim(line);
    if (text.empty()) continue;
    if (first) {
      first = false;
      if (!ParseAnyDouble(text)) {
        const auto header = SplitCommas(text);
        num_cols = header.size();
        for (std::size_t c = 0; c < header.size(); ++c) {
          if (header[c] == "score") score_col = c;
          if (header[c] == "label") label_col = c;
        }
        if (!score_col) {
          throw IoError(fmt::format(
              "{}:{}: expected a number or a header with a 'score' column",
              source_name, line_no));
        }
        if (label_col) table.labels.emplace();
        continue;
      }
      score_col = 0;
    }
    const auto fields = SplitCommas(text);
    if (fields.size() != num_cols) {
      throw IoError(fmt::format("{}:{}: expected {} field(s), found {}",
                                source_name, line_no, num_cols, fields.size()));
    }
    const auto value = ParseAnyDouble(fields[*score_col]);
    if (!value) {
      throw IoError(fmt::format("{}:{}: malformed score '{}'", source_name,
                                line_no, fields[*score_col]));
    }
    if (!std::isfinite(*value)) {
      throw IoError(fmt::format("{}:{}: non-finite score '{}'", source_name,
                                line_no, fields[*score_col]));
    }
    table.scores.push_back(*value);
    if (label_col) {
      const std::string_view lab = fields[*label_col];
      if (lab != "0" && lab != "1") {
        throw IoError(fmt::format("{}:{}: label must be 0 or 1, got '{}'",
                                  source_name, line_no, lab));
      }
      table.labels->push_back(lab == "1" ? 1 : 0);
    }
  }
  if (table.scores.empty()) {
    throw IoError(fmt::format("{}: no scores found", source_name));
  }
  return table;
}

ScoreTable ReadScoreTable(const std::filesystem::path& path) {
  auto in = OpenForRead(path);
  return ParseScoreTable(in, path.string());
}

std::vector<double> ReadScores(const std::filesystem::path& path) {
  return ReadScoreTable(path).scores;
}

std::pair<ScoreSample, ScoreSample> LoadExternalScores(
    const std::filesystem::path& clean_path,
    const std::filesystem::path& mixture_path) {
  return {ScoreSample(ReadScores(clean_path), ScoreSource::kClean),
          ScoreSample(ReadScores(mixture_path), ScoreSource::kMixture)};
}

PointTable ParsePointTable(std::istream& in, const std::string& source_name,
                           const std::string& label_column) {
  PointTable table;
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> label_col;
  std::size_t num_cols = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view text = Trim(line);
    if (text.empty()) continue;
    const auto fields = SplitCommas(text);
    if (num_cols == 0) {
      num_cols = fields.size();
      for (std::size_t c = 0; c < fields.size(); ++c) {
        if (fields[c] == label_column) {
          label_col = c;
        } else {
          table.feature_names.emplace_back(fields[c]);
        }
      }
      if (table.feature_names.empty()) {
        throw IoError(fmt::format("{}:{}: no feature columns", source_name,
                                  line_no));
      }
      if (label_col) table.labels.emplace();
      continue;
    }
    if (fields.size() != num_cols) {
      throw IoError(fmt::format("{}:{}: expected {} field(s), found {}",
                                source_name, line_no, num_cols, fields.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (label_col && c == *label_col) {
        std::int64_t label = 0;
        const auto f = fields[c];
        const auto [ptr, ec] =
            std::from_chars(f.data(), f.data() + f.size(), label);
        if (ec != std::errc() || ptr != f.data() + f.size()) {
          throw IoError(fmt::format("{}:{}: malformed label '{}'", source_name,
                                    line_no, f));
        }
        table.labels->push_back(label);
        continue;
      }
      const auto value = ParseFiniteDouble(fields[c]);
      if (!value) {
        throw IoError(fmt::format("{}:{}: malformed or non-finite value '{}'",
                                  source_name, line_no, fields[c]));
      }
      values.push_back(*value);
    }
  }
  if (values.empty()) {
    throw IoError(fmt::format("{}: no data rows", source_name));
  }
  table.points = PointSet(table.feature_names.size(), std::move(values));
  return table;
}

PointTable ReadPointTable(const std::filesystem::path& path,
                          const std::string& label_column) {
  auto in = OpenForRead(path);
  return ParsePointTable(in, path.string(), label_column);
}

std::string FormatDouble(double value) { return fmt::format("{}", value); }

void WritePointTable(std::ostream& out, const PointSet& points,
                     const std::vector<int>* labels) {
  for (std::size_t f = 0; f < points.dim(); ++f) {
    out << (f ? "," : "") << 'f' << f;
  }
  if (labels) out << ",label";
  out << '\n';
  std::string row;
  for (std::size_t i = 0; i < points.size(); ++i) {
    row.clear();
    const auto x = points.row(i);
    for (std::size_t f = 0; f < x.size(); ++f) {
      if (f) row += ',';
      row += FormatDouble(x[f]);
    }
    if (labels) row += fmt::format(",{}", (*labels)[i]);
    row += '\n';
    out << row;
  }
}

void WriteFileAtomically(const std::filesystem::path& path,
                         const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << contents;
    if (!out) throw IoError(fmt::format("error writing '{}'", path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(fmt::format("cannot write '{}'", path.string()));
  }
}

}  // namespace ocd
