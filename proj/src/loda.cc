#include "ocd/loda.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "ocd/parallel.h"
#include "ocd/random.h"
#include "ocd/status.h"

namespace ocd {
namespace {

constexpr char kFormatName[] = "ocd.loda";
constexpr int kFormatVersion = 1;
constexpr std::size_t kScoreBlock = 256;

// Linear-interpolation quantile of sorted data.
double SortedQuantile(std::span<const double> sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double FreedmanDiaconisWidth(std::span<const double> values) {
  if (values.empty()) throw InvalidArgumentError("empty histogram sample");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double range = sorted.back() - sorted.front();
  if (range <= 0.0) return 1.0;
  const auto m = static_cast<double>(sorted.size());
  const double iqr = SortedQuantile(sorted, 0.75) - SortedQuantile(sorted, 0.25);
  double width = 2.0 * iqr / std::cbrt(m);
  if (width <= 0.0) width = range / std::ceil(std::sqrt(m));
  // At most one bin per sample point.
  return std::max(width, range / m);
}

Histogram1d Histogram1d::Build(std::span<const double> values,
                               std::optional<double> bin_width) {
  if (values.empty()) throw InvalidArgumentError("empty histogram sample");
  const double width = bin_width ? *bin_width : FreedmanDiaconisWidth(values);
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw InvalidArgumentError(fmt::format("invalid bin width {}", width));
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  Histogram1d h;
  h.origin_ = *lo;
  h.width_ = width;
  h.sample_size_ = values.size();
  const auto bins =
      static_cast<std::size_t>(std::floor((*hi - *lo) / width)) + 1;
  h.counts_.assign(bins, 0);
  for (const double v : values) {
    const auto b = static_cast<std::size_t>(std::floor((v - h.origin_) / width));
    ++h.counts_[std::min(b, bins - 1)];
  }
  return h;
}

double Histogram1d::Density(double z) const {
  const double pseudo = 1.0 / static_cast<double>(sample_size_);
  double count = 0.0;
  const double pos = std::floor((z - origin_) / width_);
  if (pos >= 0.0 && pos < static_cast<double>(counts_.size())) {
    count = counts_[static_cast<std::size_t>(pos)];
  }
  if (count <= 0.0) count = pseudo;
  return count / (static_cast<double>(sample_size_) * width_);
}

double LodaProjection::Project(std::span<const double> x) const {
  double z = 0.0;
  for (std::size_t k = 0; k < features.size(); ++k) {
    z += weights[k] * x[features[k]];
  }
  return z;
}

bool LodaProjection::InBag(std::uint32_t row) const {
  return std::binary_search(bootstrap.begin(), bootstrap.end(), row);
}

Loda Loda::Train(const PointSet& data, const LodaOptions& options) {
  if (data.empty()) throw InvalidArgumentError("cannot train on empty data");
  if (options.num_projections < 1) {
    throw InvalidArgumentError(fmt::format(
        "num_projections must be >= 1, got {}", options.num_projections));
  }
  Loda model;
  model.options_ = options;
  model.dim_ = data.dim();
  model.training_size_ = data.size();
  const std::size_t d = data.dim();
  const std::size_t n = data.size();
  const auto nonzero = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(d))));

  std::vector<std::uint32_t> dims(d);
  std::iota(dims.begin(), dims.end(), 0u);
  model.projections_.resize(static_cast<std::size_t>(options.num_projections));
  ParallelFor(model.projections_.size(), [&](std::size_t p) {
    Rng rng = MakeRng(options.seed, p);
    LodaProjection& proj = model.projections_[p];
    std::sample(dims.begin(), dims.end(), std::back_inserter(proj.features),
                nonzero, rng);
    std::normal_distribution<double> normal;
    double norm = 0.0;
    do {
      proj.weights.clear();
      norm = 0.0;
      for (std::size_t k = 0; k < proj.features.size(); ++k) {
        proj.weights.push_back(normal(rng));
        norm += proj.weights.back() * proj.weights.back();
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (double& w : proj.weights) w /= norm;

    std::uniform_int_distribution<std::uint32_t> pick(
        0, static_cast<std::uint32_t>(n - 1));
    proj.bootstrap.resize(n);
    for (auto& r : proj.bootstrap) r = pick(rng);
    std::vector<double> projected;
    projected.reserve(n);
    for (const auto r : proj.bootstrap) {
      projected.push_back(proj.Project(data.row(r)));
    }
    std::sort(proj.bootstrap.begin(), proj.bootstrap.end());
    proj.histogram = Histogram1d::Build(projected, options.bin_width);
  });
  return model;
}

std::vector<double> Loda::Score(const PointSet& points) const {
  if (!points.empty() && points.dim() != dim_) {
    throw InvalidArgumentError(fmt::format(
        "points have dimension {}, model expects {}", points.dim(), dim_));
  }
  std::vector<double> scores(points.size());
  const std::size_t blocks = (points.size() + kScoreBlock - 1) / kScoreBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(points.size(), (b + 1) * kScoreBlock);
    for (std::size_t i = b * kScoreBlock; i < end; ++i) {
      const auto x = points.row(i);
      double total = 0.0;
      for (const auto& proj : projections_) {
        total += std::log(proj.histogram.Density(proj.Project(x)));
      }
      scores[i] = -total / static_cast<double>(projections_.size());
    }
  });
  return scores;
}

std::vector<double> Loda::ScoreLeaveOut(const PointSet& training) const {
  if (training.size() != training_size_ || training.dim() != dim_) {
    throw InvalidArgumentError(fmt::format(
        "leave-out scoring needs the {}x{} training set, got {}x{}",
        training_size_, dim_, training.size(), training.dim()));
  }
  const std::size_t n = training_size_;
  std::vector<std::uint8_t> in_bag(projections_.size() * n, 0);
  std::vector<std::size_t> bag_count(n, 0);
  for (std::size_t p = 0; p < projections_.size(); ++p) {
    for (const auto r : projections_[p].bootstrap) {
      if (!in_bag[p * n + r]) {
        in_bag[p * n + r] = 1;
        ++bag_count[r];
      }
    }
  }
  std::vector<std::size_t> uncovered;
  for (std::size_t r = 0; r < n; ++r) {
    if (bag_count[r] == projections_.size()) uncovered.push_back(r);
  }
  if (!uncovered.empty()) {
    throw InvalidArgumentError(fmt::format(
        "cannot score with leave-out: row(s) {} are in every bootstrap",
        fmt::join(uncovered.begin(),
                  uncovered.begin() +
                      static_cast<std::ptrdiff_t>(
                          std::min<std::size_t>(uncovered.size(), 20)),
                  ", ")));
  }
  std::vector<double> scores(n);
  const std::size_t blocks = (n + kScoreBlock - 1) / kScoreBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kScoreBlock);
    for (std::size_t i = b * kScoreBlock; i < end; ++i) {
      const auto x = training.row(i);
      double total = 0.0;
      for (std::size_t p = 0; p < projections_.size(); ++p) {
        if (in_bag[p * n + i]) continue;
        const auto& proj = projections_[p];
        total += std::log(proj.histogram.Density(proj.Project(x)));
      }
      scores[i] = -total / static_cast<double>(projections_.size() - bag_count[i]);
    }
  });
  return scores;
}

std::vector<std::size_t> Loda::LeaveOutProjections(std::uint32_t row) const {
  std::vector<std::size_t> used;
  for (std::size_t p = 0; p < projections_.size(); ++p) {
    if (!projections_[p].InBag(row)) used.push_back(p);
  }
  return used;
}

nlohmann::json Loda::ToJson() const {
  nlohmann::json projections = nlohmann::json::array();
  for (const auto& proj : projections_) {
    projections.push_back({
        {"features", proj.features},
        {"weights", proj.weights},
        {"origin", proj.histogram.origin_},
        {"width", proj.histogram.width_},
        {"counts", proj.histogram.counts_},
        {"sample_size", proj.histogram.sample_size_},
        {"bootstrap", proj.bootstrap},
    });
  }
  nlohmann::json json = {
      {"format", kFormatName},
      {"version", kFormatVersion},
      {"num_projections", options_.num_projections},
      {"seed", options_.seed},
      {"dim", dim_},
      {"training_size", training_size_},
      {"projections", projections},
  };
  json["bin_width"] = options_.bin_width ? nlohmann::json(*options_.bin_width)
                                         : nlohmann::json(nullptr);
  return json;
}

Loda Loda::FromJson(const nlohmann::json& json) {
  try {
    if (json.at("format").get<std::string>() != kFormatName ||
        json.at("version").get<int>() != kFormatVersion) {
      throw IoError("not a LODA model (format/version mismatch)");
    }
    Loda model;
    model.options_.num_projections = json.at("num_projections").get<int>();
    model.options_.seed = json.at("seed").get<std::uint64_t>();
    if (!json.at("bin_width").is_null()) {
      model.options_.bin_width = json.at("bin_width").get<double>();
    }
    model.dim_ = json.at("dim").get<std::size_t>();
    model.training_size_ = json.at("training_size").get<std::size_t>();
    for (const auto& jp : json.at("projections")) {
      LodaProjection proj;
      proj.features = jp.at("features").get<std::vector<std::uint32_t>>();
      proj.weights = jp.at("weights").get<std::vector<double>>();
      proj.histogram.origin_ = jp.at("origin").get<double>();
      proj.histogram.width_ = jp.at("width").get<double>();
      proj.histogram.counts_ = jp.at("counts").get<std::vector<std::uint32_t>>();
      proj.histogram.sample_size_ = jp.at("sample_size").get<std::size_t>();
      proj.bootstrap = jp.at("bootstrap").get<std::vector<std::uint32_t>>();
      model.projections_.push_back(std::move(proj));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(fmt::format("malformed LODA model: {}", e.what()));
  }
}

}  // namespace ocd
