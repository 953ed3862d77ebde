#include "ocd/synthdata.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "ocd/parallel.h"
#include "ocd/random.h"
#include "ocd/status.h"

namespace ocd {
namespace {

// Rows per generator substream.
constexpr std::size_t kRowBlock = 512;

template <typename RowFn>
std::vector<double> GenerateRows(std::size_t n, std::size_t dim,
                                 std::uint64_t seed, RowFn&& fill_row) {
  std::vector<double> values(n * dim);
  const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
  ParallelFor(blocks, [&](std::size_t b) {
    Rng rng = MakeRng(seed, b);
    const std::size_t end = std::min(n, (b + 1) * kRowBlock);
    for (std::size_t i = b * kRowBlock; i < end; ++i) {
      fill_row(i, std::span<double>(values.data() + i * dim, dim), rng);
    }
  });
  return values;
}

}  // namespace

void SynthConfig::Validate() const {
  if (dim < 1 || dim > 64) {
    throw InvalidArgumentError(fmt::format("dim must lie in [1, 64], got {}", dim));
  }
  if (!std::isfinite(shift)) throw InvalidArgumentError("shift must be finite");
  if (patterns.empty()) throw InvalidArgumentError("no shift patterns");
  double total = 0.0;
  for (const auto& p : patterns) {
    if (!(p.probability >= 0.0)) {
      throw InvalidArgumentError("pattern probabilities must be >= 0");
    }
    if (p.shifted_dims > dim) {
      throw InvalidArgumentError(fmt::format(
          "pattern shifts {} dims but dim is {}", p.shifted_dims, dim));
    }
    total += p.probability;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgumentError(
        fmt::format("pattern probabilities sum to {}, not 1", total));
  }
}

LabeledPointSet::LabeledPointSet(PointSet points, std::vector<Label> labels)
    : points_(std::move(points)), labels_(std::move(labels)) {
  if (points_.size() != labels_.size()) {
    throw InvalidArgumentError(fmt::format("{} points but {} labels",
                                           points_.size(), labels_.size()));
  }
}

std::size_t LabeledPointSet::CountAliens() const {
  return static_cast<std::size_t>(
      std::count(labels_.begin(), labels_.end(), Label::kAlien));
}

std::vector<int> LabeledPointSet::LabelInts() const {
  std::vector<int> out;
  out.reserve(labels_.size());
  for (const Label l : labels_) out.push_back(static_cast<int>(l));
  return out;
}

PointSet GenerateNominal(std::size_t n, const SynthConfig& config,
                         std::uint64_t seed) {
  config.Validate();
  auto values = GenerateRows(
      n, config.dim, seed, [](std::size_t, std::span<double> row, Rng& rng) {
        std::normal_distribution<double> normal;
        for (double& v : row) v = normal(rng);
      });
  return PointSet(config.dim, std::move(values));
}

AlienDraw GenerateAlienWithMasks(std::size_t n, const SynthConfig& config,
                                 std::uint64_t seed) {
  config.Validate();
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& p : config.patterns) cumulative.push_back(acc += p.probability);
  std::vector<std::size_t> dims(config.dim);
  std::iota(dims.begin(), dims.end(), std::size_t{0});

  AlienDraw draw;
  draw.masks.resize(n);
  auto values = GenerateRows(
      n, config.dim, seed, [&](std::size_t i, std::span<double> row, Rng& rng) {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        std::size_t pattern = 0;
        while (pattern + 1 < cumulative.size() && u >= cumulative[pattern]) {
          ++pattern;
        }
        std::vector<std::size_t> chosen;
        std::sample(dims.begin(), dims.end(), std::back_inserter(chosen),
                    config.patterns[pattern].shifted_dims, rng);
        std::uint64_t mask = 0;
        for (const std::size_t f : chosen) mask |= std::uint64_t{1} << f;
        draw.masks[i] = mask;
        std::normal_distribution<double> normal;
        for (std::size_t f = 0; f < row.size(); ++f) {
          row[f] = normal(rng) + ((mask >> f) & 1 ? config.shift : 0.0);
        }
      });
  draw.points = PointSet(config.dim, std::move(values));
  return draw;
}

PointSet GenerateAlien(std::size_t n, const SynthConfig& config,
                       std::uint64_t seed) {
  return GenerateAlienWithMasks(n, config, seed).points;
}

std::string_view MixtureModeName(MixtureMode mode) {
  return mode == MixtureMode::kExactCount ? "exact_count" : "iid";
}

MixtureMode ParseMixtureMode(std::string_view name) {
  if (name == "exact_count") return MixtureMode::kExactCount;
  if (name == "iid") return MixtureMode::kIid;
  throw InvalidArgumentError(fmt::format("unknown mixture mode '{}'", name));
}

LabeledPointSet GenerateMixture(std::size_t n, double alpha, MixtureMode mode,
                                const SynthConfig& config, std::uint64_t seed) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgumentError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
  }
  Rng rng = MakeRng(seed, 0);
  std::vector<Label> labels(n, Label::kNominal);
  if (mode == MixtureMode::kExactCount) {
    const auto aliens = static_cast<std::size_t>(
        std::llround(alpha * static_cast<double>(n)));
    std::fill_n(labels.begin(), std::min(aliens, n), Label::kAlien);
    std::shuffle(labels.begin(), labels.end(), rng);
  } else {
    std::bernoulli_distribution is_alien(alpha);
    for (Label& l : labels) l = is_alien(rng) ? Label::kAlien : Label::kNominal;
  }
  const std::size_t num_aliens = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), Label::kAlien));
  const PointSet nominal =
      GenerateNominal(n - num_aliens, config, DeriveSeed(seed, 1));
  const PointSet alien = GenerateAlien(num_aliens, config, DeriveSeed(seed, 2));

  std::vector<double> values;
  values.reserve(n * config.dim);
  std::size_t next_nominal = 0;
  std::size_t next_alien = 0;
  for (const Label l : labels) {
    const auto r = l == Label::kAlien ? alien.row(next_alien++)
                                      : nominal.row(next_nominal++);
    values.insert(values.end(), r.begin(), r.end());
  }
  return LabeledPointSet(PointSet(config.dim, std::move(values)),
                         std::move(labels));
}

}  // namespace ocd
