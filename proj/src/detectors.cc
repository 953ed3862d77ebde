#include "ocd/detectors.h"

#include <fmt/format.h>

#include "ocd/iforest.h"
#include "ocd/loda.h"
#include "ocd/status.h"

namespace ocd {
namespace {

class IsolationForestDetector : public Detector {
 public:
  explicit IsolationForestDetector(const DetectorOptions& options)
      : options_(options) {}

  std::vector<double> Fit(const PointSet& clean, std::uint64_t seed) override {
    forest_ = IsolationForest::Train(
        clean, {options_.num_trees, options_.subsample_fraction, seed});
    return forest_->ScoreOutOfBag(clean);
  }

  std::vector<double> Score(const PointSet& points) const override {
    if (!forest_) throw InvalidArgumentError("detector used before Fit");
    return forest_->Score(points);
  }

 private:
  DetectorOptions options_;
  std::optional<IsolationForest> forest_;
};

class LodaDetector : public Detector {
 public:
  explicit LodaDetector(const DetectorOptions& options) : options_(options) {}

  std::vector<double> Fit(const PointSet& clean, std::uint64_t seed) override {
    model_ = Loda::Train(
        clean, {options_.num_projections, seed, options_.loda_bin_width});
    return model_->ScoreLeaveOut(clean);
  }

  std::vector<double> Score(const PointSet& points) const override {
    if (!model_) throw InvalidArgumentError("detector used before Fit");
    return model_->Score(points);
  }

 private:
  DetectorOptions options_;
  std::optional<Loda> model_;
};

}  // namespace

std::string_view DetectorName(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::kIsolationForest:
      return "iforest";
    case DetectorKind::kLoda:
      return "loda";
    case DetectorKind::kExternal:
      return "external";
  }
  return "unknown";
}

DetectorKind ParseDetectorKind(std::string_view name) {
  if (name == "iforest") return DetectorKind::kIsolationForest;
  if (name == "loda") return DetectorKind::kLoda;
  if (name == "external") return DetectorKind::kExternal;
  throw InvalidArgumentError(fmt::format("unknown detector '{}'", name));
}

std::unique_ptr<Detector> MakeDetector(const DetectorOptions& options) {
  switch (options.kind) {
    case DetectorKind::kIsolationForest:
      return std::make_unique<IsolationForestDetector>(options);
    case DetectorKind::kLoda:
      return std::make_unique<LodaDetector>(options);
    case DetectorKind::kExternal:
      break;
  }
  throw InvalidArgumentError(
      "the external detector has no feature-space model; supply score files");
}

}  // namespace ocd
