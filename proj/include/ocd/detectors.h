#ifndef OCD_DETECTORS_H_
#define OCD_DETECTORS_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ocd/point_set.h"

namespace ocd {

enum class DetectorKind { kIsolationForest, kLoda, kExternal };

std::string_view DetectorName(DetectorKind kind);
// "iforest", "loda" or "external".
DetectorKind ParseDetectorKind(std::string_view name);

struct DetectorOptions {
  DetectorKind kind = DetectorKind::kIsolationForest;
  int num_trees = 1000;
  double subsample_fraction = 0.2;
  int num_projections = 1000;
  std::optional<double> loda_bin_width;
};

// A detector trained on the clean set only. Fit returns out-of-bag scores for
// the clean rows; Score uses the full ensemble.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual std::vector<double> Fit(const PointSet& clean,
                                  std::uint64_t seed) = 0;
  virtual std::vector<double> Score(const PointSet& points) const = 0;
};

using DetectorFactory = std::function<std::unique_ptr<Detector>()>;

// Throws InvalidArgument for kExternal, which has no feature-space model.
std::unique_ptr<Detector> MakeDetector(const DetectorOptions& options);

}  // namespace ocd

#endif  // OCD_DETECTORS_H_
