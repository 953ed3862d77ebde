#include "ocd/point_set.h"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "ocd/status.h"

namespace ocd {

PointSet::PointSet(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0) throw InvalidArgumentError("point dimension must be >= 1");
  if (values_.size() % dim_ != 0) {
    throw InvalidArgumentError(fmt::format(
        "{} values do not form rows of dimension {}", values_.size(), dim_));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw InvalidArgumentError(fmt::format(
          "non-finite feature at row {}, column {}", i / dim_, i % dim_));
    }
  }
}

PointSet PointSet::Subset(std::span<const std::size_t> indices) const {
  PointSet out;
  out.dim_ = dim_;
  out.values_.reserve(indices.size() * dim_);
  for (const std::size_t i : indices) {
    const auto r = row(i);
    out.values_.insert(out.values_.end(), r.begin(), r.end());
  }
  return out;
}

PointSet PointSet::Concat(const PointSet& a, const PointSet& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.dim_ != b.dim_) {
    throw InvalidArgumentError(fmt::format(
        "cannot concatenate dimension {} with dimension {}", a.dim_, b.dim_));
  }
  PointSet out = a;
  out.values_.insert(out.values_.end(), b.values_.begin(), b.values_.end());
  return out;
}

}  // namespace ocd
