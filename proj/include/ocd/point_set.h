#ifndef OCD_POINT_SET_H_
#define OCD_POINT_SET_H_

#include <cstddef>
#include <span>
#include <vector>

namespace ocd {

// Dense row-major matrix of feature vectors, all finite.
class PointSet {
 public:
  PointSet() = default;
  // Throws InvalidArgument unless values.size() is a multiple of dim and
  // every value is finite. dim must be >= 1.
  PointSet(std::size_t dim, std::vector<double> values);

  std::size_t size() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const { return dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<const double> values() const { return values_; }

  // Rows in `indices`, in that order.
  PointSet Subset(std::span<const std::size_t> indices) const;

  // Row-wise concatenation; throws on a dimension mismatch.
  static PointSet Concat(const PointSet& a, const PointSet& b);

  friend bool operator==(const PointSet&, const PointSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> values_;
};

}  // namespace ocd

#endif  // OCD_POINT_SET_H_
