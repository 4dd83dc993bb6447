#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace nfd {

using Dims = std::vector<std::size_t>;

/// Product of all entries; 1 for an empty list.
std::size_t product(const Dims& dims);

/// Dense grid with `channels` values per lattice point, stored channel-major,
/// then row-major over the spatial axes (axis 0 slowest).
class GridTensor {
 public:
  GridTensor() = default;
  /// Zero-filled grid.
  GridTensor(std::size_t channels, Dims shape);
  GridTensor(std::size_t channels, Dims shape, std::vector<double> values);

  std::size_t channels() const { return channels_; }
  const Dims& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  /// Number of lattice points (product of the shape).
  std::size_t points() const { return points_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> channel(std::size_t c) const {
    return std::span<const double>(values_).subspan(c * points_, points_);
  }
  std::span<double> channel(std::size_t c) {
    return std::span<double>(values_).subspan(c * points_, points_);
  }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool operator==(const GridTensor&) const = default;

 private:
  std::size_t channels_ = 0;
  Dims shape_;
  std::size_t points_ = 0;
  std::vector<double> values_;
};

/// Normalized lattice on [-1,1]^n with inclusive endpoints. Axis k of size
/// N >= 2 has components -1 + 2i/(N-1); a size-1 axis sits at 0.
struct CoordinateSet {
  Dims dims;
  /// Flattened n-vectors, lexicographic over axis indices (axis 0 slowest).
  std::vector<double> points;

  std::size_t rank() const { return dims.size(); }
  std::size_t size() const { return dims.empty() ? 0 : points.size() / dims.size(); }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(points).subspan(i * dims.size(), dims.size());
  }
};

CoordinateSet make_coordinate_set(const Dims& dims);

/// Coordinate of index i on an axis of size n (align-corners convention).
double lattice_coordinate(std::size_t i, std::size_t n);

enum class Interpolation { nearest, bilinear, bicubic };

Interpolation parse_interpolation(std::string_view name);

/// Separable resampling with the align-corners convention, for rank 1..3.
GridTensor resample(const GridTensor& g, const Dims& target, Interpolation method);

/// Orthonormal DCT-II along every spatial axis, per channel (rank 1..3).
GridTensor dct(const GridTensor& g);
/// Inverse of `dct` (orthonormal DCT-III).
GridTensor idct(const GridTensor& c);

double mse(const GridTensor& a, const GridTensor& b);
/// 10*log10(peak^2/mse); +infinity when the grids are identical.
double psnr(const GridTensor& a, const GridTensor& b, double peak = 1.0);

struct LabeledDataset {
  std::vector<GridTensor> instances;
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return instances.size(); }
  /// Throws InvalidArgument when lengths, labels or instance shapes disagree.
  void validate() const;
  /// Indices of instances carrying `label`, in dataset order.
  std::vector<std::size_t> indices_of(std::size_t label) const;
  bool operator==(const LabeledDataset&) const = default;
};

}  // namespace nfd
