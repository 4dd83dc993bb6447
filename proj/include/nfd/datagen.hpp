#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "nfd/grid.hpp"

namespace nfd {

/// Single-channel N x N images, one Gaussian bump per class at a
/// class-specific position, with jittered centre, width, amplitude and pixel
/// noise.
LabeledDataset make_blobs(std::size_t classes, std::size_t size, std::size_t per_class, std::uint64_t seed);

/// Single-channel N x N procedural shapes: class 0 discs, class 1 squares,
/// class 2 stripe patches. Position, size, orientation, contrast and a
/// low-amplitude background texture vary per instance.
LabeledDataset make_shapes(std::size_t classes, std::size_t size, std::size_t per_class, std::uint64_t seed);

/// Continuous colour image on [-1,1]^2: a linear colour gradient plus a few
/// anisotropic Gaussian blobs. `render` samples it on any lattice, so the same
/// image is available at several resolutions.
struct SmoothImage {
  struct Blob {
    double cx, cy, sx, sy, angle;
    std::vector<double> color;
  };
  std::size_t channels = 3;
  std::vector<double> base;
  std::vector<double> gradient_x;
  std::vector<double> gradient_y;
  std::vector<Blob> blobs;

  double value(std::size_t channel, double x, double y) const;
  GridTensor render(const Dims& dims) const;
};

std::vector<SmoothImage> make_smooth_images(std::size_t count, std::size_t channels, std::uint64_t seed);

}  // namespace nfd
