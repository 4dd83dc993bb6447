#include "nfd/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nfd/errors.hpp"
#include "nfd/rng.hpp"

namespace nfd {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void require_size(std::size_t classes, std::size_t size, std::size_t per_class) {
  if (classes == 0 || per_class == 0) throw InvalidArgument("generator needs classes and instances");
  if (size < 4) throw InvalidArgument("generator needs images of at least 4x4");
}

}  // namespace

LabeledDataset make_blobs(std::size_t classes, std::size_t size, std::size_t per_class, std::uint64_t seed) {
  require_size(classes, size, per_class);
  Rng rng = make_rng(derive_seed(seed, "blobs"));
  LabeledDataset ds;
  ds.class_count = classes;
  for (std::size_t i = 0; i < classes * per_class; ++i) {
    const std::size_t c = i % classes;
    // class centres on a circle of radius 0.5
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    const double cx = 0.5 * std::cos(theta) + uniform(rng, -0.15, 0.15);
    const double cy = 0.5 * std::sin(theta) + uniform(rng, -0.15, 0.15);
    const double sigma = uniform(rng, 0.25, 0.4);
    const double amp = uniform(rng, 0.6, 0.9);
    GridTensor g(1, {size, size});
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t q = 0; q < size; ++q) {
        const double y = lattice_coordinate(r, size), x = lattice_coordinate(q, size);
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        g[r * size + q] = clamp01(0.1 + amp * std::exp(-d2 / (2 * sigma * sigma)) + 0.03 * normal(rng));
      }
    ds.instances.push_back(std::move(g));
    ds.labels.push_back(c);
  }
  return ds;
}

LabeledDataset make_shapes(std::size_t classes, std::size_t size, std::size_t per_class, std::uint64_t seed) {
  require_size(classes, size, per_class);
  if (classes > 3) throw InvalidArgument("shapes generator has 3 classes (discs, squares, stripes)");
  Rng rng = make_rng(derive_seed(seed, "shapes"));
  LabeledDataset ds;
  ds.class_count = classes;
  for (std::size_t i = 0; i < classes * per_class; ++i) {
    const std::size_t c = i % classes;
    const double cx = uniform(rng, -0.35, 0.35), cy = uniform(rng, -0.35, 0.35);
    const double radius = uniform(rng, 0.4, 0.65);
    // squares stay near axis-aligned so their corners remain visible at 16 px
    const double angle = c == 1 ? uniform(rng, -0.25, 0.25) : uniform(rng, 0.0, std::numbers::pi);
    const double bg = uniform(rng, 0.05, 0.35);
    const double fg = uniform(rng, 0.65, 0.95);
    const double period = uniform(rng, 0.35, 0.6);
    const double tex_fx = uniform(rng, 1.0, 3.0), tex_fy = uniform(rng, 1.0, 3.0), tex_ph = uniform(rng, 0.0, 6.3);
    const double ca = std::cos(angle), sa = std::sin(angle);
    GridTensor g(1, {size, size});
    for (std::size_t r = 0; r < size; ++r)
      for (std::size_t q = 0; q < size; ++q) {
        const double y = lattice_coordinate(r, size), x = lattice_coordinate(q, size);
        const double u = ca * (x - cx) + sa * (y - cy), v = -sa * (x - cx) + ca * (y - cy);
        double inside = 0.0;
        if (c == 0) {
          inside = u * u + v * v <= radius * radius ? 1.0 : 0.0;
        } else if (c == 1) {
          inside = std::max(std::abs(u), std::abs(v)) <= 0.8 * radius ? 1.0 : 0.0;
        } else {
          const bool in_patch = std::max(std::abs(u), std::abs(v)) <= 1.3 * radius;
          inside = in_patch && std::fmod(std::abs(u) + 10.0 * period, period) < 0.5 * period ? 1.0 : 0.0;
        }
        const double texture = 0.05 * std::sin(std::numbers::pi * (tex_fx * x + tex_fy * y) + tex_ph);
        g[r * size + q] = clamp01(bg + (fg - bg) * inside + texture + 0.02 * normal(rng));
      }
    ds.instances.push_back(std::move(g));
    ds.labels.push_back(c);
  }
  return ds;
}

double SmoothImage::value(std::size_t ch, double x, double y) const {
  double v = base[ch] + gradient_x[ch] * x + gradient_y[ch] * y;
  for (const auto& b : blobs) {
    const double ca = std::cos(b.angle), sa = std::sin(b.angle);
    const double u = ca * (x - b.cx) + sa * (y - b.cy), w = -sa * (x - b.cx) + ca * (y - b.cy);
    v += b.color[ch] * std::exp(-0.5 * (u * u / (b.sx * b.sx) + w * w / (b.sy * b.sy)));
  }
  return v;
}

GridTensor SmoothImage::render(const Dims& dims) const {
  if (dims.size() != 2) throw UnsupportedRank("smooth images are 2-D");
  GridTensor g(channels, dims);
  for (std::size_t ch = 0; ch < channels; ++ch)
    for (std::size_t r = 0; r < dims[0]; ++r)
      for (std::size_t q = 0; q < dims[1]; ++q)
        g.channel(ch)[r * dims[1] + q] = value(ch, lattice_coordinate(q, dims[1]), lattice_coordinate(r, dims[0]));
  return g;
}

std::vector<SmoothImage> make_smooth_images(std::size_t count, std::size_t channels, std::uint64_t seed) {
  if (channels == 0) throw InvalidArgument("smooth images need at least one channel");
  Rng rng = make_rng(derive_seed(seed, "smooth"));
  // colours are a shared intensity plus a small per-channel tint, so channels
  // are strongly correlated as in natural images
  auto tinted = [&](double intensity, double tint) {
    std::vector<double> c(channels);
    for (auto& v : c) v = intensity * (1.0 + uniform(rng, -tint, tint));
    return c;
  };
  std::vector<SmoothImage> out(count);
  for (auto& img : out) {
    img.channels = channels;
    img.base = tinted(uniform(rng, 0.3, 0.6), 0.2);
    img.gradient_x = tinted(uniform(rng, -0.15, 0.15), 0.3);
    img.gradient_y = tinted(uniform(rng, -0.15, 0.15), 0.3);
    const std::size_t blobs = 2 + uniform_index(rng, 2);
    for (std::size_t b = 0; b < blobs; ++b) {
      SmoothImage::Blob blob;
      blob.cx = uniform(rng, -0.6, 0.6);
      blob.cy = uniform(rng, -0.6, 0.6);
      blob.sx = uniform(rng, 0.2, 0.5);
      blob.sy = uniform(rng, 0.2, 0.5);
      blob.angle = uniform(rng, 0.0, std::numbers::pi);
      blob.color = tinted(uniform(rng, -0.35, 0.35), 0.3);
      img.blobs.push_back(std::move(blob));
    }
  }
  return out;
}

}  // namespace nfd
