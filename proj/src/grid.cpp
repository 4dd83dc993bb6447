#include "nfd/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <string>

#include "nfd/errors.hpp"

namespace nfd {

std::size_t product(const Dims& dims) {
  std::size_t p = 1;
  for (auto d : dims) p *= d;
  return p;
}

GridTensor::GridTensor(std::size_t channels, Dims shape)
    : GridTensor(channels, shape, std::vector<double>(channels * product(shape), 0.0)) {}

GridTensor::GridTensor(std::size_t channels, Dims shape, std::vector<double> values)
    : channels_(channels), shape_(std::move(shape)), points_(product(shape_)), values_(std::move(values)) {
  if (channels_ == 0) throw InvalidArgument("grid needs at least one channel");
  if (shape_.empty()) throw InvalidArgument("grid needs at least one spatial axis");
  for (auto d : shape_)
    if (d == 0) throw InvalidArgument("grid axes must be positive");
  if (values_.size() != channels_ * points_)
    throw InvalidArgument("grid value count " + std::to_string(values_.size()) + " != " +
                          std::to_string(channels_ * points_));
}

double lattice_coordinate(std::size_t i, std::size_t n) {
  if (n <= 1) return 0.0;
  // integer numerator keeps the lattice exactly symmetric about 0
  const auto num = 2 * static_cast<std::int64_t>(i) - static_cast<std::int64_t>(n - 1);
  return static_cast<double>(num) / static_cast<double>(n - 1);
}

CoordinateSet make_coordinate_set(const Dims& dims) {
  if (dims.empty()) throw InvalidArgument("coordinate set needs at least one axis");
  for (auto d : dims)
    if (d == 0) throw InvalidArgument("coordinate axes must be positive");
  CoordinateSet cs;
  cs.dims = dims;
  const std::size_t n = dims.size();
  const std::size_t count = product(dims);
  cs.points.resize(count * n);
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t p = 0; p < count; ++p) {
    for (std::size_t k = 0; k < n; ++k) cs.points[p * n + k] = lattice_coordinate(idx[k], dims[k]);
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < dims[k]) break;
      idx[k] = 0;
    }
  }
  return cs;
}

Interpolation parse_interpolation(std::string_view name) {
  if (name == "nearest") return Interpolation::nearest;
  if (name == "bilinear" || name == "linear") return Interpolation::bilinear;
  if (name == "bicubic" || name == "cubic") return Interpolation::bicubic;
  throw InvalidArgument("unknown interpolation '" + std::string(name) + "'");
}

namespace {

struct Tap {
  std::size_t src;
  double weight;
};

double cubic_weight(double t) {
  // Keys kernel, a = -0.5
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return (((t - 5.0) * t + 8.0) * t - 4.0) * a;
  return 0.0;
}

std::vector<std::vector<Tap>> axis_taps(std::size_t in, std::size_t out, Interpolation method) {
  std::vector<std::vector<Tap>> taps(out);
  const auto last = static_cast<std::ptrdiff_t>(in) - 1;
  for (std::size_t i = 0; i < out; ++i) {
    // output coordinate t in [-1,1] maps to input position (t+1)/2 * (in-1)
    const double s = (lattice_coordinate(i, out) + 1.0) * 0.5 * static_cast<double>(in - 1);
    switch (method) {
      case Interpolation::nearest: {
        auto j = static_cast<std::ptrdiff_t>(std::floor(s + 0.5));
        taps[i].push_back({static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, last)), 1.0});
        break;
      }
      case Interpolation::bilinear: {
        const double f = std::floor(s);
        const double frac = s - f;
        auto j = static_cast<std::ptrdiff_t>(f);
        taps[i].push_back({static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j, 0, last)), 1.0 - frac});
        if (frac > 0.0)
          taps[i].push_back({static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j + 1, 0, last)), frac});
        break;
      }
      case Interpolation::bicubic: {
        const double f = std::floor(s);
        const double frac = s - f;
        auto j = static_cast<std::ptrdiff_t>(f);
        for (std::ptrdiff_t o = -1; o <= 2; ++o) {
          const double w = cubic_weight(static_cast<double>(o) - frac);
          if (w != 0.0)
            taps[i].push_back({static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(j + o, 0, last)), w});
        }
        break;
      }
    }
  }
  return taps;
}

// Resample one axis of a [outer, in, inner] block into [outer, out, inner].
std::vector<double> resample_axis(const std::vector<double>& src, std::size_t outer, std::size_t in,
                                  std::size_t inner, std::size_t out, Interpolation method) {
  const auto taps = axis_taps(in, out, method);
  std::vector<double> dst(outer * out * inner, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t o = 0; o < static_cast<std::ptrdiff_t>(outer); ++o) {
    const double* s = src.data() + static_cast<std::size_t>(o) * in * inner;
    double* d = dst.data() + static_cast<std::size_t>(o) * out * inner;
    for (std::size_t i = 0; i < out; ++i)
      for (const Tap& t : taps[i])
        for (std::size_t q = 0; q < inner; ++q) d[i * inner + q] += t.weight * s[t.src * inner + q];
  }
  return dst;
}

void check_transform_rank(const GridTensor& g, const char* what) {
  if (g.rank() < 1 || g.rank() > 3)
    throw UnsupportedRank(std::string(what) + " supports rank 1..3, got " + std::to_string(g.rank()));
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Orthonormal scale for DCT index k on an axis of size n.
double ortho_scale(std::size_t k, std::size_t n) {
  return k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
}

GridTensor dct_impl(const GridTensor& g, bool inverse) {
  const Dims& shape = g.shape();
  const int rank = static_cast<int>(shape.size());
  std::vector<int> n(shape.begin(), shape.end());
  std::vector<fftw_r2r_kind> kinds(shape.size(), inverse ? FFTW_REDFT01 : FFTW_REDFT10);
  const std::size_t pts = g.points();

  // per-point scale factor, separable over axes
  std::vector<double> scale(pts, 1.0);
  {
    std::vector<std::size_t> idx(shape.size(), 0);
    for (std::size_t p = 0; p < pts; ++p) {
      double s = 1.0;
      for (std::size_t a = 0; a < shape.size(); ++a) {
        const double o = ortho_scale(idx[a], shape[a]);
        s *= inverse ? (idx[a] == 0 ? o : 0.5 * o) : 0.5 * o;
      }
      scale[p] = s;
      for (std::size_t a = shape.size(); a-- > 0;) {
        if (++idx[a] < shape[a]) break;
        idx[a] = 0;
      }
    }
  }

  double* buf = fftw_alloc_real(pts);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    plan = fftw_plan_r2r(rank, n.data(), buf, buf, kinds.data(), FFTW_ESTIMATE);
  }
  GridTensor out(g.channels(), shape);
  for (std::size_t c = 0; c < g.channels(); ++c) {
    auto src = g.channel(c);
    auto dst = out.channel(c);
    if (inverse) {
      for (std::size_t p = 0; p < pts; ++p) buf[p] = src[p] * scale[p];
      fftw_execute(plan);
      std::copy(buf, buf + pts, dst.begin());
    } else {
      std::copy(src.begin(), src.end(), buf);
      fftw_execute(plan);
      for (std::size_t p = 0; p < pts; ++p) dst[p] = buf[p] * scale[p];
    }
  }
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(buf);
  return out;
}

void check_same_layout(const GridTensor& a, const GridTensor& b) {
  if (a.channels() != b.channels() || a.shape() != b.shape())
    throw InvalidArgument("grids differ in channels or shape");
}

}  // namespace

GridTensor resample(const GridTensor& g, const Dims& target, Interpolation method) {
  check_transform_rank(g, "resample");
  if (target.size() != g.rank())
    throw UnsupportedRank("resample target rank " + std::to_string(target.size()) + " != grid rank " +
                          std::to_string(g.rank()));
  for (auto d : target)
    if (d == 0) throw InvalidArgument("resample target axes must be positive");

  Dims cur = g.shape();
  std::vector<double> data(g.values().begin(), g.values().end());
  for (std::size_t axis = 0; axis < cur.size(); ++axis) {
    if (cur[axis] == target[axis] && method == Interpolation::nearest) continue;
    std::size_t inner = 1;
    for (std::size_t a = axis + 1; a < cur.size(); ++a) inner *= cur[a];
    std::size_t outer = g.channels();
    for (std::size_t a = 0; a < axis; ++a) outer *= cur[a];
    data = resample_axis(data, outer, cur[axis], inner, target[axis], method);
    cur[axis] = target[axis];
  }
  return GridTensor(g.channels(), cur, std::move(data));
}

GridTensor dct(const GridTensor& g) {
  check_transform_rank(g, "dct");
  return dct_impl(g, false);
}

GridTensor idct(const GridTensor& c) {
  check_transform_rank(c, "idct");
  return dct_impl(c, true);
}

double mse(const GridTensor& a, const GridTensor& b) {
  check_same_layout(a, b);
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const GridTensor& a, const GridTensor& b, double peak) {
  const double e = mse(a, b);
  if (e == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(peak * peak / e);
}

void LabeledDataset::validate() const {
  if (instances.size() != labels.size()) throw InvalidArgument("dataset instance/label count mismatch");
  for (auto l : labels)
    if (l >= class_count)
      throw InvalidArgument("label " + std::to_string(l) + " >= class count " + std::to_string(class_count));
  for (const auto& g : instances)
    if (g.channels() != instances.front().channels() || g.shape() != instances.front().shape())
      throw InvalidArgument("dataset instances must share channels and shape");
}

std::vector<std::size_t> LabeledDataset::indices_of(std::size_t label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) out.push_back(i);
  return out;
}

}  // namespace nfd
