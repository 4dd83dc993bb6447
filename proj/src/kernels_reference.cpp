#include <algorithm>
#include <cmath>
#include <vector>

#include "nfd/kernels.hpp"

namespace nfd::kernels::reference {

void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          double* C, bool accumulate) {
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      double acc = accumulate ? C[i * N + j] : 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double a = ta ? A[k * M + i] : A[i * K + k];
        const double b = tb ? B[j * K + k] : B[k * N + j];
        acc += a * b;
      }
      C[i * N + j] = acc;
    }
}

namespace {

double input_at(const ConvShape& s, const double* x, std::size_t n, std::size_t c, std::ptrdiff_t iy,
                std::ptrdiff_t ix) {
  if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(s.height) || ix >= static_cast<std::ptrdiff_t>(s.width))
    return 0.0;
  return x[((n * s.in_channels + c) * s.height + static_cast<std::size_t>(iy)) * s.width +
           static_cast<std::size_t>(ix)];
}

}  // namespace

void conv2d_forward(const ConvShape& s, const double* x, const double* w, double* y) {
  const std::size_t ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t o = 0; o < s.out_channels; ++o)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          double acc = 0.0;
          for (std::size_t c = 0; c < s.in_channels; ++c)
            for (std::size_t ki = 0; ki < k; ++ki)
              for (std::size_t kj = 0; kj < k; ++kj)
                acc += w[((o * s.in_channels + c) * k + ki) * k + kj] *
                       input_at(s, x, n, c, static_cast<std::ptrdiff_t>(oy + ki) - pad,
                                static_cast<std::ptrdiff_t>(ox + kj) - pad);
          y[((n * s.out_channels + o) * ho + oy) * wo + ox] = acc;
        }
}

void conv2d_backward_input(const ConvShape& s, const double* gy, const double* w, double* gx) {
  const std::size_t ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
  std::fill(gx, gx + s.batch * s.in_channels * s.height * s.width, 0.0);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t o = 0; o < s.out_channels; ++o)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          const double g = gy[((n * s.out_channels + o) * ho + oy) * wo + ox];
          for (std::size_t c = 0; c < s.in_channels; ++c)
            for (std::size_t ki = 0; ki < k; ++ki)
              for (std::size_t kj = 0; kj < k; ++kj) {
                const auto iy = static_cast<std::ptrdiff_t>(oy + ki) - pad;
                const auto ix = static_cast<std::ptrdiff_t>(ox + kj) - pad;
                if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(s.height) ||
                    ix >= static_cast<std::ptrdiff_t>(s.width))
                  continue;
                gx[((n * s.in_channels + c) * s.height + static_cast<std::size_t>(iy)) * s.width +
                   static_cast<std::size_t>(ix)] += g * w[((o * s.in_channels + c) * k + ki) * k + kj];
              }
        }
}

void conv2d_backward_weight(const ConvShape& s, const double* x, const double* gy, double* gw) {
  const std::size_t ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
  std::fill(gw, gw + s.out_channels * s.patch(), 0.0);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t o = 0; o < s.out_channels; ++o)
      for (std::size_t oy = 0; oy < ho; ++oy)
        for (std::size_t ox = 0; ox < wo; ++ox) {
          const double g = gy[((n * s.out_channels + o) * ho + oy) * wo + ox];
          for (std::size_t c = 0; c < s.in_channels; ++c)
            for (std::size_t ki = 0; ki < k; ++ki)
              for (std::size_t kj = 0; kj < k; ++kj)
                gw[((o * s.in_channels + c) * k + ki) * k + kj] +=
                    g * input_at(s, x, n, c, static_cast<std::ptrdiff_t>(oy + ki) - pad,
                                 static_cast<std::ptrdiff_t>(ox + kj) - pad);
        }
}

void avg_pool2(std::size_t planes, std::size_t h, std::size_t w, const double* x, double* y) {
  const std::size_t ho = h / 2, wo = w / 2;
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        double acc = 0.0;
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) acc += x[(p * h + 2 * i + a) * w + 2 * j + b];
        y[(p * ho + i) * wo + j] = acc / 4.0;
      }
}

void unpool2(std::size_t planes, std::size_t h, std::size_t w, const double* gy, double* gx) {
  const std::size_t ho = h / 2, wo = w / 2;
  std::fill(gx, gx + planes * h * w, 0.0);
  for (std::size_t p = 0; p < planes; ++p)
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j)
        for (std::size_t a = 0; a < 2; ++a)
          for (std::size_t b = 0; b < 2; ++b) gx[(p * h + 2 * i + a) * w + 2 * j + b] = gy[(p * ho + i) * wo + j] / 4.0;
}

void siren_forward(std::span<const DenseLayer> layers, double omega0, const double* points, std::size_t count,
                   double* out) {
  for (std::size_t p = 0; p < count; ++p) {
    std::vector<double> h(points + p * layers.front().in, points + (p + 1) * layers.front().in);
    for (std::size_t li = 0; li < layers.size(); ++li) {
      const DenseLayer& l = layers[li];
      std::vector<double> next(l.out);
      for (std::size_t r = 0; r < l.out; ++r) {
        double acc = l.bias[r];
        for (std::size_t c = 0; c < l.in; ++c) acc += l.weight[r * l.in + c] * h[c];
        next[r] = li + 1 == layers.size() ? acc : std::sin(omega0 * acc);
      }
      h = std::move(next);
    }
    for (std::size_t r = 0; r < h.size(); ++r) out[r * count + p] = h[r];
  }
}

}  // namespace nfd::kernels::reference
