#pragma once

// Dense numeric kernels. `nfd::kernels` holds the OpenMP versions used by the
// library; `nfd::kernels::reference` holds plain serial loops with identical
// signatures, kept as the test oracle and the benchmark baseline.
//
// Parallel kernels split work only over independent output rows/samples and
// reduce partial results in a fixed order, so results do not depend on the
// thread count.

#include <cstddef>
#include <span>

namespace nfd::kernels {

/// C[M,N] (+)= op(A) * op(B), row-major. op(A) is MxK, op(B) is KxN.
/// With `ta`, A is stored KxM; with `tb`, B is stored NxK.
void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          double* C, bool accumulate = false);

/// Stride-1 square-kernel convolution over NCHW tensors with symmetric zero
/// padding `pad`.
struct ConvShape {
  std::size_t batch = 1, in_channels = 1, height = 1, width = 1;
  std::size_t out_channels = 1, kernel = 3, pad = 1;
  std::size_t out_height() const { return height + 2 * pad - kernel + 1; }
  std::size_t out_width() const { return width + 2 * pad - kernel + 1; }
  std::size_t patch() const { return in_channels * kernel * kernel; }
};

void conv2d_forward(const ConvShape& s, const double* x, const double* w, double* y);
/// Adjoint of conv2d_forward with respect to x.
void conv2d_backward_input(const ConvShape& s, const double* gy, const double* w, double* gx);
/// Adjoint of conv2d_forward with respect to w (overwrites gw).
void conv2d_backward_weight(const ConvShape& s, const double* x, const double* gy, double* gw);

/// 2x2 average pooling over `planes` HxW planes (floor on odd sizes).
void avg_pool2(std::size_t planes, std::size_t h, std::size_t w, const double* x, double* y);
/// Adjoint of avg_pool2: spreads each pooled value /4 over its window.
void unpool2(std::size_t planes, std::size_t h, std::size_t w, const double* gy, double* gx);

/// One dense layer, row-major weight [out, in].
struct DenseLayer {
  const double* weight;
  const double* bias;
  std::size_t out;
  std::size_t in;
};

/// Evaluates a sine network at `count` points: hidden layers apply
/// sin(omega0 * (W h + b)); the last layer is linear. `points` is [count, n];
/// `out` is channel-major [m, count].
void siren_forward(std::span<const DenseLayer> layers, double omega0, const double* points, std::size_t count,
                   double* out);

namespace reference {

void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          double* C, bool accumulate = false);
void conv2d_forward(const ConvShape& s, const double* x, const double* w, double* y);
void conv2d_backward_input(const ConvShape& s, const double* gy, const double* w, double* gx);
void conv2d_backward_weight(const ConvShape& s, const double* x, const double* gy, double* gw);
void avg_pool2(std::size_t planes, std::size_t h, std::size_t w, const double* x, double* y);
void unpool2(std::size_t planes, std::size_t h, std::size_t w, const double* gy, double* gx);
void siren_forward(std::span<const DenseLayer> layers, double omega0, const double* points, std::size_t count,
                   double* out);

}  // namespace reference

}  // namespace nfd::kernels
