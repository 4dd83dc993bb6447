#include "nfd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace nfd::kernels {

namespace {

// Row-major op(A) [M,K] times row-major B [K,N] for rows [r0, r1).
void gemm_rows(std::size_t r0, std::size_t r1, std::size_t N, std::size_t K, const double* A, const double* B,
               double* C) {
  for (std::size_t i = r0; i < r1; ++i) {
    double* c = C + i * N;
    const double* a = A + i * K;
    for (std::size_t k = 0; k < K; ++k) {
      const double av = a[k];
      if (av == 0.0) continue;
      const double* b = B + k * N;
      for (std::size_t j = 0; j < N; ++j) c[j] += av * b[j];
    }
  }
}

void transpose(std::size_t rows, std::size_t cols, const double* src, double* dst) {
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * cols + c];
}

// Serial GEMM used inside already-parallel loops.
void gemm_serial(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
                 double* C, bool accumulate, std::vector<double>& scratch_a, std::vector<double>& scratch_b) {
  if (!accumulate) std::fill(C, C + M * N, 0.0);
  const double* a = A;
  const double* b = B;
  if (ta) {
    scratch_a.resize(M * K);
    transpose(K, M, A, scratch_a.data());
    a = scratch_a.data();
  }
  if (tb) {
    scratch_b.resize(K * N);
    transpose(N, K, B, scratch_b.data());
    b = scratch_b.data();
  }
  gemm_rows(0, M, N, K, a, b, C);
}

void im2col(const ConvShape& s, const double* x, double* col) {
  const std::size_t ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
  for (std::size_t c = 0; c < s.in_channels; ++c)
    for (std::size_t ki = 0; ki < k; ++ki)
      for (std::size_t kj = 0; kj < k; ++kj) {
        double* row = col + ((c * k + ki) * k + kj) * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ki) - pad;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kj) - pad;
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(s.height) &&
                                ix < static_cast<std::ptrdiff_t>(s.width);
            row[oy * wo + ox] =
                inside ? x[(c * s.height + static_cast<std::size_t>(iy)) * s.width + static_cast<std::size_t>(ix)]
                       : 0.0;
          }
        }
      }
}

void col2im(const ConvShape& s, const double* col, double* x) {
  const std::size_t ho = s.out_height(), wo = s.out_width(), k = s.kernel;
  const auto pad = static_cast<std::ptrdiff_t>(s.pad);
  std::fill(x, x + s.in_channels * s.height * s.width, 0.0);
  for (std::size_t c = 0; c < s.in_channels; ++c)
    for (std::size_t ki = 0; ki < k; ++ki)
      for (std::size_t kj = 0; kj < k; ++kj) {
        const double* row = col + ((c * k + ki) * k + kj) * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ki) - pad;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(s.height)) continue;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kj) - pad;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(s.width)) continue;
            x[(c * s.height + static_cast<std::size_t>(iy)) * s.width + static_cast<std::size_t>(ix)] +=
                row[oy * wo + ox];
          }
        }
      }
}

}  // namespace

void gemm(bool ta, bool tb, std::size_t M, std::size_t N, std::size_t K, const double* A, const double* B,
          double* C, bool accumulate) {
  if (!accumulate) std::fill(C, C + M * N, 0.0);
  if (M == 0 || N == 0 || K == 0) return;
  std::vector<double> a_buf, b_buf;
  const double* a = A;
  const double* b = B;
  if (ta) {
    a_buf.resize(M * K);
    transpose(K, M, A, a_buf.data());
    a = a_buf.data();
  }
  if (tb) {
    b_buf.resize(K * N);
    transpose(N, K, B, b_buf.data());
    b = b_buf.data();
  }
  constexpr std::size_t rows_per_task = 8;
  const auto tasks = static_cast<std::ptrdiff_t>((M + rows_per_task - 1) / rows_per_task);
  // small products are not worth waking the team
  const bool parallel = M * N * K > (1u << 15);
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t t = 0; t < tasks; ++t) {
    const std::size_t r0 = static_cast<std::size_t>(t) * rows_per_task;
    gemm_rows(r0, std::min(M, r0 + rows_per_task), N, K, a, b, C);
  }
}

void conv2d_forward(const ConvShape& s, const double* x, const double* w, double* y) {
  const std::size_t in_plane = s.in_channels * s.height * s.width;
  const std::size_t out_plane = s.out_channels * s.out_height() * s.out_width();
  const std::size_t cols = s.out_height() * s.out_width();
#pragma omp parallel
  {
    std::vector<double> col(s.patch() * cols), sa, sb;
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(s.batch); ++n) {
      const auto nn = static_cast<std::size_t>(n);
      im2col(s, x + nn * in_plane, col.data());
      gemm_serial(false, false, s.out_channels, cols, s.patch(), w, col.data(), y + nn * out_plane, false, sa,
                  sb);
    }
  }
}

void conv2d_backward_input(const ConvShape& s, const double* gy, const double* w, double* gx) {
  const std::size_t in_plane = s.in_channels * s.height * s.width;
  const std::size_t out_plane = s.out_channels * s.out_height() * s.out_width();
  const std::size_t cols = s.out_height() * s.out_width();
#pragma omp parallel
  {
    std::vector<double> col(s.patch() * cols), sa, sb;
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(s.batch); ++n) {
      const auto nn = static_cast<std::size_t>(n);
      gemm_serial(true, false, s.patch(), cols, s.out_channels, w, gy + nn * out_plane, col.data(), false, sa,
                  sb);
      col2im(s, col.data(), gx + nn * in_plane);
    }
  }
}

void conv2d_backward_weight(const ConvShape& s, const double* x, const double* gy, double* gw) {
  const std::size_t in_plane = s.in_channels * s.height * s.width;
  const std::size_t out_plane = s.out_channels * s.out_height() * s.out_width();
  const std::size_t cols = s.out_height() * s.out_width();
  const std::size_t wsize = s.out_channels * s.patch();
  std::vector<double> partial(s.batch * wsize);
#pragma omp parallel
  {
    std::vector<double> col(s.patch() * cols), sa, sb;
#pragma omp for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(s.batch); ++n) {
      const auto nn = static_cast<std::size_t>(n);
      im2col(s, x + nn * in_plane, col.data());
      gemm_serial(false, true, s.out_channels, s.patch(), cols, gy + nn * out_plane, col.data(),
                  partial.data() + nn * wsize, false, sa, sb);
    }
  }
  std::fill(gw, gw + wsize, 0.0);
  for (std::size_t n = 0; n < s.batch; ++n)
    for (std::size_t i = 0; i < wsize; ++i) gw[i] += partial[n * wsize + i];
}

void avg_pool2(std::size_t planes, std::size_t h, std::size_t w, const double* x, double* y) {
  const std::size_t ho = h / 2, wo = w / 2;
#pragma omp parallel for schedule(static) if (planes * h * w > (1u << 14))
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(planes); ++p) {
    const double* src = x + static_cast<std::size_t>(p) * h * w;
    double* dst = y + static_cast<std::size_t>(p) * ho * wo;
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        const double* a = src + 2 * i * w + 2 * j;
        dst[i * wo + j] = 0.25 * (a[0] + a[1] + a[w] + a[w + 1]);
      }
  }
}

void unpool2(std::size_t planes, std::size_t h, std::size_t w, const double* gy, double* gx) {
  const std::size_t ho = h / 2, wo = w / 2;
#pragma omp parallel for schedule(static) if (planes * h * w > (1u << 14))
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(planes); ++p) {
    const double* src = gy + static_cast<std::size_t>(p) * ho * wo;
    double* dst = gx + static_cast<std::size_t>(p) * h * w;
    std::fill(dst, dst + h * w, 0.0);
    for (std::size_t i = 0; i < ho; ++i)
      for (std::size_t j = 0; j < wo; ++j) {
        const double v = 0.25 * src[i * wo + j];
        double* a = dst + 2 * i * w + 2 * j;
        a[0] = v;
        a[1] = v;
        a[w] = v;
        a[w + 1] = v;
      }
  }
}

void siren_forward(std::span<const DenseLayer> layers, double omega0, const double* points, std::size_t count,
                   double* out) {
  if (layers.empty() || count == 0) return;
  std::size_t widest = 0;
  for (const auto& l : layers) widest = std::max(widest, l.out);
  const std::size_t n = layers.front().in;
  constexpr std::size_t block = 64;
  const auto blocks = static_cast<std::ptrdiff_t>((count + block - 1) / block);
#pragma omp parallel
  {
    std::vector<double> a(widest), b(widest);
#pragma omp for schedule(static)
    for (std::ptrdiff_t bi = 0; bi < blocks; ++bi) {
      const std::size_t p0 = static_cast<std::size_t>(bi) * block;
      const std::size_t p1 = std::min(count, p0 + block);
      for (std::size_t p = p0; p < p1; ++p) {
        const double* in = points + p * n;
        for (std::size_t li = 0; li < layers.size(); ++li) {
          const DenseLayer& l = layers[li];
          const bool last = li + 1 == layers.size();
          for (std::size_t r = 0; r < l.out; ++r) {
            double acc = l.bias[r];
            const double* wr = l.weight + r * l.in;
            for (std::size_t c = 0; c < l.in; ++c) acc += wr[c] * in[c];
            if (last)
              out[r * count + p] = acc;
            else
              b[r] = std::sin(omega0 * acc);
          }
          std::swap(a, b);
          in = a.data();
        }
      }
    }
  }
}

}  // namespace nfd::kernels
