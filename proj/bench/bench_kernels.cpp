// Parallel kernels against their serial references, plus whole-pipeline steps.

#include <benchmark/benchmark.h>

#include <vector>

#include "nfd/codec.hpp"
#include "nfd/field.hpp"
#include "nfd/kernels.hpp"
#include "nfd/rng.hpp"

namespace {

using namespace nfd;
namespace k = nfd::kernels;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -1.0, 1.0);
  return v;
}

template <bool Parallel>
void BM_gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::gemm(false, false, n, n, n, a.data(), b.data(), c.data());
    else
      k::reference::gemm(false, false, n, n, n, a.data(), b.data(), c.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_gemm<true>)->Name("gemm/parallel")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm<false>)->Name("gemm/reference")->Arg(64)->Arg(256);

// ConvNet first block on a batch of 16x16 images
k::ConvShape conv_shape(std::size_t batch) {
  k::ConvShape s;
  s.batch = batch;
  s.in_channels = 3;
  s.height = s.width = 16;
  s.out_channels = 16;
  return s;
}

template <bool Parallel>
void BM_conv2d(benchmark::State& state) {
  const auto s = conv_shape(static_cast<std::size_t>(state.range(0)));
  const auto x = random_vector(s.batch * s.in_channels * s.height * s.width, 3);
  const auto w = random_vector(s.out_channels * s.patch(), 4);
  std::vector<double> y(s.batch * s.out_channels * s.out_height() * s.out_width()), gx(x.size()), gw(w.size());
  for (auto _ : state) {
    if constexpr (Parallel) {
      k::conv2d_forward(s, x.data(), w.data(), y.data());
      k::conv2d_backward_input(s, y.data(), w.data(), gx.data());
      k::conv2d_backward_weight(s, x.data(), y.data(), gw.data());
    } else {
      k::reference::conv2d_forward(s, x.data(), w.data(), y.data());
      k::reference::conv2d_backward_input(s, y.data(), w.data(), gx.data());
      k::reference::conv2d_backward_weight(s, x.data(), y.data(), gw.data());
    }
    benchmark::DoNotOptimize(gw.data());
  }
}
BENCHMARK(BM_conv2d<true>)->Name("conv2d_fwd_bwd/parallel")->Arg(64);
BENCHMARK(BM_conv2d<false>)->Name("conv2d_fwd_bwd/reference")->Arg(64);

template <bool Parallel>
void BM_siren(benchmark::State& state) {
  const auto cfg = FieldConfig::uniform(2, 3, 3, 20);
  const auto f = init_siren(cfg, 5);
  std::vector<k::DenseLayer> layers;
  for (std::size_t l = 0; l < f.layer_count(); ++l)
    layers.push_back({f.weights[l].data(), f.biases[l].data(), f.layer_rows(l), f.layer_cols(l)});
  const auto side = static_cast<std::size_t>(state.range(0));
  const auto coords = make_coordinate_set({side, side});
  std::vector<double> out(3 * side * side);
  for (auto _ : state) {
    if constexpr (Parallel)
      k::siren_forward(layers, cfg.omega0, coords.points.data(), side * side, out.data());
    else
      k::reference::siren_forward(layers, cfg.omega0, coords.points.data(), side * side, out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_siren<true>)->Name("siren_decode/parallel")->Arg(32)->Arg(128);
BENCHMARK(BM_siren<false>)->Name("siren_decode/reference")->Arg(32)->Arg(128);

void BM_fit_step(benchmark::State& state) {
  const auto cfg = FieldConfig::uniform(2, 3, 2, 6);
  GridTensor target(3, {32, 32}, random_vector(3 * 32 * 32, 6));
  for (auto _ : state) benchmark::DoNotOptimize(fit_field(target, cfg, 7, {.iterations = 10, .lr = 5e-4}).report.objective);
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_fit_step)->Name("fit_field/10_steps_32x32");

}  // namespace

BENCHMARK_MAIN();
