#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nfd/codec.hpp"
#include "nfd/errors.hpp"

using namespace nfd;

namespace {

GridTensor sinusoid16() {
  GridTensor g(1, {16, 16});
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      const double y = lattice_coordinate(i, 16), x = lattice_coordinate(j, 16);
      g[i * 16 + j] = 0.5 + 0.3 * std::sin(std::numbers::pi * x) * std::cos(0.5 * std::numbers::pi * y);
    }
  return g;
}

}  // namespace

TEST_CASE("fit_field: constant target") {
  GridTensor c(1, {8, 8}, std::vector<double>(64, 0.6));
  const auto cfg = FieldConfig::uniform(2, 1, 2, 16);
  auto fit = fit_field(c, cfg, 1, {.iterations = 200});
  CHECK(fit.report.iterations == 200);
  CHECK(mse(decode(fit.field, {8, 8}), c) < 1e-4);

  auto longer = fit_field(c, cfg, 1, {.iterations = 1000});
  CHECK(mse(decode(longer.field, {8, 8}), c) < 1e-6);
  CHECK(longer.report.objective == doctest::Approx(64 * mse(decode(longer.field, {8, 8}), c)));
}

TEST_CASE("fit_field: zero iterations returns the initialization") {
  const auto cfg = FieldConfig::uniform(2, 3, 2, 5);
  auto fit = fit_field(GridTensor(3, {4, 4}), cfg, 9, {.iterations = 0});
  CHECK(fit.field == init_siren(cfg, 9));
  CHECK(fit.report.iterations == 0);
  CHECK(fit.report.seed == 9);
}

TEST_CASE("fit_field: smooth target reaches high PSNR and descends steadily") {
  const auto target = sinusoid16();
  // omega0 = 30 puts most initial frequencies far above what 16 samples resolve
  const auto cfg = FieldConfig::uniform(2, 1, 2, 9, 10.0);
  REQUIRE(param_count(cfg) >= 100);
  auto fit = fit_field(target, cfg, 2, {.iterations = 5000, .record_history = true});
  CHECK(psnr(decode(fit.field, {16, 16}), target) > 30.0);
  std::size_t down = 0;
  const auto& h = fit.report.history;
  for (std::size_t i = 1; i < h.size(); ++i) down += h[i] <= h[i - 1];
  CHECK(static_cast<double>(down) >= 0.95 * static_cast<double>(h.size() - 1));
}

TEST_CASE("fit_field: early stop and dimension checks") {
  GridTensor c(1, {4}, std::vector<double>(4, 0.0));
  auto fit = fit_field(c, FieldConfig::uniform(1, 1, 1, 2), 3, {.iterations = 100, .early_stop = 1e30});
  CHECK(fit.report.iterations == 0);
  CHECK_THROWS_AS(fit_field(c, FieldConfig::uniform(2, 1, 1, 2), 3), InvalidArgument);
  CHECK_THROWS_AS(fit_field(c, FieldConfig::uniform(1, 2, 1, 2), 3), InvalidArgument);
}

TEST_CASE("decode: lattice sharing and cross resolution") {
  const auto f = init_siren(FieldConfig::uniform(1, 1, 2, 6), 4);
  const auto a = decode(f, {2}), b = decode(f, {3});
  CHECK(a[0] == b[0]);
  CHECK(a[1] == b[2]);
  CHECK(decode(f, {5}) == decode(f, {5}));
  CHECK(decode_cross_resolution(f, {5}) == decode(f, {5}));
  CHECK(decode_cross_resolution(init_siren(FieldConfig::uniform(2, 2, 1, 3), 1), {8, 6}).shape() == Dims{8, 6});
  CHECK_THROWS_AS(decode(f, {2, 2}), InvalidArgument);
}

TEST_CASE("decode_cross_resolution: continuous ramp beats nearest upsampling") {
  GridTensor ramp(1, {8});
  for (std::size_t i = 0; i < 8; ++i) ramp[i] = 0.5 + 0.4 * lattice_coordinate(i, 8);
  auto fit = fit_field(ramp, FieldConfig::uniform(1, 1, 2, 6, 3.0), 5, {.iterations = 3000});
  GridTensor truth(1, {15});
  for (std::size_t i = 0; i < 15; ++i) truth[i] = 0.5 + 0.4 * lattice_coordinate(i, 15);
  const double field_mse = mse(decode_cross_resolution(fit.field, {15}), truth);
  const double nearest_mse = mse(resample(ramp, {15}, Interpolation::nearest), truth);
  CHECK(field_mse < nearest_mse);
}

TEST_CASE("warmup_dataset: sampling and labels") {
  LabeledDataset real;
  real.class_count = 2;
  for (std::size_t i = 0; i < 6; ++i) {
    real.instances.emplace_back(1, Dims{4, 4}, std::vector<double>(16, 0.1 * static_cast<double>(i)));
    real.labels.push_back(i % 2);
  }
  const auto cfg = FieldConfig::uniform(2, 1, 1, 3);
  const FitOptions quick{.iterations = 20};
  auto ds = warmup_dataset(real, 1, cfg, 7, quick);
  CHECK(ds.size() == 2);
  CHECK(ds.labels == std::vector<std::size_t>{0, 1});
  CHECK(ds.decode_dims == Dims{4, 4});
  CHECK(ds.class_count == 2);
  CHECK(warmup_dataset(real, 1, cfg, 7, quick) == ds);
  auto three = warmup_dataset(real, 3, cfg, 7, quick);
  CHECK(three.size() == 6);
  bool from_class0 = false;
  for (std::size_t src : {0u, 2u, 4u}) from_class0 = from_class0 || three.fields[1] == fit_field(real.instances[src], cfg, 8, quick).field;
  CHECK(from_class0);
  CHECK_THROWS_AS(warmup_dataset(real, 4, cfg, 7, quick), InvalidArgument);
}
