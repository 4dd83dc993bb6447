#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nfd/baselines.hpp"
#include "nfd/datagen.hpp"
#include "nfd/errors.hpp"
#include "nfd/rng.hpp"

using namespace nfd;

namespace {

GridTensor random_grid(std::size_t channels, const Dims& dims, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  GridTensor g(channels, dims);
  for (auto& v : g.values()) v = uniform(rng, -1.0, 1.0);
  return g;
}

// Orthonormal DCT-II basis vector `k` on `n` samples, evaluated directly.
double basis(std::size_t k, std::size_t i, std::size_t n) {
  const double s = k == 0 ? std::sqrt(1.0 / static_cast<double>(n)) : std::sqrt(2.0 / static_cast<double>(n));
  return s * std::cos(std::numbers::pi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(k) /
                      (2.0 * static_cast<double>(n)));
}

}  // namespace

TEST_CASE("method names round trip") {
  for (auto m : {Method::ddif, Method::fred, Method::idc, Method::vanilla}) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS_AS(parse_method("jpeg"), InvalidArgument);
}

TEST_CASE("fred_select_mask: varying atom wins, constants fall back to DC") {
  // two instances differing only along DCT atom (1, 2)
  std::vector<GridTensor> two;
  for (double a : {-1.0, 1.0}) {
    GridTensor g(1, {4, 4});
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) g[i * 4 + j] = 0.5 + a * basis(1, i, 4) * basis(2, j, 4);
    two.push_back(g);
  }
  auto mask = fred_select_mask(two, 1);
  CHECK(mask.indices() == std::vector<std::size_t>{1 * 4 + 2});

  GridTensor c(2, {3, 5}, std::vector<double>(30, 0.7));
  auto dc = fred_select_mask(std::span<const GridTensor>(&c, 1), 1);
  CHECK(dc.indices() == std::vector<std::size_t>{0});
  CHECK(fred_select_mask(std::span<const GridTensor>(&c, 1), 15) == full_mask({3, 5}));
  CHECK_THROWS_AS(fred_select_mask(std::span<const GridTensor>(&c, 1), 16), InvalidArgument);
  CHECK_THROWS_AS(fred_select_mask(std::span<const GridTensor>(&c, 1), 0), InvalidArgument);
}

TEST_CASE("fred encode/decode: full mask is lossless, nested masks improve") {
  const auto g = random_grid(3, {6, 5}, 1);
  const auto full = full_mask(g.shape());
  const auto back = fred_decode(fred_encode(g, full), full);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(back[i] == doctest::Approx(g[i]).epsilon(1e-12));

  std::vector<GridTensor> many;
  for (std::uint64_t s = 0; s < 8; ++s) many.push_back(random_grid(3, {6, 5}, 10 + s));
  double previous = INFINITY;
  for (std::size_t k = 1; k <= 30; k += 4) {
    const auto mask = fred_select_mask(many, k);
    const double e = mse(fred_decode(fred_encode(g, mask), mask), g);
    CHECK(e <= previous + 1e-15);
    previous = e;
  }
}

TEST_CASE("fred projection is least squares on the masked span") {
  const auto g = random_grid(1, {8}, 3);
  FredMask mask{{8}, {1, 0, 1, 1, 0, 0, 1, 0}};
  const auto coeff = fred_encode(g, mask);
  const double best = mse(fred_decode(coeff, mask), g);
  // perturbing any kept coefficient cannot lower the error
  for (std::size_t j = 0; j < coeff.values.size(); ++j)
    for (double eps : {-1e-3, 1e-3}) {
      auto moved = coeff;
      moved.values[j] += eps;
      CHECK(mse(fred_decode(moved, mask), g) > best);
    }
  // closed form: coefficients are inner products with the basis
  for (std::size_t j = 0; j < 4; ++j) {
    const std::size_t k = mask.indices()[j];
    double dot = 0.0;
    for (std::size_t i = 0; i < 8; ++i) dot += g[i] * basis(k, i, 8);
    CHECK(coeff.values[j] == doctest::Approx(dot).epsilon(1e-12));
  }
}

TEST_CASE("fred_upsample_zero_pad: constants, zeros and an atom") {
  GridTensor c(2, {4, 4}, std::vector<double>(32, 0.3));
  const auto full = full_mask({4, 4});
  const auto up = fred_upsample_zero_pad(fred_encode(c, full), full, {8, 12});
  CHECK(up.shape() == Dims{8, 12});
  for (double v : up.values()) CHECK(v == doctest::Approx(0.3).epsilon(1e-12));

  const auto zero = fred_upsample_zero_pad(fred_encode(GridTensor(1, {5}), full_mask({5})), full_mask({5}), {9});
  for (double v : zero.values()) CHECK(v == 0.0);

  // a single cosine atom keeps its continuous frequency: cos(pi k (2i+1) / 2N)
  GridTensor atom(1, {6});
  for (std::size_t i = 0; i < 6; ++i) atom[i] = basis(2, i, 6);
  const auto big = fred_upsample_zero_pad(fred_encode(atom, full_mask({6})), full_mask({6}), {12});
  for (std::size_t i = 0; i < 12; ++i)
    CHECK(big[i] == doctest::Approx(std::sqrt(2.0 / 6.0) * std::cos(std::numbers::pi * (2.0 * i + 1.0) * 2.0 / 24.0))
                        .epsilon(1e-12));
  CHECK_THROWS_AS(fred_upsample_zero_pad(fred_encode(atom, full_mask({6})), full_mask({6}), {6}), InvalidArgument);
}

TEST_CASE("idc: stored dims, decode, and cost") {
  CHECK(idc_stored_dims({16, 16}, 2) == Dims{8, 8});
  CHECK(idc_stored_dims({15, 7}, 4) == Dims{4, 2});
  IdcParam p;
  p.grids.emplace_back(1, Dims{2}, std::vector<double>{1.0, 3.0});
  p.labels = {0};
  p.method = Interpolation::nearest;
  const auto out = idc_decode(p);
  CHECK(out[0].values()[0] == 1.0);
  CHECK(out[0].values()[1] == 1.0);
  CHECK(out[0].values()[2] == 3.0);
  CHECK(out[0].values()[3] == 3.0);
  const auto plan = plan_instance(Method::idc, 192, 3, {16, 16});
  CHECK(plan.factor == 2);
  CHECK(plan.utilized == 192);
  CHECK(plan_instance(Method::idc, 191, 3, {16, 16}).factor == 3);
  CHECK_THROWS_AS(plan_instance(Method::idc, 2, 3, {16, 16}), BudgetTooSmall);
}

TEST_CASE("plan_instance: every method stays within budget") {
  for (std::size_t b : {15u, 38u, 81u, 200u, 768u})
    for (auto m : {Method::ddif, Method::fred, Method::idc}) {
      const auto plan = plan_instance(m, b, 3, {16, 16});
      CHECK(plan.utilized <= b);
      CHECK(plan.utilized == instance_budget(plan));
    }
  const auto d15 = plan_instance(Method::ddif, 15, 3, {16, 16});
  CHECK(d15.field == FieldConfig::uniform(2, 3, 1, 2));
  CHECK(d15.utilized == 15);
  CHECK(plan_instance(Method::fred, 38, 3, {16, 16}).coefficients == 12);
  CHECK(plan_instance(Method::vanilla, 768, 3, {16, 16}).utilized == 768);
  CHECK_THROWS_AS(plan_instance(Method::vanilla, 767, 3, {16, 16}), BudgetTooSmall);
  CHECK_THROWS_AS(plan_instance(Method::ddif, 5, 3, {16, 16}), BudgetTooSmall);
  CHECK_THROWS_AS(plan_instance(Method::fred, 2, 3, {16, 16}), BudgetTooSmall);
}

TEST_CASE("reconstruct_at_budget") {
  const auto img = make_smooth_images(1, 3, 4)[0].render({8, 8});
  ReconstructOptions opt;
  opt.fit.iterations = 50;
  const auto v = reconstruct_at_budget(img, 192, Method::vanilla, opt);
  CHECK(v.grid == img);
  const auto f = reconstruct_at_budget(img, 30, Method::fred, opt);
  CHECK(f.plan.utilized == 30);
  const auto mask = fred_select_mask(std::span<const GridTensor>(&img, 1), 4);
  opt.mask = &mask;
  const auto fm = reconstruct_at_budget(img, 30, Method::fred, opt);
  CHECK(fm.plan.utilized == 12);
  CHECK(mse(fm.grid, img) >= mse(f.grid, img));
  const auto d = reconstruct_at_budget(img, 60, Method::ddif, opt);
  CHECK(d.grid.shape() == img.shape());
  CHECK(d.plan.utilized <= 60);
  CHECK(reconstruct_at_budget(img, 60, Method::ddif, opt).grid == d.grid);
  const auto i = reconstruct_at_budget(img, 48, Method::idc, opt);
  CHECK(i.grid.shape() == img.shape());
  const auto big = fred_select_mask(std::span<const GridTensor>(&img, 1), 20);
  opt.mask = &big;
  CHECK_THROWS_AS(reconstruct_at_budget(img, 30, Method::fred, opt), BudgetTooSmall);
}

TEST_CASE("FRD1 round trip and corruption") {
  FredDataset ds;
  ds.mask = FredMask{{3, 4}, {1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 1}};
  ds.channels = 2;
  for (std::size_t i = 0; i < 3; ++i) {
    FredCoefficients c{2, {}};
    for (std::size_t j = 0; j < 10; ++j) c.values.push_back(static_cast<float>(0.25 * static_cast<double>(i * 10 + j) - 1.5));
    ds.instances.push_back(c);
    ds.labels.push_back(i % 2);
  }
  const auto bytes = fred_to_bytes(ds);
  CHECK(bytes.size() == 4 + 1 + 1 + 2 + 2 * 4 + 4 + 4 + 2 + 3 * (4 + 10 * 4));
  CHECK(fred_from_bytes(bytes) == ds);
  CHECK(fred_to_bytes(fred_from_bytes(bytes)) == bytes);
  CHECK_THROWS_AS(fred_from_bytes(bytes.substr(0, bytes.size() - 1)), FormatError);
  CHECK_THROWS_AS(fred_from_bytes(bytes + "x"), FormatError);
  auto bad = bytes;
  bad[0] = 'X';
  CHECK_THROWS_AS(fred_from_bytes(bad), FormatError);
}
