#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nfd/baselines.hpp"
#include "nfd/bessel.hpp"
#include "nfd/errors.hpp"
#include "nfd/harmonic.hpp"
#include "nfd/rng.hpp"
#include "support/harmonic_fields.hpp"

using namespace nfd;
using namespace nfd::testing;

namespace {

// Independent series oracle in long double.
double series_oracle(int p, double x) {
  long double h = x / 2.0L, term = 1.0L;
  for (int i = 1; i <= p; ++i) term *= h / i;
  long double sum = term;
  for (int m = 1; m < 200; ++m) {
    term *= -h * h / (static_cast<long double>(m) * (m + p));
    sum += term;
  }
  return static_cast<double>(sum);
}

}  // namespace

TEST_CASE("bessel_j: values, symmetry, and the two regimes") {
  CHECK(bessel_j(0, 0.0) == 1.0);
  for (int p = 1; p < 6; ++p) CHECK(bessel_j(p, 0.0) == 0.0);
  for (int p = 0; p <= 20; ++p)
    for (double x : {0.1, 0.7, 1.0, 2.5, 5.0, 9.0, 11.9}) CHECK(std::abs(bessel_j(p, x) - series_oracle(p, x)) < 1e-10);
  for (int p = 0; p <= 30; ++p)
    for (double x : {12.5, 17.0, 25.0, 33.3, 49.9})
      CHECK(std::abs(bessel_j(p, x) - std::cyl_bessel_j(static_cast<double>(p), x)) < 1e-10);
  // the recurrence agrees with the series where both are valid
  for (int p = 0; p <= 15; ++p)
    for (double x = 4.0; x <= 12.0; x += 0.5)
      CHECK(std::abs(detail::bessel_miller(p, x) - detail::bessel_series(p, x)) < 1e-10);
  for (int p = 1; p <= 9; ++p)
    for (double x : {-3.2, 0.4, 14.0}) {
      CHECK(bessel_j(-p, x) == (p % 2 ? -1.0 : 1.0) * bessel_j(p, x));
      CHECK(bessel_j(p, -x) == (p % 2 ? -1.0 : 1.0) * bessel_j(p, x));
    }
  CHECK_THROWS_AS(bessel_j(1, 50.1), UnsupportedRange);
  CHECK_THROWS_AS(bessel_j(0, NAN), UnsupportedRange);
}

TEST_CASE("bessel_j: first zero of J0 and the factorial bound") {
  double lo = 2.0, hi = 3.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (series_oracle(0, mid) > 0 ? lo : hi) = mid;
  }
  CHECK(std::abs(lo - 2.404826) < 1e-5);
  CHECK(std::abs(bessel_j(0, 2.404826)) < 1e-5);
  CHECK(std::abs(bessel_j(3, 1.0)) < 0.125 / 6.0);
  for (int p = 1; p <= 10; ++p)
    for (double r = 0.25; r <= 5.0; r += 0.25) CHECK(std::abs(bessel_j(p, r)) < std::pow(r / 2.0, p) / std::tgamma(p + 1.0));
}

TEST_CASE("expand: trivial fields") {
  auto zero = make_field(FieldConfig::uniform(1, 1, 2, 3));
  zero.biases[2][0] = 0.4;
  const auto e = expand(zero, 2);
  CHECK(e.terms.size() == 125);
  for (double x : {-1.0, 0.0, 0.3}) CHECK(eval_expansion(e, x) == 0.4);

  const auto one = expand(random_field(1, 3), 0);
  REQUIRE(one.terms.size() == 1);
  CHECK(one.terms[0].frequency == 0.0);
  CHECK(one.terms[0].k == std::vector<int>{0});

  HarmonicExpansion single;
  single.terms.push_back({{1}, std::numbers::pi, {1.0}, {0.0}});
  CHECK(eval_expansion(single, 1.0) == doctest::Approx(-1.0));

  CHECK_THROWS_AS(expand(make_field(FieldConfig::uniform(2, 1, 2, 3)), 1), InvalidArgument);
  CHECK_THROWS_AS(expand(make_field(FieldConfig::uniform(1, 1, 3, 3)), 1), InvalidArgument);
}

TEST_CASE("expand: invariants of every term") {
  const auto f = random_field(3, 8);
  const auto e = expand(f, 3);
  const double w0 = f.config.omega0;
  for (const auto& t : e.terms) {
    double freq = 0.0, kb = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(t.k[j]) <= 3);
      freq += t.k[j] * w0 * f.weights[0][j];
      kb += t.k[j] * w0 * f.biases[0][j];
    }
    CHECK(t.frequency == freq);
    for (std::size_t i = 0; i < 3; ++i) {
      double a = f.weights[2][i];
      for (std::size_t j = 0; j < 3; ++j) a *= std::cyl_bessel_j(std::abs(t.k[j]), std::abs(w0 * f.weights[1][i * 3 + j])) *
                                              ((t.k[j] < 0 && t.k[j] % 2) != (f.weights[1][i * 3 + j] < 0 && t.k[j] % 2) ? -1.0 : 1.0);
      CHECK(t.amplitude[i] == doctest::Approx(a).epsilon(1e-10));
      CHECK(t.phase[i] == doctest::Approx(kb + w0 * f.biases[1][i] - std::numbers::pi / 2));
    }
  }
}

TEST_CASE("expand: converges to the network") {
  std::vector<double> xs;
  for (int i = 0; i <= 100; ++i) xs.push_back(-1.0 + 0.02 * i);
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto f = random_field(1 + s % 4, 100 + s);
    double previous = INFINITY;
    for (std::size_t zeta : {1u, 2u, 4u, 8u, 10u}) {
      const auto e = expand(f, zeta);
      const auto fast = eval_expansion(e, xs);
      double err = 0.0;
      for (std::size_t p = 0; p < xs.size(); ++p) {
        err = std::max(err, std::abs(fast[p] - direct(f, xs[p])));
        CHECK(fast[p] == doctest::Approx(eval_expansion(e, xs[p])).epsilon(1e-9));
      }
      CHECK(err <= previous + 1e-9);
      previous = err;
    }
    CHECK(previous < 1e-6);
  }
}

TEST_CASE("fred_feasible_eval") {
  const std::vector<std::size_t> u0{0};
  const std::vector<double> c{0.8};
  for (std::size_t x = 0; x < 5; ++x) CHECK(fred_feasible_eval(c, u0, 5, x) == doctest::Approx(0.8));
  const std::vector<std::size_t> u1{1};
  const std::vector<double> one{1.0};
  CHECK(fred_feasible_eval(one, u1, 2, 0) == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK_THROWS_AS(fred_feasible_eval(one, u1, 2, 2), InvalidArgument);
  CHECK_THROWS_AS(fred_feasible_eval(one, std::vector<std::size_t>{2}, 2, 0), InvalidArgument);

  // idct agreement with gamma_u = c_u * sqrt((u ? 2 : 1) / N)
  Rng rng = make_rng(5);
  const std::size_t n = 11;
  GridTensor spec(1, {n});
  std::vector<std::size_t> all(n);
  std::vector<double> gamma(n);
  for (std::size_t uu = 0; uu < n; ++uu) {
    all[uu] = uu;
    spec[uu] = uniform(rng, -1.0, 1.0);
    gamma[uu] = spec[uu] * std::sqrt((uu ? 2.0 : 1.0) / static_cast<double>(n));
  }
  const auto signal = idct(spec);
  for (std::size_t x = 0; x < n; ++x) CHECK(std::abs(fred_feasible_eval(gamma, all, n, x) - signal[x]) < 1e-9);
}

TEST_CASE("off-lattice harmonic lies outside a small frequency set") {
  // a cosine at a frequency no DCT atom carries cannot be reached exactly by
  // any 4-coefficient frequency selection on 16 samples
  const std::size_t n = 16;
  GridTensor g(1, {n});
  const double omega = std::numbers::pi * 2.37 / n;
  for (std::size_t x = 0; x < n; ++x) g[x] = std::cos(omega * static_cast<double>(x) + omega / 2.0);
  const auto best = fred_select_mask(std::span<const GridTensor>(&g, 1), 4);
  CHECK(mse(fred_decode(fred_encode(g, best), best), g) > 1e-4);
}

TEST_CASE("threshold arithmetic") {
  CHECK(max_width(6) == 1);
  CHECK(zeta_threshold(6) == 6.0);
  CHECK(harmonic_count(6, 1) == 6);
  CHECK(max_width(24) == 3);
  CHECK(harmonic_count(0, 3) == 0);
  CHECK(harmonic_count(1, 2) == 4);
  for (std::size_t b = 6; b <= 200; ++b) {
    const std::size_t d = max_width(b);
    CHECK(d * d + 4 * d + 1 <= b);
    CHECK(b < (d + 1) * (d + 1) + 4 * (d + 1) + 1);
    CHECK(param_count(FieldConfig::uniform(1, 1, 2, d)) <= b);
    const auto zeta = static_cast<std::uint64_t>(std::ceil(zeta_threshold(b)));
    CHECK(harmonic_count(zeta, d) >= b);
  }
  CHECK(max_width(40) == 4);
  CHECK(zeta_threshold(40) == 1.0);  // 81 = 3^4
  CHECK_THROWS_AS(max_width(5), TheoremPreconditionViolated);
  CHECK_THROWS_AS(zeta_threshold(0), TheoremPreconditionViolated);
}

TEST_CASE("prop1_oracle: hand cases") {
  const std::vector<double> star{0.6, -0.8};
  const PointSet s1{2, {0.0, 0.0}};
  const PointSet s2{2, {0.0, 0.0, 0.6, -0.8}};
  const auto r = prop1_oracle(s1, s2, 1, squared_distance_loss(star));
  CHECK(r.nested);
  CHECK(r.min_subset == doctest::Approx(1.0));
  CHECK(r.min_superset == 0.0);
  const auto same = prop1_oracle(s2, s2, 1, squared_distance_loss(star));
  CHECK(same.min_subset == same.min_superset);
  CHECK_THROWS_AS(prop1_oracle(lattice_space(4, std::vector<double>{-1, 0, 1}), s1, 3, squared_distance_loss({})),
                  InvalidArgument);
  const auto big = lattice_space(3, std::vector<double>{-1, 0, 1});
  CHECK_THROWS_AS(prop1_oracle(big, big, 5, squared_distance_loss(std::vector<double>(15))), SearchSpaceOverflow);
}

TEST_CASE("prop1_oracle: masking and clipping") {
  const std::vector<double> vals{-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto full = lattice_space(2, vals);
  CHECK(full.size() == 25);
  const auto masked = mask_last_axis(full);
  const auto clipped = clip_space(full, 0.5);
  CHECK(masked.size() == 5);
  CHECK(clipped.size() == 9);
  CHECK(masked.subset_of(full));
  CHECK(clipped.subset_of(full));
  CHECK(!full.subset_of(clipped));
  const std::vector<double> star{0.9, 0.4, -0.7, -0.3};
  const auto m = prop1_oracle(masked, full, 2, squared_distance_loss(star));
  // nearest masked points (1,0) and (-0.5,0): 0.01+0.16+0.04+0.09
  CHECK(m.min_subset == doctest::Approx(0.30));
  CHECK(m.min_superset == doctest::Approx(0.01 + 0.01 + 0.04 + 0.04));
  const auto c = prop1_oracle(clipped, full, 2, squared_distance_loss(star));
  CHECK(c.min_subset == doctest::Approx(0.16 + 0.01 + 0.04 + 0.04));
  CHECK(c.min_subset >= c.min_superset);
}

TEST_CASE("prop1_oracle: random nested spaces never invert") {
  Rng rng = make_rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t dim = 1 + uniform_index(rng, 3);
    PointSet sup{dim, {}};
    const std::size_t n = 3 + uniform_index(rng, 8);
    for (std::size_t i = 0; i < n * dim; ++i) sup.coords.push_back(uniform(rng, -1.0, 1.0));
    PointSet sub{dim, {}};
    for (std::size_t i = 0; i < n; ++i)
      if (i == 0 || uniform(rng, 0.0, 1.0) < 0.5) sub.coords.insert(sub.coords.end(), sup.point(i).begin(), sup.point(i).end());
    const std::size_t count = 1 + uniform_index(rng, 3);
    std::vector<double> target(count * dim);
    for (auto& v : target) v = uniform(rng, -1.0, 1.0);
    const auto r = prop1_oracle(sub, sup, count, squared_distance_loss(target));
    CHECK(r.nested);
    CHECK(r.min_subset >= r.min_superset);
  }
}
