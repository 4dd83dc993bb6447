#include <doctest.h>

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "nfd/autograd.hpp"
#include "nfd/errors.hpp"
#include "nfd/rng.hpp"
#include "support/grad_cases.hpp"

using namespace nfd;
using namespace nfd::ag;
using namespace nfd::testing;

TEST_CASE("backward: sum gives ones") {
  Tape t;
  Var x = t.leaf(random_tensor({5}, 1));
  auto g = backward(sum(x));
  CHECK(g.at(x.id()).data == std::vector<double>(5, 1.0));
}

TEST_CASE("backward: sum of sin at zero gives cos 0") {
  Tape t;
  Var x = t.leaf(Tensor({4}, 0.0));
  auto g = backward(sum(sin(x)));
  CHECK(g.at(x.id()).data == std::vector<double>(4, 1.0));
}

TEST_CASE("backward: non-scalar root is rejected") {
  Tape t;
  Var x = t.leaf(Tensor({3}, 1.0));
  CHECK_THROWS_AS(backward(sin(x)), InvalidArgument);
}

TEST_CASE("grad_check: every primitive, first and second order") {
  for (const auto& c : primitive_cases()) {
    CAPTURE(c.name);
    CHECK(grad_check(c.f, c.point) < 1e-4);
    CHECK(grad_check(second_order(c.f, 7), c.point) < 1e-4);
  }
}

TEST_CASE("grad_check: quadratic is exact to rounding") {
  auto f = [](Tape&, std::span<const Var> p) { return sum(square(p[0])); };
  CHECK(grad_check(f, {random_tensor({10}, 3)}) < 1e-8);
}

TEST_CASE("grad_check: three-layer sine network") {
  auto f = [](Tape& t, std::span<const Var> p) {
    Var h = t.constant(random_tensor({2, 7}, 60, -1, 1));
    for (int l = 0; l < 3; ++l) h = sin(scale(add_bias(matmul(p[2 * l], h), p[2 * l + 1], 0), 3.0));
    return sum(matmul(p[6], h));
  };
  std::vector<Tensor> point{random_tensor({5, 2}, 61, -1, 1), random_tensor({5}, 62, -1, 1),
                            random_tensor({5, 5}, 63, -1, 1), random_tensor({5}, 64, -1, 1),
                            random_tensor({4, 5}, 65, -1, 1), random_tensor({4}, 66, -1, 1),
                            random_tensor({1, 4}, 67, -1, 1)};
  CHECK(grad_check(f, point) < 1e-4);
}

TEST_CASE("grad_check: conv, relu, mean pipeline") {
  auto f = [](Tape& t, std::span<const Var> p) {
    Var x = t.constant(away_from_zero(random_tensor({2, 1, 6, 6}, 70)));
    return mean(relu(conv2d(x, p[0], 1)));
  };
  CHECK(grad_check(f, {random_tensor({3, 1, 3, 3}, 71, -1, 1)}) < 1e-4);
}

TEST_CASE("gradients: batch sum equals the sum of per-element gradients") {
  const Tensor w0 = random_tensor({3, 2}, 80);
  const Tensor batch = random_tensor({2, 4}, 81);
  auto loss_of = [&](Tape& t, Var w, const Tensor& xs) { return sum(sin(matmul(w, t.constant(xs)))); };

  Tape whole;
  Var w = whole.leaf(w0);
  const Tensor g_all = gradients(loss_of(whole, w, batch), std::vector<Var>{w})[0].value();

  Tensor g_sum({3, 2});
  for (std::size_t j = 0; j < 4; ++j) {
    Tape t;
    Var wj = t.leaf(w0);
    Tensor col({2, 1}, std::vector<double>{batch.data[j], batch.data[4 + j]});
    const Tensor g = gradients(loss_of(t, wj, col), std::vector<Var>{wj})[0].value();
    for (std::size_t i = 0; i < g.size(); ++i) g_sum.data[i] += g.data[i];
  }
  for (std::size_t i = 0; i < g_all.size(); ++i) CHECK(g_all.data[i] == doctest::Approx(g_sum.data[i]).epsilon(1e-12));
}

TEST_CASE("gradients: unrelated targets get zeros and evaluation is deterministic") {
  auto run = [] {
    Tape t;
    Var a = t.leaf(random_tensor({3}, 90));
    Var b = t.leaf(random_tensor({3}, 91));
    auto g = gradients(sum(sin(a)), std::vector<Var>{a, b});
    return std::make_pair(g[0].value(), g[1].value());
  };
  auto [ga, gb] = run();
  CHECK(gb.data == std::vector<double>(3, 0.0));
  CHECK(run().first == ga);
}

TEST_CASE("cosine_similarity: zero vector gives zero") {
  Tape t;
  Var a = t.leaf(Tensor({3}, 0.0));
  Var b = t.leaf(random_tensor({3}, 5));
  CHECK(cosine_similarity(a, b).value().item() == 0.0);
  Var c = t.leaf(Tensor({3}, std::vector<double>{1, 0, 0}));
  Var d = t.leaf(Tensor({3}, std::vector<double>{0, 2, 0}));
  CHECK(cosine_similarity(c, d).value().item() == 0.0);
  CHECK(cosine_similarity(c, c).value().item() == doctest::Approx(1.0));
}

TEST_CASE("shape errors") {
  Tape t;
  Var a = t.leaf(Tensor({2, 3}));
  Var b = t.leaf(Tensor({3, 2}));
  CHECK_THROWS_AS(add(a, b), InvalidArgument);
  CHECK_THROWS_AS(matmul(a, a), InvalidArgument);
  CHECK_NOTHROW(matmul(a, a, false, true));
  Tape other;
  Var c = other.leaf(Tensor({2, 3}));
  CHECK_THROWS_AS(add(a, c), InvalidArgument);
}
