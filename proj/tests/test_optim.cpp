#include <doctest.h>

#include <cmath>
#include <vector>

#include "nfd/errors.hpp"
#include "nfd/optim.hpp"

using namespace nfd;

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> p{1.0, -2.0, 3.0};
  const std::vector<double> g(3, 0.0);
  AdamState s;
  for (int i = 0; i < 5; ++i) adam_step(p, g, s);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.0});
}

TEST_CASE("adam: first step matches the hand computation") {
  std::vector<double> p{0.0};
  const std::vector<double> g{1.0};
  AdamState s;
  adam_step(p, g, s, {.lr = 0.001});
  // m_hat = 1, v_hat = 1, step = lr / (1 + eps)
  CHECK(p[0] == doctest::Approx(-0.001 / (1.0 + 1e-8)).epsilon(1e-14));
  CHECK(p[0] > -0.001);
  CHECK(s.step == 1);
}

TEST_CASE("adam: constant gradient decreases monotonically") {
  std::vector<double> p{0.5};
  const std::vector<double> g{0.3};
  AdamState s;
  adam_step(p, g, s);
  const double after_one = p[0];
  adam_step(p, g, s);
  CHECK(after_one < 0.5);
  CHECK(p[0] < after_one);
}

TEST_CASE("adam: shape mismatch") {
  std::vector<double> p(3, 0.0);
  const std::vector<double> g(2, 0.0);
  AdamState s;
  CHECK_THROWS_AS(adam_step(p, g, s), InvalidArgument);
  std::vector<double> g3(3, 0.0);
  adam_step(p, g3, s);
  std::vector<double> p4(4, 0.0), g4(4, 0.0);
  CHECK_THROWS_AS(adam_step(p4, g4, s), InvalidArgument);
}
