#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nfd/errors.hpp"
#include "nfd/field.hpp"

using namespace nfd;

TEST_CASE("param_count: configuration table values") {
  CHECK(param_count(FieldConfig::uniform(2, 3, 3, 20)) == 963);
  CHECK(param_count(FieldConfig::uniform(2, 3, 2, 6)) == 81);
  CHECK(param_count(FieldConfig::uniform(3, 1, 3, 20)) == 941);
  CHECK(param_count(FieldConfig::uniform(3, 3, 6, 40)) == 8483);
  for (std::size_t d = 1; d < 30; ++d) CHECK(param_count(FieldConfig::uniform(1, 1, 2, d)) == d * d + 4 * d + 1);
  CHECK(param_count(FieldConfig::uniform(1, 1, 2, 1)) == 6);
  FieldConfig mixed;
  mixed.input_dim = 2;
  mixed.output_dim = 3;
  mixed.widths = {5, 7};
  CHECK(param_count(mixed) == 5 * 3 + 7 * 6 + 3 * 8);
}

TEST_CASE("param_count equals stored scalars for every small config") {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t m = 1; m <= 4; ++m)
      for (std::size_t L = 1; L <= 4; ++L)
        for (std::size_t d = 1; d <= 8; ++d) {
          const auto cfg = FieldConfig::uniform(n, m, L, d);
          const auto f = make_field(cfg);
          CHECK(f.flatten().size() == param_count(cfg));
          CHECK(f.parameter_count() == param_count(cfg));
        }
}

TEST_CASE("plan_budget") {
  CHECK(plan_budget(49152, FieldConfig::uniform(2, 3, 3, 20)) == 51);
  CHECK(plan_budget(3072, FieldConfig::uniform(2, 3, 2, 6)) == 37);
  CHECK(plan_budget(963, FieldConfig::uniform(2, 3, 3, 20)) == 1);
  CHECK_THROWS_AS(plan_budget(962, FieldConfig::uniform(2, 3, 3, 20)), BudgetTooSmall);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(param_count(FieldConfig::uniform(0, 1, 1, 1)), InvalidArgument);
  CHECK_THROWS_AS(param_count(FieldConfig::uniform(1, 1, 0, 1)), InvalidArgument);
  CHECK_THROWS_AS(param_count(FieldConfig::uniform(1, 1, 1, 1, -1.0)), InvalidArgument);
}

TEST_CASE("init_siren: bounds and determinism") {
  const auto cfg = FieldConfig::uniform(2, 3, 3, 16);
  const auto f = init_siren(cfg, 11);
  for (double w : f.weights[0]) CHECK(std::abs(w) <= 0.5);
  const double bound = std::sqrt(6.0 / 16.0) / 30.0;
  for (std::size_t l = 1; l < f.layer_count(); ++l)
    for (double w : f.weights[l]) CHECK(std::abs(w) <= bound);
  for (const auto& b : f.biases)
    for (double v : b) CHECK(v == 0.0);
  CHECK(init_siren(cfg, 11) == f);
  CHECK(!(init_siren(cfg, 12) == f));
}

TEST_CASE("forward: zero network and a hand-evaluated neuron") {
  auto f = make_field(FieldConfig::uniform(2, 2, 2, 4));
  f.biases.back() = {0.3, -0.1};
  const auto g = forward(f, make_coordinate_set({3, 5}));
  CHECK(g.channels() == 2);
  CHECK(g.shape() == Dims{3, 5});
  for (double v : g.channel(0)) CHECK(v == 0.3);
  for (double v : g.channel(1)) CHECK(v == -0.1);

  auto one = make_field(FieldConfig::uniform(1, 1, 1, 1));
  one.weights[0] = {std::numbers::pi / 2.0 / one.config.omega0};
  one.weights[1] = {0.7};
  one.biases[1] = {0.2};
  const auto y = forward(one, make_coordinate_set({2}));
  CHECK(y[1] == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(y[0] == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK_THROWS_AS(forward(one, make_coordinate_set({2, 2})), InvalidArgument);
}

TEST_CASE("forward: pure and resolution agnostic") {
  const auto f = init_siren(FieldConfig::uniform(2, 1, 2, 8), 3);
  const auto a = forward(f, make_coordinate_set({5, 5}));
  CHECK(forward(f, make_coordinate_set({5, 5})) == a);
  const auto b = forward(f, make_coordinate_set({9, 9}));
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) CHECK(a[i * 5 + j] == b[(2 * i) * 9 + 2 * j]);
}

TEST_CASE("field_forward on a tape matches forward") {
  const auto f = init_siren(FieldConfig::uniform(2, 3, 2, 6), 5);
  const auto coords = make_coordinate_set({4, 7});
  ag::Tape t;
  auto vars = field_leaves(t, f);
  auto out = field_forward(vars, t.constant(coordinate_tensor(coords)), f.config.omega0);
  const auto direct = forward(f, coords);
  REQUIRE(out.value().size() == direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i) CHECK(out.value().data[i] == doctest::Approx(direct[i]).epsilon(1e-13));
}

namespace {

SyntheticDataset make_bundle(std::size_t count, const FieldConfig& cfg) {
  SyntheticDataset ds;
  ds.channels = cfg.output_dim;
  ds.class_count = 3;
  ds.decode_dims = Dims(cfg.input_dim, 16);
  for (std::size_t i = 0; i < count; ++i) {
    auto f = init_siren(cfg, 100 + i);
    auto flat = f.flatten();
    for (auto& v : flat) v = static_cast<float>(v);
    f.assign(flat);
    ds.fields.push_back(f);
    ds.labels.push_back(i % 3);
  }
  return ds;
}

}  // namespace

TEST_CASE("NFB1: round trip and size") {
  const auto cfg = FieldConfig::uniform(2, 3, 3, 20);
  const auto ds = make_bundle(51, cfg);
  const std::string bytes = bundle_to_bytes(ds);
  CHECK(bytes.size() == 20 + 51 * (4 + 963 * 4) + 16);
  const auto back = bundle_from_bytes(bytes);
  CHECK(back == ds);
  CHECK(bundle_to_bytes(back) == bytes);

  SyntheticDataset plain = ds;
  plain.decode_dims.clear();
  const std::string plain_bytes = bundle_to_bytes(plain);
  CHECK(plain_bytes.size() == 20 + 51 * (4 + 963 * 4));
  CHECK(bundle_from_bytes(plain_bytes).class_count == 3);
}

TEST_CASE("NFB1: corruption") {
  const auto ds = make_bundle(2, FieldConfig::uniform(1, 1, 2, 3));
  std::string bytes = bundle_to_bytes(ds);
  std::string bad = bytes;
  bad[3] = '2';
  CHECK_THROWS_AS(bundle_from_bytes(bad), FormatError);
  CHECK_THROWS_AS(bundle_from_bytes(bytes.substr(0, bytes.size() - 20)), FormatError);
  CHECK_THROWS_AS(bundle_from_bytes(bytes + "junk"), FormatError);
  auto odd = ds;
  for (auto& f : odd.fields) f.config.omega0 = 30.001;
  CHECK_THROWS_AS(bundle_to_bytes(odd), InvalidArgument);
}
