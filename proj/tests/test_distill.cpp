#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nfd/codec.hpp"
#include "nfd/datagen.hpp"
#include "nfd/distill.hpp"
#include "nfd/errors.hpp"

using namespace nfd;
using ag::Shape;
using ag::Tensor;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng = make_rng(seed);
  Tensor t(std::move(s));
  for (auto& v : t.data) v = uniform(rng, lo, hi);
  return t;
}

ConvNetConfig small_net(std::size_t classes, std::size_t size = 8) {
  ConvNetConfig c;
  c.height = c.width_px = size;
  c.classes = classes;
  c.depth = 2;
  c.width = 4;
  return c;
}

}  // namespace

TEST_CASE("convnet: shapes, validation, determinism") {
  auto cfg = small_net(3);
  const auto net = init_convnet(cfg, 1);
  CHECK(net.params.size() == 6);
  CHECK(net.params[0].shape == Shape{4, 1, 3, 3});
  CHECK(net.params[4].shape == Shape{3, cfg.feature_dim()});
  CHECK(cfg.feature_dim() == 4 * 2 * 2);
  ag::Tape t;
  auto p = convnet_leaves(t, net, false);
  auto logits = convnet_logits(cfg, p, t.constant(random_tensor({5, 1, 8, 8}, 2)));
  CHECK(logits.shape() == Shape{5, 3});
  CHECK(init_convnet(cfg, 1).params == net.params);
  cfg.depth = 4;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  ConvNetConfig lin = small_net(2);
  lin.arch = Arch::mlp;
  lin.depth = 0;
  CHECK(init_convnet(lin, 0).params.size() == 2);
  CHECK(parse_norm("none") == Norm::none);
  CHECK_THROWS_AS(parse_arch("resnet"), InvalidArgument);
}

TEST_CASE("augment: identity, flip involution, cutout square, pairing") {
  const Tensor x = random_tensor({2, 3, 6, 6}, 3);
  ag::Tape t;
  auto v = t.constant(x);
  CHECK(augment(v, AugmentParams{}).value() == x);
  AugmentParams flip;
  flip.flip = true;
  CHECK(augment(augment(v, flip), flip).value() == x);
  CHECK(!(augment(v, flip).value() == x));

  AugmentFlags flags;
  flags.cutout = true;
  Rng rng = make_rng(4);
  const auto p = draw_augment(flags, 6, 6, rng);
  REQUIRE(p.cutout);
  CHECK(p.cut_size == 3);
  const Tensor cut = augment(v, p).value();
  for (std::size_t pl = 0; pl < 6; ++pl)
    for (std::size_t y = 0; y < 6; ++y)
      for (std::size_t xx = 0; xx < 6; ++xx) {
        const bool inside = y >= p.cut_y && y < p.cut_y + 3 && xx >= p.cut_x && xx < p.cut_x + 3;
        const std::size_t i = (pl * 6 + y) * 6 + xx;
        CHECK(cut.data[i] == (inside ? 0.0 : x.data[i]));
      }

  AugmentParams shift;
  shift.shift_x = 1;
  const Tensor moved = augment(v, shift).value();
  CHECK(moved.data[0] == 0.0);
  CHECK(moved.data[1] == x.data[0]);

  // all flags off is the identity for the grid interface too
  std::vector<GridTensor> grids{GridTensor(1, {4, 4}, std::vector<double>(16, 0.5))};
  CHECK(augment(grids, AugmentFlags{}, 9)[0] == grids[0]);
  AugmentFlags all{.flip = true, .crop = true, .cutout = true};
  CHECK(augment(grids, all, 9)[0] == augment(grids, all, 9)[0]);

  // two draws from equal RNG states coincide: the paired-branch contract
  Rng a = make_rng(11), b = make_rng(11);
  const auto pa = draw_augment(all, 8, 8, a), pb = draw_augment(all, 8, 8, b);
  CHECK(pa.flip == pb.flip);
  CHECK(pa.shift_x == pb.shift_x);
  CHECK(pa.cut_y == pb.cut_y);
  CHECK(a() == b());
}

TEST_CASE("augment is differentiable") {
  AugmentParams p;
  p.flip = true;
  p.shift_y = -1;
  p.cutout = true;
  p.cut_size = 2;
  p.cut_x = 1;
  const double err = ag::grad_check(
      [&](ag::Tape&, std::span<const ag::Var> v) { return ag::sum(ag::square(augment(v[0], p))); },
      {random_tensor({1, 2, 5, 5}, 6)});
  CHECK(err < 1e-6);
}

TEST_CASE("loss_dm: identity embedding closed form") {
  ag::Tape t;
  const Tensor r = random_tensor({2, 1, 2, 2}, 1), s = random_tensor({3, 1, 2, 2}, 2);
  auto loss = loss_dm(std::vector{t.constant(r)}, std::vector{t.constant(s)}, identity_embedder());
  double expected = 0.0;
  for (std::size_t f = 0; f < 4; ++f) {
    const double mr = (r.data[f] + r.data[4 + f]) / 2.0;
    const double ms = (s.data[f] + s.data[4 + f] + s.data[8 + f]) / 3.0;
    expected += (mr - ms) * (mr - ms);
  }
  CHECK(loss.value().item() == doctest::Approx(expected).epsilon(1e-14));

  auto same = loss_dm(std::vector{t.constant(r), t.constant(s)}, std::vector{t.constant(r), t.constant(s)},
                      identity_embedder());
  CHECK(same.value().item() == 0.0);
}

TEST_CASE("loss_dm: convnet embedding") {
  const auto cfg = small_net(2);
  const auto net = init_convnet(cfg, 5);
  ag::Tape t;
  const auto params = convnet_leaves(t, net, false);
  const auto embed = convnet_embedder(cfg, params);
  const Tensor r = random_tensor({2, 1, 8, 8}, 7), s = random_tensor({1, 1, 8, 8}, 8);
  CHECK(loss_dm(std::vector{t.constant(r)}, std::vector{t.constant(r)}, embed).value().item() == 0.0);
  CHECK(loss_dm(std::vector{t.constant(r)}, std::vector{t.constant(s)}, embed).value().item() > 0.0);
  CHECK_THROWS_AS(loss_dm(std::vector{t.constant(r)}, std::vector<ag::Var>{}, embed), InvalidArgument);
}

TEST_CASE("dc_layer_distance: cosine properties") {
  ag::Tape t;
  const Tensor a = random_tensor({3, 4}, 1), b = random_tensor({3, 4}, 2);
  const double base = dc_layer_distance(t.constant(a), t.constant(b)).value().item();
  Tensor a2 = a;
  for (auto& v : a2.data) v *= 7.5;
  Tensor b2 = b;
  for (auto& v : b2.data) v *= 0.01;
  CHECK(dc_layer_distance(t.constant(a2), t.constant(b2)).value().item() == doctest::Approx(base).epsilon(1e-12));
  CHECK(dc_layer_distance(t.constant(a), t.constant(a)).value().item() == doctest::Approx(0.0).epsilon(1e-12));
  Tensor neg = a;
  for (auto& v : neg.data) v = -v;
  CHECK(dc_layer_distance(t.constant(a), t.constant(neg)).value().item() == doctest::Approx(2.0));
  // a zero row contributes 0 rather than NaN
  Tensor z = a;
  for (std::size_t j = 0; j < 4; ++j) z.data[j] = 0.0;
  const double with_zero = dc_layer_distance(t.constant(z), t.constant(b)).value().item();
  CHECK(std::isfinite(with_zero));
  CHECK(dc_layer_distance(t.constant(Tensor({2, 2})), t.constant(Tensor({2, 2}, 1.0))).value().item() == 0.0);
}

TEST_CASE("loss_dc: identical sides, orthogonal linear gradients, bounds") {
  ConvNetConfig lin = small_net(2, 2);
  lin.arch = Arch::mlp;
  lin.depth = 0;
  auto net = init_convnet(lin, 0);
  for (auto& p : net.params)
    for (auto& v : p.data) v = 0.0;
  ag::Tape t;
  auto params = convnet_leaves(t, net, true);
  // with zero weights every row of dCE/dW is (p_r - y_r) x; orthogonal inputs
  // give orthogonal rows
  const Tensor xr({1, 1, 2, 2}, std::vector<double>{1, 0, 0, 0});
  const Tensor xs({1, 1, 2, 2}, std::vector<double>{0, 1, 0, 0});
  const std::vector<std::size_t> cls{0};
  auto ortho = loss_dc(std::vector{t.constant(xr)}, std::vector{t.constant(xs)}, cls, lin, params);
  CHECK(ortho.value().item() == doctest::Approx(1.0).epsilon(1e-12));
  auto same = loss_dc(std::vector{t.constant(xr)}, std::vector{t.constant(xr)}, cls, lin, params);
  CHECK(same.value().item() == doctest::Approx(0.0).epsilon(1e-12));

  const auto cfg = small_net(3);
  const auto conv = init_convnet(cfg, 3);
  ag::Tape t2;
  auto cp = convnet_leaves(t2, conv, true);
  std::vector<ag::Var> real, synth;
  for (std::uint64_t c = 0; c < 3; ++c) {
    real.push_back(t2.constant(random_tensor({4, 1, 8, 8}, 10 + c)));
    synth.push_back(t2.constant(random_tensor({2, 1, 8, 8}, 20 + c)));
  }
  const double v = loss_dc(real, synth, std::vector<std::size_t>{0, 1, 2}, cfg, cp).value().item();
  CHECK(v >= 0.0);
  CHECK(v <= 2.0 * 3 * 3);
  CHECK(loss_dc(real, real, std::vector<std::size_t>{0, 1, 2}, cfg, cp).value().item() ==
        doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("end-to-end losses are differentiable through decode") {
  const auto fcfg = FieldConfig::uniform(2, 1, 2, 3, 3.0);
  const auto f0 = init_siren(fcfg, 1);
  const Tensor coords = coordinate_tensor(make_coordinate_set({8, 8}));
  const Tensor real = random_tensor({3, 1, 8, 8}, 4, 0.0, 1.0);
  const auto cfg = small_net(2);
  const auto embed_net = init_convnet(cfg, 6);
  // the field's parameters as leaves, decoded to images and embedded
  auto build_images = [&](ag::Tape& t, std::span<const ag::Var> v) {
    FieldVars fv;
    for (std::size_t l = 0; l < 3; ++l) {
      fv.weights.push_back(v[2 * l]);
      fv.biases.push_back(v[2 * l + 1]);
    }
    return ag::reshape(field_forward(fv, t.constant(coords), fcfg.omega0), {1, 1, 8, 8});
  };
  std::vector<Tensor> point;
  for (std::size_t l = 0; l < 3; ++l) {
    point.emplace_back(Shape{f0.layer_rows(l), f0.layer_cols(l)}, f0.weights[l]);
    point.emplace_back(Shape{f0.layer_rows(l)}, f0.biases[l]);
  }
  const double dm = ag::grad_check(
      [&](ag::Tape& t, std::span<const ag::Var> v) {
        auto p = convnet_leaves(t, embed_net, false);
        return loss_dm(std::vector{t.constant(real)}, std::vector{build_images(t, v)}, convnet_embedder(cfg, p));
      },
      point);
  CHECK(dm < 1e-4);
  const auto dc_net = init_convnet(cfg, 7);
  const double dc = ag::grad_check(
      [&](ag::Tape& t, std::span<const ag::Var> v) {
        auto p = convnet_leaves(t, dc_net, true);
        return loss_dc(std::vector{t.constant(real)}, std::vector{build_images(t, v)}, std::vector<std::size_t>{1}, cfg,
                       p);
      },
      point);
  CHECK(dc < 1e-4);
}

TEST_CASE("distill: DM lowers the loss on two blobs and is deterministic") {
  const auto real = make_blobs(2, 8, 20, 3);
  const auto fcfg = FieldConfig::uniform(2, 1, 1, 4, 3.0);
  const auto init = warmup_dataset(real, 2, fcfg, 5, {.iterations = 200, .lr = 1e-2});
  DistillConfig cfg;
  cfg.iterations = 0;
  cfg.net = small_net(2);
  CHECK(distill(real, init, cfg).dataset == init);

  cfg.iterations = 500;
  cfg.real_batch = 20;
  cfg.field_lr = 1e-2;
  cfg.seed = 3;
  std::ostringstream log;
  const auto a = distill(real, init, cfg, &log);
  REQUIRE(a.losses.size() == 500);
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    first += a.losses[i];
    last += a.losses[450 + i];
  }
  MESSAGE("DM loss, mean of first/last 50 iterations: " << first / 50 << " -> " << last / 50);
  CHECK(last < first);
  CHECK(!(a.dataset == init));
  const auto b = distill(real, init, cfg);
  CHECK(bundle_to_bytes(a.dataset) == bundle_to_bytes(b.dataset));
  CHECK(a.losses == b.losses);
  std::istringstream lines(log.str());
  std::string header, row;
  std::getline(lines, header);
  CHECK(header == "iteration,loss,wall_ms");
  std::getline(lines, row);
  CHECK(row.rfind("0,", 0) == 0);
}

TEST_CASE("distill: DC runs with augmentation") {
  const auto real = make_blobs(2, 8, 10, 4);
  const auto init = warmup_dataset(real, 1, FieldConfig::uniform(2, 1, 1, 3, 3.0), 1, {.iterations = 50});
  DistillConfig cfg;
  cfg.loss = LossKind::dc;
  cfg.iterations = 20;
  cfg.real_batch = 8;
  cfg.field_lr = 1e-2;
  cfg.net = small_net(2);
  cfg.augment = {.flip = true, .crop = true, .cutout = true};
  const auto r = distill(real, init, cfg);
  CHECK(r.losses.size() == 20);
  for (double v : r.losses) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 * 3 * 2);
  }
  CHECK(distill(real, init, cfg).dataset == r.dataset);
  cfg.net.classes = 1;
  CHECK_THROWS_AS(distill(real, init, cfg), InvalidArgument);
}

TEST_CASE("evaluate: ceiling on real data and chance on random labels") {
  const auto train = make_blobs(2, 8, 40, 1), test = make_blobs(2, 8, 40, 2);
  TrainConfig tc;
  tc.net = small_net(2);
  tc.epochs = 30;
  tc.batch_size = 16;
  const auto full = evaluate(train, test, tc, 3);
  CHECK(full.accuracies.size() == 3);
  CHECK(full.mean > 0.95);
  CHECK(full.std >= 0.0);

  LabeledDataset noise = train;
  Rng rng = make_rng(8);
  // labels shuffled within each true class, half 0 and half 1, so they carry
  // no class information at all
  for (std::size_t c = 0; c < 2; ++c) {
    auto idx = train.indices_of(c);
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
    for (std::size_t j = 0; j < idx.size(); ++j) noise.labels[idx[j]] = j % 2;
  }
  const auto chance = evaluate(noise, test, tc, 5);
  CHECK(std::abs(chance.mean - 0.5) <= 0.1);
  CHECK(evaluate(train, test, tc, 1).std == 0.0);
  CHECK(evaluate(train, test, tc, 3).accuracies == full.accuracies);
}
