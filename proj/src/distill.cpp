#include "nfd/distill.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include "nfd/codec.hpp"
#include "nfd/errors.hpp"
#include "nfd/optim.hpp"

namespace nfd {

using ag::Shape;
using ag::Tensor;
using ag::Var;

// ---- augmentation ---------------------------------------------------------

AugmentParams draw_augment(const AugmentFlags& flags, std::size_t height, std::size_t width, Rng& rng) {
  AugmentParams p;
  if (flags.flip) p.flip = uniform(rng, 0.0, 1.0) < 0.5;
  if (flags.crop) {
    const auto span = static_cast<std::uint64_t>(2 * flags.crop_pad + 1);
    p.shift_y = static_cast<long>(uniform_index(rng, span)) - static_cast<long>(flags.crop_pad);
    p.shift_x = static_cast<long>(uniform_index(rng, span)) - static_cast<long>(flags.crop_pad);
  }
  if (flags.cutout) {
    const auto side = static_cast<std::size_t>(flags.cutout_ratio * static_cast<double>(std::min(height, width)));
    if (side > 0) {
      p.cutout = true;
      p.cut_size = side;
      p.cut_y = uniform_index(rng, height - side + 1);
      p.cut_x = uniform_index(rng, width - side + 1);
    }
  }
  return p;
}

Var augment(Var x, const AugmentParams& p) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw InvalidArgument("augment expects an NCHW tensor");
  const std::size_t planes = s[0] * s[1], h = s[2], w = s[3];
  auto index = std::make_shared<std::vector<std::int64_t>>(planes * h * w);
  for (std::size_t pl = 0; pl < planes; ++pl)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t xx = 0; xx < w; ++xx) {
        std::int64_t src = -1;
        const bool cut = p.cutout && y >= p.cut_y && y < p.cut_y + p.cut_size && xx >= p.cut_x && xx < p.cut_x + p.cut_size;
        const long sy = static_cast<long>(y) - p.shift_y, sx = static_cast<long>(xx) - p.shift_x;
        if (!cut && sy >= 0 && sx >= 0 && sy < static_cast<long>(h) && sx < static_cast<long>(w)) {
          const std::size_t cx = p.flip ? w - 1 - static_cast<std::size_t>(sx) : static_cast<std::size_t>(sx);
          src = static_cast<std::int64_t>((pl * h + static_cast<std::size_t>(sy)) * w + cx);
        }
        (*index)[(pl * h + y) * w + xx] = src;
      }
  return ag::gather(x, std::move(index), s);
}

std::vector<GridTensor> augment(std::span<const GridTensor> batch, const AugmentFlags& flags, std::uint64_t seed) {
  if (batch.empty()) return {};
  if (!flags.any()) return {batch.begin(), batch.end()};
  Rng rng = make_rng(seed);
  const Dims& dims = batch[0].shape();
  if (dims.size() != 2) throw UnsupportedRank("augmentation needs 2-D grids");
  const AugmentParams p = draw_augment(flags, dims[0], dims[1], rng);
  ag::Tape tape;
  Var out = augment(tape.constant(stack_nchw(batch)), p);
  std::vector<GridTensor> result;
  const std::size_t per = batch[0].size();
  for (std::size_t i = 0; i < batch.size(); ++i)
    result.emplace_back(batch[i].channels(), dims,
                        std::vector<double>(out.value().data.begin() + static_cast<std::ptrdiff_t>(i * per),
                                            out.value().data.begin() + static_cast<std::ptrdiff_t>((i + 1) * per)));
  return result;
}

Tensor stack_nchw(const std::vector<const GridTensor*>& grids) {
  if (grids.empty()) throw InvalidArgument("cannot stack an empty batch");
  const GridTensor& first = *grids[0];
  if (first.rank() != 2) throw UnsupportedRank("classifier input must be 2-D grids");
  Tensor t(Shape{grids.size(), first.channels(), first.shape()[0], first.shape()[1]});
  for (std::size_t i = 0; i < grids.size(); ++i) {
    if (grids[i]->shape() != first.shape() || grids[i]->channels() != first.channels())
      throw InvalidArgument("cannot stack grids of different shapes");
    std::copy(grids[i]->values().begin(), grids[i]->values().end(),
              t.data.begin() + static_cast<std::ptrdiff_t>(i * first.size()));
  }
  return t;
}

Tensor stack_nchw(std::span<const GridTensor> grids) {
  std::vector<const GridTensor*> ptrs;
  for (const auto& g : grids) ptrs.push_back(&g);
  return stack_nchw(ptrs);
}

// ---- matching losses ------------------------------------------------------

Embedder identity_embedder() {
  return [](Var x) {
    const Shape& s = x.shape();
    return ag::reshape(x, {s[0], x.value().size() / s[0]});
  };
}

Embedder convnet_embedder(const ConvNetConfig& cfg, std::span<const Var> params) {
  std::vector<Var> p(params.begin(), params.end());
  return [cfg, p](Var x) { return convnet_embed(cfg, p, x); };
}

Var loss_dm(std::span<const Var> real, std::span<const Var> synth, const Embedder& embed) {
  if (real.empty() || real.size() != synth.size()) throw InvalidArgument("DM needs matching, non-empty class lists");
  Var total;
  for (std::size_t c = 0; c < real.size(); ++c) {
    if (real[c].shape().empty() || real[c].shape()[0] == 0 || synth[c].shape().empty() || synth[c].shape()[0] == 0)
      throw InvalidArgument("DM class " + std::to_string(c) + " has an empty batch");
    Var diff = ag::sub(ag::mean_rows(embed(real[c])), ag::mean_rows(embed(synth[c])));
    Var term = ag::sum(ag::square(diff));
    total = total.valid() ? ag::add(total, term) : term;
  }
  return total;
}

Var dc_layer_distance(Var g_real, Var g_synth) {
  if (g_real.shape() != g_synth.shape() || g_real.shape().empty())
    throw InvalidArgument("DC layer gradients must share a non-scalar shape");
  const std::size_t rows = g_real.shape()[0], cols = g_real.value().size() / rows;
  Var a = ag::reshape(g_real, {rows, cols}), b = ag::reshape(g_synth, {rows, cols});
  Var total = g_real.tape().constant(Tensor::scalar(0.0));
  auto zero_row = [&](const Tensor& t, std::size_t r) {
    return std::all_of(t.data.begin() + static_cast<std::ptrdiff_t>(r * cols),
                       t.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols), [](double v) { return v == 0.0; });
  };
  for (std::size_t r = 0; r < rows; ++r) {
    if (zero_row(a.value(), r) || zero_row(b.value(), r)) continue;
    Var cos = ag::cosine_similarity(ag::slice(a, r, 1), ag::slice(b, r, 1));
    total = ag::add(total, ag::add_scalar(ag::scale(cos, -1.0), 1.0));
  }
  return ag::scale(total, 1.0 / static_cast<double>(rows));
}

Var loss_dc(std::span<const Var> real, std::span<const Var> synth, std::span<const std::size_t> classes,
            const ConvNetConfig& cfg, std::span<const Var> params) {
  if (real.empty() || real.size() != synth.size() || classes.size() != real.size())
    throw InvalidArgument("DC needs matching, non-empty class lists");
  Var total;
  for (std::size_t c = 0; c < real.size(); ++c) {
    const std::size_t nr = real[c].shape().at(0), ns = synth[c].shape().at(0);
    if (nr == 0 || ns == 0) throw InvalidArgument("DC class " + std::to_string(c) + " has an empty batch");
    const std::vector<std::size_t> lr(nr, classes[c]), ls(ns, classes[c]);
    const auto gr = ag::gradients(ag::softmax_cross_entropy(convnet_logits(cfg, params, real[c]), lr), params);
    const auto gs = ag::gradients(ag::softmax_cross_entropy(convnet_logits(cfg, params, synth[c]), ls), params, true);
    for (std::size_t l = 0; l < params.size(); l += 2) {
      Var term = dc_layer_distance(gr[l], gs[l]);
      total = total.valid() ? ag::add(total, term) : term;
    }
  }
  return total;
}

// ---- distillation loop ----------------------------------------------------

LossKind parse_loss(std::string_view name) {
  if (name == "dm") return LossKind::dm;
  if (name == "dc") return LossKind::dc;
  throw InvalidArgument("unknown distillation loss '" + std::string(name) + "'");
}

std::string_view loss_name(LossKind k) { return k == LossKind::dm ? "dm" : "dc"; }

void DistillConfig::validate() const {
  if (real_batch == 0) throw InvalidArgument("real batch size must be positive");
  if (!(field_lr > 0.0)) throw InvalidArgument("field learning rate must be positive");
  if (loss == LossKind::dc && (dc_reinit_every == 0 || !(dc_classifier_lr > 0.0)))
    throw InvalidArgument("DC needs a positive re-initialization period and classifier learning rate");
  net.validate();
}

namespace {

// k distinct indices from `pool` (partial Fisher-Yates), in draw order.
std::vector<std::size_t> sample(std::vector<std::size_t> pool, std::size_t k, Rng& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  pool.resize(k);
  return pool;
}

std::vector<Var> field_wrt(const FieldVars& v) {
  std::vector<Var> out;
  for (std::size_t l = 0; l < v.weights.size(); ++l) {
    out.push_back(v.weights[l]);
    out.push_back(v.biases[l]);
  }
  return out;
}

// One SGD step of the classifier on the decoded synthetic set.
void classifier_step(ConvNet& net, const Tensor& x, const std::vector<std::size_t>& labels, double lr) {
  ag::Tape tape;
  auto params = convnet_leaves(tape, net, true);
  Var loss = ag::softmax_cross_entropy(convnet_logits(net.config, params, tape.constant(x)), labels);
  const auto grads = ag::gradients(loss, params);
  for (std::size_t i = 0; i < params.size(); ++i)
    for (std::size_t j = 0; j < net.params[i].size(); ++j) net.params[i].data[j] -= lr * grads[i].value().data[j];
}

}  // namespace

DistillResult distill(const LabeledDataset& real, const SyntheticDataset& init, const DistillConfig& cfg,
                      std::ostream* loss_log) {
  cfg.validate();
  real.validate();
  init.validate();
  DistillResult result{init, {}};
  if (cfg.iterations == 0 || init.size() == 0) return result;
  if (real.size() == 0) throw InvalidArgument("distillation needs real data");
  const Dims& dims = real.instances[0].shape();
  const std::size_t channels = real.instances[0].channels();
  if (dims.size() != 2) throw UnsupportedRank("distillation supports 2-D grids");
  if (init.decode_dims != dims || init.fields[0].config.output_dim != channels)
    throw InvalidArgument("synthetic decode shape does not match the real data");
  if (cfg.net.channels != channels || cfg.net.height != dims[0] || cfg.net.width_px != dims[1] ||
      cfg.net.classes < std::max(real.class_count, init.class_count))
    throw InvalidArgument("classifier config does not match the data");

  SyntheticDataset& ds = result.dataset;
  std::vector<std::size_t> classes;
  std::vector<std::vector<std::size_t>> synth_of, real_of;
  for (std::size_t c = 0; c < std::max(real.class_count, init.class_count); ++c) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == c) s.push_back(i);
    if (s.empty()) continue;
    auto r = real.indices_of(c);
    if (r.empty()) throw InvalidArgument("class " + std::to_string(c) + " has synthetic fields but no real data");
    classes.push_back(c);
    synth_of.push_back(std::move(s));
    real_of.push_back(std::move(r));
  }

  std::vector<std::size_t> offsets(ds.size() + 1, 0);
  for (std::size_t i = 0; i < ds.size(); ++i) offsets[i + 1] = offsets[i] + ds.fields[i].parameter_count();
  std::vector<double> psi(offsets.back());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto flat = ds.fields[i].flatten();
    std::copy(flat.begin(), flat.end(), psi.begin() + static_cast<std::ptrdiff_t>(offsets[i]));
  }

  const Tensor coords = coordinate_tensor(make_coordinate_set(dims));
  Rng rng = make_rng(derive_seed(cfg.seed, "distill"));
  AdamState adam;
  const AdamOptions adam_opt{.lr = cfg.field_lr};
  ConvNet dc_net;
  const auto start = std::chrono::steady_clock::now();
  if (loss_log) *loss_log << "iteration,loss,wall_ms\n";

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    ag::Tape tape;
    std::vector<Var> real_vars, synth_vars, wrt;
    std::vector<std::size_t> used;  // field indices with leaves on this tape
    std::vector<FieldVars> leaves;
    Var coord_var = tape.constant(coords);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      const auto chosen = cfg.synth_batch == 0 ? synth_of[k] : sample(synth_of[k], cfg.synth_batch, rng);
      std::vector<Var> decoded;
      for (std::size_t i : chosen) {
        leaves.push_back(field_leaves(tape, ds.fields[i]));
        used.push_back(i);
        Var out = field_forward(leaves.back(), coord_var, ds.fields[i].config.omega0);
        decoded.push_back(ag::reshape(out, {1, channels, dims[0], dims[1]}));
      }
      Var synth_x = ag::concat(decoded);
      std::vector<const GridTensor*> batch;
      for (std::size_t r : sample(real_of[k], cfg.real_batch, rng)) batch.push_back(&real.instances[r]);
      Var real_x = tape.constant(stack_nchw(batch));
      if (cfg.augment.any()) {
        // one draw per class, shared by both branches
        const AugmentParams p = draw_augment(cfg.augment, dims[0], dims[1], rng);
        real_x = augment(real_x, p);
        synth_x = augment(synth_x, p);
      }
      real_vars.push_back(real_x);
      synth_vars.push_back(synth_x);
    }

    Var loss;
    if (cfg.loss == LossKind::dm) {
      const ConvNet embed_net = init_convnet(cfg.net, derive_seed(cfg.seed, "dm-embed", it));
      const auto params = convnet_leaves(tape, embed_net, false);
      loss = loss_dm(real_vars, synth_vars, convnet_embedder(cfg.net, params));
    } else {
      if (it % cfg.dc_reinit_every == 0) dc_net = init_convnet(cfg.net, derive_seed(cfg.seed, "dc-net", it));
      const auto params = convnet_leaves(tape, dc_net, true);
      loss = loss_dc(real_vars, synth_vars, classes, cfg.net, params);
    }
    const double value = loss.value().item();
    result.losses.push_back(value);

    for (const auto& v : leaves) {
      const auto w = field_wrt(v);
      wrt.insert(wrt.end(), w.begin(), w.end());
    }
    const auto grads = ag::gradients(loss, wrt);
    std::vector<double> g(psi.size(), 0.0);
    for (std::size_t j = 0, gi = 0; j < used.size(); ++j) {
      const std::size_t parts = 2 * leaves[j].weights.size();
      const auto flat = flatten_gradients(leaves[j], std::span<const Var>(grads).subspan(gi, parts));
      gi += parts;
      std::copy(flat.begin(), flat.end(), g.begin() + static_cast<std::ptrdiff_t>(offsets[used[j]]));
    }
    adam_step(psi, g, adam, adam_opt);
    for (std::size_t i = 0; i < ds.size(); ++i)
      ds.fields[i].assign(std::span<const double>(psi).subspan(offsets[i], offsets[i + 1] - offsets[i]));

    if (cfg.loss == LossKind::dc && cfg.dc_inner_steps > 0) {
      const auto decoded = decode_all(ds, dims);
      const Tensor x = stack_nchw(decoded);
      for (std::size_t s = 0; s < cfg.dc_inner_steps; ++s) classifier_step(dc_net, x, ds.labels, cfg.dc_classifier_lr);
    }
    if (loss_log) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      *loss_log << it << ',' << value << ',' << ms << '\n';
    }
  }
  return result;
}

// ---- evaluation -----------------------------------------------------------

double train_and_test(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                      std::uint64_t seed) {
  train.validate();
  test.validate();
  if (train.size() == 0 || test.size() == 0) throw InvalidArgument("evaluation needs train and test data");
  ConvNet net = init_convnet(cfg.net, seed);
  Rng rng = make_rng(derive_seed(seed, "train"));
  AdamState state;
  const AdamOptions adam{.lr = cfg.lr};
  std::vector<double> flat;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t bs = std::max<std::size_t>(1, cfg.batch_size);
  const auto& shape = train.instances[0].shape();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    for (std::size_t b0 = 0; b0 < order.size(); b0 += bs) {
      std::vector<const GridTensor*> batch;
      std::vector<std::size_t> labels;
      for (std::size_t j = b0; j < std::min(order.size(), b0 + bs); ++j) {
        batch.push_back(&train.instances[order[j]]);
        labels.push_back(train.labels[order[j]]);
      }
      ag::Tape tape;
      auto params = convnet_leaves(tape, net, true);
      Var x = tape.constant(stack_nchw(batch));
      if (cfg.augment.any()) x = augment(x, draw_augment(cfg.augment, shape[0], shape[1], rng));
      Var loss = ag::softmax_cross_entropy(convnet_logits(net.config, params, x), labels);
      const auto grads = ag::gradients(loss, params);
      flat.clear();
      std::vector<double> g;
      for (std::size_t i = 0; i < params.size(); ++i) {
        flat.insert(flat.end(), net.params[i].data.begin(), net.params[i].data.end());
        g.insert(g.end(), grads[i].value().data.begin(), grads[i].value().data.end());
      }
      adam_step(flat, g, state, adam);
      for (std::size_t i = 0, o = 0; i < params.size(); o += net.params[i].size(), ++i)
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(o), net.params[i].size(), net.params[i].data.begin());
    }
  }
  std::size_t correct = 0;
  for (std::size_t b0 = 0; b0 < test.size(); b0 += 256) {
    std::vector<const GridTensor*> batch;
    for (std::size_t j = b0; j < std::min(test.size(), b0 + 256); ++j) batch.push_back(&test.instances[j]);
    ag::Tape tape;
    auto params = convnet_leaves(tape, net, false);
    const Tensor logits = convnet_logits(net.config, params, tape.constant(stack_nchw(batch))).value();
    const std::size_t c = net.config.classes;
    for (std::size_t j = 0; j < batch.size(); ++j) {
      const auto row = logits.data.begin() + static_cast<std::ptrdiff_t>(j * c);
      const auto pred = static_cast<std::size_t>(std::max_element(row, row + static_cast<std::ptrdiff_t>(c)) - row);
      correct += pred == test.labels[b0 + j];
    }
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                    std::size_t repeats) {
  if (repeats == 0) throw InvalidArgument("evaluation needs at least one repeat");
  train.validate();
  test.validate();
  EvalResult r;
  r.accuracies.assign(repeats, 0.0);
  std::vector<std::exception_ptr> errors(repeats);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < repeats; ++k) {
    try {
      r.accuracies[k] = train_and_test(train, test, cfg, derive_seed(cfg.seed, "eval", k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  r.mean = std::accumulate(r.accuracies.begin(), r.accuracies.end(), 0.0) / static_cast<double>(repeats);
  if (repeats > 1) {
    double ss = 0.0;
    for (double a : r.accuracies) ss += (a - r.mean) * (a - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(repeats - 1));
  }
  return r;
}

EvalResult evaluate(const SyntheticDataset& synth, const LabeledDataset& test, const TrainConfig& cfg,
                    std::size_t repeats) {
  synth.validate();
  if (test.size() == 0) throw InvalidArgument("evaluation needs test data");
  LabeledDataset train;
  train.instances = decode_all(synth, test.instances[0].shape());
  train.labels = synth.labels;
  train.class_count = std::max(synth.class_count, test.class_count);
  return evaluate(train, test, cfg, repeats);
}

}  // namespace nfd
