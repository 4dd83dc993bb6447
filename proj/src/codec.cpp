#include "nfd/codec.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "nfd/errors.hpp"
#include "nfd/optim.hpp"
#include "nfd/rng.hpp"

namespace nfd {

namespace {

double squared_error(const GridTensor& a, const GridTensor& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

}  // namespace

FitResult refit_field(const GridTensor& target, NeuralField field, std::uint64_t seed, const FitOptions& opt) {
  const FieldConfig& cfg = field.config;
  if (cfg.input_dim != target.rank())
    throw InvalidArgument("field input dimension " + std::to_string(cfg.input_dim) + " != target rank " +
                          std::to_string(target.rank()));
  if (cfg.output_dim != target.channels())
    throw InvalidArgument("field output dimension " + std::to_string(cfg.output_dim) + " != target channels " +
                          std::to_string(target.channels()));
  const auto start = std::chrono::steady_clock::now();
  const CoordinateSet coords = make_coordinate_set(target.shape());
  const ag::Tensor coord_tensor = coordinate_tensor(coords);
  const ag::Tensor target_tensor(ag::Shape{target.channels(), target.points()},
                                 std::vector<double>(target.values().begin(), target.values().end()));

  FitReport report;
  report.seed = seed;
  AdamState state;
  const AdamOptions adam{.lr = opt.lr};
  std::vector<double> params = field.flatten();
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    ag::Tape tape;
    FieldVars vars = field_leaves(tape, field);
    ag::Var out = field_forward(vars, tape.constant(coord_tensor), cfg.omega0);
    ag::Var loss = ag::sum(ag::square(ag::sub(out, tape.constant(target_tensor))));
    const double value = loss.value().item();
    if (opt.record_history) report.history.push_back(value);
    if (opt.early_stop && value < *opt.early_stop) break;
    std::vector<ag::Var> wrt;
    for (std::size_t l = 0; l < vars.weights.size(); ++l) {
      wrt.push_back(vars.weights[l]);
      wrt.push_back(vars.biases[l]);
    }
    const auto grads = ag::gradients(loss, wrt);
    adam_step(params, flatten_gradients(vars, grads), state, adam);
    field.assign(params);
    ++report.iterations;
  }
  report.objective = squared_error(forward(field, coords), target);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {std::move(field), std::move(report)};
}

FitResult fit_field(const GridTensor& target, const FieldConfig& cfg, std::uint64_t seed, const FitOptions& opt) {
  return refit_field(target, init_siren(cfg, seed), seed, opt);
}

GridTensor decode(const NeuralField& f, const Dims& dims) {
  if (dims.size() != f.config.input_dim)
    throw InvalidArgument("decode dims rank " + std::to_string(dims.size()) + " != field input dimension " +
                          std::to_string(f.config.input_dim));
  return forward(f, make_coordinate_set(dims));
}

GridTensor decode_cross_resolution(const NeuralField& f, const Dims& target_dims) { return decode(f, target_dims); }

std::vector<GridTensor> decode_all(const SyntheticDataset& ds, const Dims& dims) {
  std::vector<GridTensor> out(ds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < ds.size(); ++i) out[i] = decode(ds.fields[i], dims);
  return out;
}

SyntheticDataset warmup_dataset(const LabeledDataset& real, std::size_t per_class, const FieldConfig& cfg,
                                 std::uint64_t seed, const FitOptions& opt) {
  real.validate();
  if (real.size() == 0) throw InvalidArgument("warm-up needs a non-empty dataset");
  if (per_class == 0) throw InvalidArgument("warm-up needs at least one field per class");
  cfg.validate();
  if (cfg.input_dim != real.instances[0].rank() || cfg.output_dim != real.instances[0].channels())
    throw InvalidArgument("field config does not match the dataset's rank/channels");
  Rng rng = make_rng(derive_seed(seed, "warmup-sample"));
  std::vector<std::size_t> sources;
  std::vector<std::size_t> labels;
  for (std::size_t c = 0; c < real.class_count; ++c) {
    std::vector<std::size_t> pool = real.indices_of(c);
    if (pool.size() < per_class)
      throw InvalidArgument("class " + std::to_string(c) + " has " + std::to_string(pool.size()) +
                            " instances, warm-up needs " + std::to_string(per_class));
    // partial Fisher-Yates: the first per_class entries are a uniform sample
    for (std::size_t i = 0; i < per_class; ++i) {
      std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
      sources.push_back(pool[i]);
      labels.push_back(c);
    }
  }

  SyntheticDataset ds;
  ds.fields.resize(sources.size());
  ds.labels = labels;
  ds.decode_dims = real.instances[0].shape();
  ds.channels = real.instances[0].channels();
  ds.class_count = real.class_count;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t j = 0; j < sources.size(); ++j)
    ds.fields[j] = fit_field(real.instances[sources[j]], cfg, seed + j, opt).field;
  return ds;
}

}  // namespace nfd
