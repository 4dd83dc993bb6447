#include "nfd/field.hpp"

#include <cmath>
#include <string>

#include "nfd/errors.hpp"
#include "nfd/kernels.hpp"
#include "nfd/rng.hpp"

namespace nfd {

FieldConfig FieldConfig::uniform(std::size_t n, std::size_t m, std::size_t hidden_layers, std::size_t width,
                                 double omega0) {
  FieldConfig cfg;
  cfg.input_dim = n;
  cfg.output_dim = m;
  cfg.widths.assign(hidden_layers, width);
  cfg.omega0 = omega0;
  return cfg;
}

void FieldConfig::validate() const {
  if (input_dim == 0) throw InvalidArgument("field input dimension must be >= 1");
  if (output_dim == 0) throw InvalidArgument("field output dimension must be >= 1");
  if (widths.empty()) throw InvalidArgument("field needs at least one hidden layer");
  for (auto w : widths)
    if (w == 0) throw InvalidArgument("field widths must be >= 1");
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) throw InvalidArgument("omega0 must be positive");
}

std::size_t param_count(const FieldConfig& cfg) {
  cfg.validate();
  std::size_t total = cfg.widths[0] * (cfg.input_dim + 1);
  for (std::size_t l = 1; l < cfg.widths.size(); ++l) total += cfg.widths[l] * (cfg.widths[l - 1] + 1);
  return total + cfg.output_dim * (cfg.widths.back() + 1);
}

std::size_t plan_budget(std::size_t total_budget, const FieldConfig& cfg) {
  const std::size_t b = param_count(cfg);
  if (total_budget < b)
    throw BudgetTooSmall("budget " + std::to_string(total_budget) + " is below one field of " + std::to_string(b) +
                         " parameters");
  return total_budget / b;
}

std::size_t NeuralField::layer_rows(std::size_t l) const {
  return l < config.widths.size() ? config.widths[l] : config.output_dim;
}

std::size_t NeuralField::layer_cols(std::size_t l) const {
  return l == 0 ? config.input_dim : config.widths[l - 1];
}

std::size_t NeuralField::parameter_count() const {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
  return total;
}

std::vector<double> NeuralField::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    out.insert(out.end(), weights[l].begin(), weights[l].end());
    out.insert(out.end(), biases[l].begin(), biases[l].end());
  }
  return out;
}

void NeuralField::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count())
    throw InvalidArgument("field expects " + std::to_string(parameter_count()) + " parameters, got " +
                          std::to_string(flat.size()));
  std::size_t pos = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    for (auto& w : weights[l]) w = flat[pos++];
    for (auto& b : biases[l]) b = flat[pos++];
  }
}

NeuralField make_field(const FieldConfig& cfg) {
  cfg.validate();
  NeuralField f;
  f.config = cfg;
  const std::size_t layers = cfg.widths.size() + 1;
  f.weights.resize(layers);
  f.biases.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    f.weights[l].assign(f.layer_rows(l) * f.layer_cols(l), 0.0);
    f.biases[l].assign(f.layer_rows(l), 0.0);
  }
  return f;
}

NeuralField init_siren(const FieldConfig& cfg, std::uint64_t seed) {
  NeuralField f = make_field(cfg);
  Rng rng = make_rng(seed);
  const double first = 1.0 / static_cast<double>(cfg.input_dim);
  for (auto& w : f.weights[0]) w = uniform(rng, -first, first);
  for (std::size_t l = 1; l < f.layer_count(); ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(f.layer_cols(l))) / cfg.omega0;
    for (auto& w : f.weights[l]) w = uniform(rng, -bound, bound);
  }
  return f;
}

GridTensor forward(const NeuralField& f, const CoordinateSet& coords) {
  if (coords.rank() != f.config.input_dim)
    throw InvalidArgument("field takes " + std::to_string(f.config.input_dim) + "-d coordinates, got " +
                          std::to_string(coords.rank()) + "-d");
  std::vector<kernels::DenseLayer> layers;
  for (std::size_t l = 0; l < f.layer_count(); ++l)
    layers.push_back({f.weights[l].data(), f.biases[l].data(), f.layer_rows(l), f.layer_cols(l)});
  GridTensor out(f.config.output_dim, coords.dims);
  kernels::siren_forward(layers, f.config.omega0, coords.points.data(), coords.size(), out.values().data());
  return out;
}

ag::Tensor coordinate_tensor(const CoordinateSet& coords) {
  const std::size_t n = coords.rank(), count = coords.size();
  ag::Tensor t(ag::Shape{n, count});
  for (std::size_t p = 0; p < count; ++p)
    for (std::size_t k = 0; k < n; ++k) t.data[k * count + p] = coords.points[p * n + k];
  return t;
}

FieldVars field_leaves(ag::Tape& tape, const NeuralField& f, bool requires_grad) {
  FieldVars v;
  for (std::size_t l = 0; l < f.layer_count(); ++l) {
    v.weights.push_back(tape.leaf(ag::Tensor({f.layer_rows(l), f.layer_cols(l)}, f.weights[l]), requires_grad));
    v.biases.push_back(tape.leaf(ag::Tensor({f.layer_rows(l)}, f.biases[l]), requires_grad));
  }
  return v;
}

ag::Var field_forward(const FieldVars& vars, ag::Var coords, double omega0) {
  ag::Var h = coords;
  const std::size_t last = vars.weights.size() - 1;
  for (std::size_t l = 0; l < last; ++l)
    h = ag::sin(ag::scale(ag::add_bias(ag::matmul(vars.weights[l], h), vars.biases[l], 0), omega0));
  return ag::add_bias(ag::matmul(vars.weights[last], h), vars.biases[last], 0);
}

std::vector<double> flatten_gradients(const FieldVars& vars, std::span<const ag::Var> grads) {
  if (grads.size() != 2 * vars.weights.size()) throw InvalidArgument("gradient list does not match field layers");
  std::vector<double> out;
  for (std::size_t l = 0; l < vars.weights.size(); ++l) {
    const auto& gw = grads[2 * l].value().data;
    const auto& gb = grads[2 * l + 1].value().data;
    out.insert(out.end(), gw.begin(), gw.end());
    out.insert(out.end(), gb.begin(), gb.end());
  }
  return out;
}

void SyntheticDataset::validate() const {
  if (fields.size() != labels.size())
    throw InvalidArgument("synthetic dataset has " + std::to_string(fields.size()) + " fields but " +
                          std::to_string(labels.size()) + " labels");
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto& c = fields[i].config;
    c.validate();
    if (c.input_dim != fields[0].config.input_dim || c.output_dim != fields[0].config.output_dim)
      throw InvalidArgument("synthetic fields disagree on input/output dimension");
    if (channels != 0 && c.output_dim != channels) throw InvalidArgument("field channels disagree with dataset");
    if (!decode_dims.empty() && decode_dims.size() != c.input_dim)
      throw InvalidArgument("decode dims rank disagrees with field input dimension");
    if (fields[i].parameter_count() != param_count(c)) throw InvalidArgument("field parameter shapes are corrupt");
    if (class_count != 0 && labels[i] >= class_count) throw InvalidArgument("synthetic label out of range");
  }
}

std::size_t SyntheticDataset::total_parameters() const {
  std::size_t total = 0;
  for (const auto& f : fields) total += f.parameter_count();
  return total;
}

}  // namespace nfd
