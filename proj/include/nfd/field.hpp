#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nfd/autograd.hpp"
#include "nfd/grid.hpp"

namespace nfd {

/// Sine network shape: `widths[l]` is the width of hidden sine layer l; the
/// output layer is linear.
struct FieldConfig {
  std::size_t input_dim = 2;
  std::size_t output_dim = 1;
  std::vector<std::size_t> widths;
  double omega0 = 30.0;

  static FieldConfig uniform(std::size_t n, std::size_t m, std::size_t hidden_layers, std::size_t width,
                             double omega0 = 30.0);
  std::size_t hidden_layers() const { return widths.size(); }
  /// Throws InvalidArgument on zero sizes or a non-positive omega0.
  void validate() const;
  bool operator==(const FieldConfig&) const = default;
};

/// Scalars stored by one field of this shape.
std::size_t param_count(const FieldConfig& cfg);

/// Largest field count whose total parameters fit in `total_budget`.
std::size_t plan_budget(std::size_t total_budget, const FieldConfig& cfg);

/// One synthetic instance. Layer l has weight [rows, cols] row-major and a
/// bias of length rows; layer L is the linear output layer.
struct NeuralField {
  FieldConfig config;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  std::size_t layer_count() const { return weights.size(); }
  std::size_t layer_rows(std::size_t l) const;
  std::size_t layer_cols(std::size_t l) const;
  std::size_t parameter_count() const;
  /// Parameters in storage order: W then b per layer.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool operator==(const NeuralField&) const = default;
};

/// Zero-filled field with correctly shaped layers.
NeuralField make_field(const FieldConfig& cfg);

/// Sine-network initialization: W0 ~ U(-1/n, 1/n), later weights
/// ~ U(-sqrt(6/fan_in)/omega0, +sqrt(6/fan_in)/omega0), zero biases.
NeuralField init_siren(const FieldConfig& cfg, std::uint64_t seed);

/// Evaluates the field at every coordinate; output has m channels and shape
/// coords.dims.
GridTensor forward(const NeuralField& f, const CoordinateSet& coords);

/// Coordinates as a constant [n, P] tensor (one column per point).
ag::Tensor coordinate_tensor(const CoordinateSet& coords);

/// Field parameters recorded on a tape.
struct FieldVars {
  std::vector<ag::Var> weights;
  std::vector<ag::Var> biases;
};

FieldVars field_leaves(ag::Tape& tape, const NeuralField& f, bool requires_grad = true);
/// Differentiable forward pass; `coords` is [n, P], result is [m, P] which is
/// the channel-major layout of a GridTensor.
ag::Var field_forward(const FieldVars& vars, ag::Var coords, double omega0);
/// Gathers the gradients of `vars` (same order as NeuralField::flatten).
std::vector<double> flatten_gradients(const FieldVars& vars, std::span<const ag::Var> grads);

/// The distilled artifact: one field per synthetic instance.
struct SyntheticDataset {
  std::vector<NeuralField> fields;
  std::vector<std::size_t> labels;
  Dims decode_dims;
  std::size_t channels = 0;
  std::size_t class_count = 0;

  std::size_t size() const { return fields.size(); }
  /// Throws InvalidArgument on length mismatch or inconsistent configs.
  void validate() const;
  std::size_t total_parameters() const;
  bool operator==(const SyntheticDataset&) const = default;
};

// NFB1: "NFB1", u32 count, u8 n, u8 L, u16 m, u16 omega0*256, L x u16 widths,
// then per field u32 label + f32 parameters (W then b per layer). An optional
// trailer "NFBD" + u32 class count + n x u32 decode dims follows the payload.
std::string bundle_to_bytes(const SyntheticDataset& ds);
SyntheticDataset bundle_from_bytes(std::string_view bytes);
void save_bundle(const std::string& path, const SyntheticDataset& ds);
SyntheticDataset load_bundle(const std::string& path);

}  // namespace nfd
