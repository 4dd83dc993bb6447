#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "nfd/field.hpp"
#include "nfd/grid.hpp"

namespace nfd {

struct FitOptions {
  std::size_t iterations = 5000;
  double lr = 5e-4;
  /// Stop once the objective drops below this value.
  std::optional<double> early_stop{};
  /// Keep the objective of every iteration in FitReport::history.
  bool record_history = false;
};

struct FitReport {
  std::size_t iterations = 0;
  /// Sum of squared errors over the native lattice at the returned parameters.
  double objective = 0.0;
  double wall_seconds = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> history;
};

struct FitResult {
  NeuralField field;
  FitReport report;
};

/// Full-batch Adam on the squared error between the field and `target` over
/// the target's native lattice, starting from init_siren(cfg, seed).
FitResult fit_field(const GridTensor& target, const FieldConfig& cfg, std::uint64_t seed, const FitOptions& opt = {});

/// Continues fitting from an existing field.
FitResult refit_field(const GridTensor& target, NeuralField start, std::uint64_t seed, const FitOptions& opt = {});

GridTensor decode(const NeuralField& f, const Dims& dims);
GridTensor decode_cross_resolution(const NeuralField& f, const Dims& target_dims);
std::vector<GridTensor> decode_all(const SyntheticDataset& ds, const Dims& dims);

/// Fits `per_class` fields per class to distinct real instances sampled
/// without replacement. Field j is initialized with seed + j.
SyntheticDataset warmup_dataset(const LabeledDataset& real, std::size_t per_class, const FieldConfig& cfg,
                                 std::uint64_t seed, const FitOptions& opt = {});

}  // namespace nfd
