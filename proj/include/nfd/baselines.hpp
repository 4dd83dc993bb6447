#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nfd/codec.hpp"
#include "nfd/field.hpp"
#include "nfd/grid.hpp"

namespace nfd {

enum class Method { ddif, fred, idc, vanilla };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

/// Frequency selection shared by every instance, over DCT indices of `dims`
/// (lexicographic, axis 0 slowest).
struct FredMask {
  Dims dims;
  std::vector<std::uint8_t> bits;

  std::size_t popcount() const;
  /// Flat indices of selected frequencies in increasing order.
  std::vector<std::size_t> indices() const;
  bool operator==(const FredMask&) const = default;
};

FredMask full_mask(const Dims& dims);

/// Top-k frequencies by variance of the DCT coefficient across instances and
/// channels; ties go to the lower flat index.
FredMask fred_select_mask(const LabeledDataset& real, std::size_t k);
FredMask fred_select_mask(std::span<const GridTensor> instances, std::size_t k);

/// Masked coefficients: channel-major, mask order within a channel.
struct FredCoefficients {
  std::size_t channels = 0;
  std::vector<double> values;
  bool operator==(const FredCoefficients&) const = default;
};

/// DCT restricted to the mask (the least-squares projection onto its span).
FredCoefficients fred_encode(const GridTensor& g, const FredMask& mask);
GridTensor fred_decode(const FredCoefficients& c, const FredMask& mask);
/// Frequency-domain upsampling: the N-grid spectrum is scaled and embedded in
/// the low corner of an all-zero M-grid spectrum, then inverted at M.
GridTensor fred_upsample_zero_pad(const FredCoefficients& c, const FredMask& mask, const Dims& target);

struct IdcParam {
  std::vector<GridTensor> grids;
  std::vector<std::size_t> labels;
  std::size_t factor = 2;
  Interpolation method = Interpolation::bilinear;
};

/// Upsamples every stored grid by `factor` per axis.
std::vector<GridTensor> idc_decode(const IdcParam& p);
/// Low-resolution dims for factor f: ceil(N_k / f).
Dims idc_stored_dims(const Dims& dims, std::size_t factor);

struct VanillaParam {
  std::vector<GridTensor> grids;
  std::vector<std::size_t> labels;
};

/// How a parameterization spends a per-instance budget.
struct BudgetPlan {
  Method method = Method::vanilla;
  std::size_t channels = 1;
  Dims dims;
  FieldConfig field;         // ddif
  std::size_t coefficients = 0;  // fred, per channel
  std::size_t factor = 0;        // idc
  /// Scalars stored per instance.
  std::size_t utilized = 0;
};

/// Scalars one instance costs under a plan. Every method's budget goes
/// through here so comparisons are like-for-like.
std::size_t instance_budget(const BudgetPlan& plan);

struct PlanOptions {
  double omega0 = 30.0;
  std::size_t max_hidden_layers = 3;
};

/// Largest configuration of `method` whose per-instance cost is <= budget.
/// ddif: max param_count over uniform-width configs with 1..max_hidden_layers
/// layers, ties to fewer layers. fred: floor(budget / m) coefficients. idc:
/// smallest factor >= 2 that fits. vanilla: needs budget >= m * prod(dims).
BudgetPlan plan_instance(Method method, std::size_t budget, std::size_t channels, const Dims& dims,
                         const PlanOptions& opt = {});

struct ReconstructOptions {
  PlanOptions plan;
  FitOptions fit;
  std::uint64_t seed = 0;
  /// Global mask for fred; when absent the instance's own top-energy
  /// coefficients are used.
  const FredMask* mask = nullptr;
  Interpolation idc_method = Interpolation::bilinear;
};

struct Reconstruction {
  GridTensor grid;
  BudgetPlan plan;
};

Reconstruction reconstruct_at_budget(const GridTensor& real, std::size_t budget, Method method,
                                     const ReconstructOptions& opt = {});

// FRD1: "FRD1", u8 n, u8 reserved, u16 m, n x u32 dims, u32 count,
// u32 popcount, mask bitmap (LSB first, ceil(prod/8) bytes), then per instance
// u32 label + popcount*m f32 coefficients.
struct FredDataset {
  FredMask mask;
  std::size_t channels = 0;
  std::vector<FredCoefficients> instances;
  std::vector<std::size_t> labels;
  bool operator==(const FredDataset&) const = default;
};

std::string fred_to_bytes(const FredDataset& ds);
FredDataset fred_from_bytes(std::string_view bytes);
void write_fred(const std::string& path, const FredDataset& ds);
FredDataset read_fred(const std::string& path);

}  // namespace nfd
