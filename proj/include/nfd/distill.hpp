#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "nfd/autograd.hpp"
#include "nfd/convnet.hpp"
#include "nfd/field.hpp"
#include "nfd/grid.hpp"
#include "nfd/rng.hpp"

namespace nfd {

// ---- augmentation ---------------------------------------------------------

struct AugmentFlags {
  bool flip = false;
  bool crop = false;
  bool cutout = false;
  /// Zero padding before the random crop, in pixels.
  std::size_t crop_pad = 2;
  /// Cutout square side as a fraction of the smaller spatial side.
  double cutout_ratio = 0.5;
  bool any() const { return flip || crop || cutout; }
};

/// One draw of transform parameters, applied identically to every sample it
/// is used on (and to both branches of a matching step).
struct AugmentParams {
  bool flip = false;
  long shift_y = 0, shift_x = 0;
  bool cutout = false;
  std::size_t cut_y = 0, cut_x = 0, cut_size = 0;
};

AugmentParams draw_augment(const AugmentFlags& flags, std::size_t height, std::size_t width, Rng& rng);
/// Differentiable application to an NCHW node (a gather with fixed indices).
ag::Var augment(ag::Var x, const AugmentParams& p);
/// Applies one draw from `seed` to every grid of a batch.
std::vector<GridTensor> augment(std::span<const GridTensor> batch, const AugmentFlags& flags, std::uint64_t seed);

/// Stacks same-shape 2-D grids into an [N, C, H, W] tensor.
ag::Tensor stack_nchw(std::span<const GridTensor> grids);
ag::Tensor stack_nchw(const std::vector<const GridTensor*>& grids);

// ---- matching losses ------------------------------------------------------

/// Maps an NCHW node to per-sample features [N, F].
using Embedder = std::function<ag::Var(ag::Var)>;
Embedder identity_embedder();
Embedder convnet_embedder(const ConvNetConfig& cfg, std::span<const ag::Var> params);

/// sum_c || mean_i embed(real_c)_i - mean_i embed(synth_c)_i ||^2. Index c of
/// both spans is the same class.
ag::Var loss_dm(std::span<const ag::Var> real, std::span<const ag::Var> synth, const Embedder& embed);

/// Per-row 1 - cos between two gradients of one weight tensor, flattened to
/// [shape[0], rest] and averaged over rows. Rows where either gradient is
/// exactly zero contribute 0.
ag::Var dc_layer_distance(ag::Var g_real, ag::Var g_synth);

/// sum_c sum_weights dc_layer_distance(grad CE(real_c), grad CE(synth_c)),
/// with classifier parameters `params` (bias vectors are skipped). The real
/// gradients are constants; the synthetic ones stay differentiable.
ag::Var loss_dc(std::span<const ag::Var> real, std::span<const ag::Var> synth, std::span<const std::size_t> classes,
                const ConvNetConfig& cfg, std::span<const ag::Var> params);

// ---- distillation loop ----------------------------------------------------

enum class LossKind { dc, dm };
LossKind parse_loss(std::string_view name);
std::string_view loss_name(LossKind k);

struct DistillConfig {
  LossKind loss = LossKind::dm;
  std::size_t iterations = 500;
  /// Real instances sampled per class each iteration.
  std::size_t real_batch = 32;
  /// Synthetic fields per class per iteration; 0 means all of them.
  std::size_t synth_batch = 0;
  double field_lr = 1e-3;
  std::uint64_t seed = 0;
  AugmentFlags augment{};
  ConvNetConfig net{};
  /// DC only: classifier SGD updates on the synthetic set after each step.
  std::size_t dc_inner_steps = 1;
  double dc_classifier_lr = 1e-2;
  /// DC only: iterations between classifier re-initializations.
  std::size_t dc_reinit_every = 10;

  void validate() const;
};

struct DistillResult {
  SyntheticDataset dataset;
  /// Matching loss at each iteration, before the update.
  std::vector<double> losses;
};

/// Optimizes the fields of `init` to match `real`. When `loss_log` is given,
/// one CSV row "iteration,loss,wall_ms" is written per iteration.
DistillResult distill(const LabeledDataset& real, const SyntheticDataset& init, const DistillConfig& cfg,
                      std::ostream* loss_log = nullptr);

// ---- evaluation -----------------------------------------------------------

struct TrainConfig {
  ConvNetConfig net{};
  std::size_t epochs = 300;
  double lr = 1e-3;
  std::size_t batch_size = 256;
  AugmentFlags augment{};
  std::uint64_t seed = 0;
};

struct EvalResult {
  std::vector<double> accuracies;
  double mean = 0.0;
  /// Sample standard deviation; 0 for a single repeat.
  double std = 0.0;
};

/// Trains a fresh classifier on `train` and returns its test accuracy.
double train_and_test(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                      std::uint64_t seed);
/// `repeats` independent classifiers (seeds derived from cfg.seed), run in
/// parallel.
EvalResult evaluate(const LabeledDataset& train, const LabeledDataset& test, const TrainConfig& cfg,
                    std::size_t repeats = 5);
/// Decodes the synthetic set at the test shape, then evaluates.
EvalResult evaluate(const SyntheticDataset& synth, const LabeledDataset& test, const TrainConfig& cfg,
                    std::size_t repeats = 5);

}  // namespace nfd
