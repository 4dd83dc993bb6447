#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "nfd/autograd.hpp"

namespace nfd {

enum class Norm { instance, none };
enum class Arch { convnet, mlp };

Norm parse_norm(std::string_view name);
Arch parse_arch(std::string_view name);

/// Classifier shape. convnet: `depth` blocks of 3x3 conv (`width` filters,
/// bias) -> norm -> relu -> 2x2 average pool, then a linear layer. mlp:
/// flatten -> `depth` hidden layers of `width` relu units -> linear; depth 0
/// is a plain linear model.
struct ConvNetConfig {
  Arch arch = Arch::convnet;
  std::size_t channels = 1;
  std::size_t height = 16;
  std::size_t width_px = 16;
  std::size_t classes = 2;
  std::size_t depth = 3;
  std::size_t width = 16;
  Norm norm = Norm::instance;

  /// Throws InvalidArgument on zero sizes or a spatial size that pools to 0.
  void validate() const;
  /// Length of the feature vector fed to the final linear layer.
  std::size_t feature_dim() const;
};

/// Parameters in layer order: (weight, bias) per layer, final linear last.
/// Conv weights are [out, in, 3, 3]; dense weights are [out, in].
struct ConvNet {
  ConvNetConfig config;
  std::vector<ag::Tensor> params;
};

/// Weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
ConvNet init_convnet(const ConvNetConfig& cfg, std::uint64_t seed);

std::vector<ag::Var> convnet_leaves(ag::Tape& tape, const ConvNet& net, bool requires_grad);
/// Features before the final linear layer, [N, feature_dim]; x is NCHW.
ag::Var convnet_embed(const ConvNetConfig& cfg, std::span<const ag::Var> params, ag::Var x);
/// Logits [N, classes].
ag::Var convnet_logits(const ConvNetConfig& cfg, std::span<const ag::Var> params, ag::Var x);

}  // namespace nfd
