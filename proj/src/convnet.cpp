#include "nfd/convnet.hpp"

#include <cmath>
#include <string>

#include "nfd/errors.hpp"
#include "nfd/rng.hpp"

namespace nfd {

using ag::Shape;
using ag::Tensor;
using ag::Var;

Norm parse_norm(std::string_view name) {
  if (name == "instance") return Norm::instance;
  if (name == "none") return Norm::none;
  throw InvalidArgument("unknown norm '" + std::string(name) + "'");
}

Arch parse_arch(std::string_view name) {
  if (name == "convnet") return Arch::convnet;
  if (name == "mlp") return Arch::mlp;
  throw InvalidArgument("unknown architecture '" + std::string(name) + "'");
}

void ConvNetConfig::validate() const {
  if (channels == 0 || height == 0 || width_px == 0 || classes == 0)
    throw InvalidArgument("classifier needs positive channels, spatial size and classes");
  if (arch == Arch::convnet) {
    if (depth == 0 || width == 0) throw InvalidArgument("convnet needs depth >= 1 and width >= 1");
    std::size_t h = height, w = width_px;
    for (std::size_t b = 0; b < depth; ++b) {
      if (h < 2 || w < 2)
        throw InvalidArgument("convnet depth " + std::to_string(depth) + " pools " + std::to_string(height) + "x" +
                              std::to_string(width_px) + " below 1x1");
      h /= 2;
      w /= 2;
    }
  } else if (depth > 0 && width == 0) {
    throw InvalidArgument("mlp hidden width must be positive");
  }
}

std::size_t ConvNetConfig::feature_dim() const {
  if (arch == Arch::mlp) return depth == 0 ? channels * height * width_px : width;
  std::size_t h = height, w = width_px;
  for (std::size_t b = 0; b < depth; ++b) {
    h /= 2;
    w /= 2;
  }
  return width * h * w;
}

ConvNet init_convnet(const ConvNetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(derive_seed(seed, "classifier"));
  ConvNet net{cfg, {}};
  auto layer = [&](Shape wshape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor w(wshape), b(Shape{wshape[0]});
    for (auto& v : w.data) v = uniform(rng, -bound, bound);
    for (auto& v : b.data) v = uniform(rng, -bound, bound);
    net.params.push_back(std::move(w));
    net.params.push_back(std::move(b));
  };
  if (cfg.arch == Arch::convnet) {
    std::size_t in = cfg.channels;
    for (std::size_t b = 0; b < cfg.depth; ++b) {
      layer({cfg.width, in, 3, 3}, in * 9);
      in = cfg.width;
    }
  } else {
    std::size_t in = cfg.channels * cfg.height * cfg.width_px;
    for (std::size_t b = 0; b < cfg.depth; ++b) {
      layer({cfg.width, in}, in);
      in = cfg.width;
    }
  }
  layer({cfg.classes, cfg.feature_dim()}, cfg.feature_dim());
  return net;
}

std::vector<Var> convnet_leaves(ag::Tape& tape, const ConvNet& net, bool requires_grad) {
  std::vector<Var> out;
  out.reserve(net.params.size());
  for (const auto& p : net.params) out.push_back(tape.leaf(p, requires_grad));
  return out;
}

namespace {

void check_input(const ConvNetConfig& cfg, std::span<const Var> params, Var x) {
  if (params.size() != 2 * (cfg.depth + 1)) throw InvalidArgument("classifier parameter count does not match config");
  const Shape& s = x.shape();
  if (s.size() != 4 || s[1] != cfg.channels || s[2] != cfg.height || s[3] != cfg.width_px)
    throw InvalidArgument("classifier input must be [N, " + std::to_string(cfg.channels) + ", " +
                          std::to_string(cfg.height) + ", " + std::to_string(cfg.width_px) + "]");
}

Var dense(Var h, Var w, Var b) { return ag::add_bias(ag::matmul(h, w, false, true), b, 1); }

}  // namespace

Var convnet_embed(const ConvNetConfig& cfg, std::span<const Var> params, Var x) {
  check_input(cfg, params, x);
  const std::size_t n = x.shape()[0];
  if (cfg.arch == Arch::mlp) {
    Var h = ag::reshape(x, {n, cfg.channels * cfg.height * cfg.width_px});
    for (std::size_t b = 0; b < cfg.depth; ++b) h = ag::relu(dense(h, params[2 * b], params[2 * b + 1]));
    return h;
  }
  Var h = x;
  for (std::size_t b = 0; b < cfg.depth; ++b) {
    h = ag::add_bias(ag::conv2d(h, params[2 * b], 1), params[2 * b + 1], 1);
    if (cfg.norm == Norm::instance) h = ag::instance_norm(h);
    h = ag::avg_pool2(ag::relu(h));
  }
  return ag::reshape(h, {n, cfg.feature_dim()});
}

Var convnet_logits(const ConvNetConfig& cfg, std::span<const Var> params, Var x) {
  Var f = convnet_embed(cfg, params, x);
  return dense(f, params[2 * cfg.depth], params[2 * cfg.depth + 1]);
}

}  // namespace nfd
