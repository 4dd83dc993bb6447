#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace nfd {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First and second moment estimates; empty moments are zero-initialized on
/// the first step.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;
};

/// One bias-corrected Adam update of a flat parameter vector.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamOptions& opt = {});

}  // namespace nfd
