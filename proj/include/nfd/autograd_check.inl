#pragma once

#include <algorithm>
#include <cmath>

namespace nfd::ag {

template <typename F>
double grad_check(F&& build, const std::vector<Tensor>& point, double h) {
  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> params;
    for (const auto& p : point) params.push_back(tape.leaf(p));
    Var root = build(tape, std::span<const Var>(params));
    for (Var g : gradients(root, params)) analytic.push_back(g.value());
  }
  auto eval = [&](const std::vector<Tensor>& at) {
    Tape tape;
    std::vector<Var> params;
    for (const auto& p : at) params.push_back(tape.leaf(p));
    return build(tape, std::span<const Var>(params)).value().item();
  };
  double worst = 0.0;
  std::vector<Tensor> probe = point;
  for (std::size_t t = 0; t < point.size(); ++t)
    for (std::size_t i = 0; i < point[t].size(); ++i) {
      const double x0 = point[t].data[i];
      probe[t].data[i] = x0 + h;
      const double fp = eval(probe);
      probe[t].data[i] = x0 - h;
      const double fm = eval(probe);
      probe[t].data[i] = x0;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::abs(analytic[t].data[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  return worst;
}

}  // namespace nfd::ag
