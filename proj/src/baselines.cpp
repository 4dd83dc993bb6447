#include "nfd/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nfd/errors.hpp"

namespace nfd {

Method parse_method(std::string_view name) {
  if (name == "ddif") return Method::ddif;
  if (name == "fred") return Method::fred;
  if (name == "idc") return Method::idc;
  if (name == "vanilla") return Method::vanilla;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::ddif:
      return "ddif";
    case Method::fred:
      return "fred";
    case Method::idc:
      return "idc";
    case Method::vanilla:
      return "vanilla";
  }
  return "?";
}

std::size_t FredMask::popcount() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1)); }

std::vector<std::size_t> FredMask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out.push_back(i);
  return out;
}

FredMask full_mask(const Dims& dims) { return FredMask{dims, std::vector<std::uint8_t>(product(dims), 1)}; }

FredMask fred_select_mask(std::span<const GridTensor> instances, std::size_t k) {
  if (k == 0) throw InvalidArgument("mask size must be positive");
  if (instances.empty()) throw InvalidArgument("mask selection needs at least one instance");
  const Dims dims = instances[0].shape();
  const std::size_t points = product(dims);
  if (k > points) throw InvalidArgument("mask size " + std::to_string(k) + " exceeds " + std::to_string(points));

  std::vector<double> sum(points, 0.0), sum_sq(points, 0.0);
  std::size_t samples = 0;
  for (const auto& g : instances) {
    if (g.shape() != dims) throw InvalidArgument("mask selection needs same-shape instances");
    const GridTensor c = dct(g);
    for (std::size_t ch = 0; ch < c.channels(); ++ch) {
      auto v = c.channel(ch);
      for (std::size_t i = 0; i < points; ++i) {
        sum[i] += v[i];
        sum_sq[i] += v[i] * v[i];
      }
      ++samples;
    }
  }
  std::vector<double> variance(points);
  const double n = static_cast<double>(samples);
  for (std::size_t i = 0; i < points; ++i) {
    const double mean = sum[i] / n;
    variance[i] = std::max(0.0, sum_sq[i] / n - mean * mean);
  }
  // a single sample has no spread; fall back to its energy so the mask still
  // tracks where the signal lives
  if (samples == 1)
    for (std::size_t i = 0; i < points; ++i) variance[i] = sum_sq[i];

  std::vector<std::size_t> order(points);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return variance[a] > variance[b]; });
  FredMask mask{dims, std::vector<std::uint8_t>(points, 0)};
  for (std::size_t i = 0; i < k; ++i) mask.bits[order[i]] = 1;
  return mask;
}

FredMask fred_select_mask(const LabeledDataset& real, std::size_t k) {
  real.validate();
  return fred_select_mask(std::span<const GridTensor>(real.instances), k);
}

FredCoefficients fred_encode(const GridTensor& g, const FredMask& mask) {
  if (g.shape() != mask.dims) throw InvalidArgument("grid shape does not match the frequency mask");
  const GridTensor c = dct(g);
  const auto idx = mask.indices();
  FredCoefficients out;
  out.channels = g.channels();
  out.values.reserve(idx.size() * g.channels());
  for (std::size_t ch = 0; ch < g.channels(); ++ch) {
    auto v = c.channel(ch);
    for (auto i : idx) out.values.push_back(v[i]);
  }
  return out;
}

namespace {

GridTensor scatter(const FredCoefficients& c, const FredMask& mask) {
  const auto idx = mask.indices();
  if (c.channels == 0 || c.values.size() != idx.size() * c.channels)
    throw InvalidArgument("coefficient count does not match the frequency mask");
  GridTensor spec(c.channels, mask.dims);
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    auto v = spec.channel(ch);
    for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] = c.values[ch * idx.size() + j];
  }
  return spec;
}

}  // namespace

GridTensor fred_decode(const FredCoefficients& c, const FredMask& mask) { return idct(scatter(c, mask)); }

GridTensor fred_upsample_zero_pad(const FredCoefficients& c, const FredMask& mask, const Dims& target) {
  const Dims& src = mask.dims;
  if (target.size() != src.size()) throw InvalidArgument("zero-pad target rank differs from source");
  for (std::size_t k = 0; k < src.size(); ++k)
    if (target[k] <= src[k])
      throw InvalidArgument("zero-pad upsampling needs every target axis larger than the source");
  const GridTensor spec = scatter(c, mask);
  // orthonormal basis: sqrt(M/N) per axis keeps sample values (a constant
  // stays the same constant)
  double lambda = 1.0;
  for (std::size_t k = 0; k < src.size(); ++k)
    lambda *= std::sqrt(static_cast<double>(target[k]) / static_cast<double>(src[k]));
  GridTensor big(c.channels, target);
  const std::size_t n = src.size();
  std::vector<std::size_t> idx(n, 0);
  for (std::size_t p = 0; p < spec.points(); ++p) {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < n; ++k) flat = flat * target[k] + idx[k];
    for (std::size_t ch = 0; ch < c.channels; ++ch) big.channel(ch)[flat] = lambda * spec.channel(ch)[p];
    for (std::size_t k = n; k-- > 0;) {
      if (++idx[k] < src[k]) break;
      idx[k] = 0;
    }
  }
  return idct(big);
}

Dims idc_stored_dims(const Dims& dims, std::size_t factor) {
  if (factor < 2) throw InvalidArgument("IDC factor must be >= 2");
  Dims out;
  for (auto d : dims) out.push_back((d + factor - 1) / factor);
  return out;
}

std::vector<GridTensor> idc_decode(const IdcParam& p) {
  if (p.factor < 2) throw InvalidArgument("IDC factor must be >= 2");
  std::vector<GridTensor> out;
  out.reserve(p.grids.size());
  for (const auto& g : p.grids) {
    Dims target;
    for (auto d : g.shape()) target.push_back(d * p.factor);
    out.push_back(resample(g, target, p.method));
  }
  return out;
}

std::size_t instance_budget(const BudgetPlan& plan) {
  switch (plan.method) {
    case Method::ddif:
      return param_count(plan.field);
    case Method::fred:
      return plan.coefficients * plan.channels;
    case Method::idc:
      return plan.channels * product(idc_stored_dims(plan.dims, plan.factor));
    case Method::vanilla:
      return plan.channels * product(plan.dims);
  }
  return 0;
}

BudgetPlan plan_instance(Method method, std::size_t budget, std::size_t channels, const Dims& dims,
                         const PlanOptions& opt) {
  if (channels == 0 || dims.empty()) throw InvalidArgument("plan needs channels and dims");
  BudgetPlan plan;
  plan.method = method;
  plan.channels = channels;
  plan.dims = dims;
  const std::size_t full = channels * product(dims);
  const std::string why = "budget " + std::to_string(budget) + " too small for " + std::string(method_name(method));
  switch (method) {
    case Method::ddif: {
      std::size_t best = 0;
      for (std::size_t layers = 1; layers <= opt.max_hidden_layers; ++layers)
        for (std::size_t d = 1;; ++d) {
          const auto cfg = FieldConfig::uniform(dims.size(), channels, layers, d, opt.omega0);
          const std::size_t b = param_count(cfg);
          if (b > budget) break;
          if (b > best) {
            best = b;
            plan.field = cfg;
          }
        }
      if (best == 0) throw BudgetTooSmall(why);
      break;
    }
    case Method::fred:
      plan.coefficients = std::min(budget / channels, product(dims));
      if (plan.coefficients == 0) throw BudgetTooSmall(why);
      break;
    case Method::idc: {
      std::size_t f = 2;
      const std::size_t largest = *std::max_element(dims.begin(), dims.end());
      while (channels * product(idc_stored_dims(dims, f)) > budget) {
        if (f >= largest) throw BudgetTooSmall(why);
        ++f;
      }
      plan.factor = f;
      break;
    }
    case Method::vanilla:
      if (budget < full) throw BudgetTooSmall(why);
      break;
  }
  plan.utilized = instance_budget(plan);
  return plan;
}

Reconstruction reconstruct_at_budget(const GridTensor& real, std::size_t budget, Method method,
                                     const ReconstructOptions& opt) {
  BudgetPlan plan = plan_instance(method, budget, real.channels(), real.shape(), opt.plan);
  switch (method) {
    case Method::ddif: {
      auto fit = fit_field(real, plan.field, opt.seed, opt.fit);
      return {decode(fit.field, real.shape()), plan};
    }
    case Method::fred: {
      FredMask own;
      const FredMask* mask = opt.mask;
      if (mask) {
        if (mask->popcount() > plan.coefficients)
          throw BudgetTooSmall("global mask holds " + std::to_string(mask->popcount()) + " coefficients, budget allows " +
                               std::to_string(plan.coefficients));
        plan.coefficients = mask->popcount();
        plan.utilized = instance_budget(plan);
      } else {
        own = fred_select_mask(std::span<const GridTensor>(&real, 1), plan.coefficients);
        mask = &own;
      }
      return {fred_decode(fred_encode(real, *mask), *mask), plan};
    }
    case Method::idc: {
      const GridTensor low = resample(real, idc_stored_dims(real.shape(), plan.factor), Interpolation::bilinear);
      return {resample(low, real.shape(), opt.idc_method), plan};
    }
    case Method::vanilla:
      return {real, plan};
  }
  throw InvalidArgument("unknown method");
}

}  // namespace nfd
