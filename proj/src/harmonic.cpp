#include "nfd/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "nfd/bessel.hpp"
#include "nfd/errors.hpp"

namespace nfd {

double HarmonicExpansion::alpha(std::size_t t) const {
  const auto& term = terms[t];
  double a = 0.0;
  for (std::size_t i = 0; i < term.amplitude.size(); ++i) a += term.amplitude[i] * std::cos(term.phase[i]);
  return a;
}

double HarmonicExpansion::beta(std::size_t t) const {
  const auto& term = terms[t];
  double b = 0.0;
  for (std::size_t i = 0; i < term.amplitude.size(); ++i) b -= term.amplitude[i] * std::sin(term.phase[i]);
  return b;
}

HarmonicExpansion expand(const NeuralField& f, std::size_t zeta) {
  const auto& cfg = f.config;
  cfg.validate();
  if (cfg.input_dim != 1 || cfg.output_dim != 1 || cfg.hidden_layers() != 2 || cfg.widths[0] != cfg.widths[1])
    throw InvalidArgument("expansion needs a 1-D scalar field with two equal-width hidden layers");
  if (f.layer_count() != 3) throw InvalidArgument("field layers do not match its config");
  const std::size_t d = cfg.widths[0];
  const double w0 = cfg.omega0;
  const int z = static_cast<int>(zeta);
  const std::size_t span = 2 * zeta + 1;

  // J_k(omega0 W1_ij) for k in [-zeta, zeta], indexed [(i * d + j) * span + k + zeta]
  std::vector<double> jt(d * d * span);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (int k = -z; k <= z; ++k)
        jt[(i * d + j) * span + static_cast<std::size_t>(k + z)] = bessel_j(k, w0 * f.weights[1][i * d + j]);

  HarmonicExpansion e;
  e.shift = f.biases[2][0];
  e.zeta = zeta;
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= span;
  e.terms.reserve(total);
  std::vector<int> k(d, -z);
  for (std::size_t t = 0; t < total; ++t) {
    HarmonicExpansion::Term term;
    term.k = k;
    double kb0 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      term.frequency += k[j] * w0 * f.weights[0][j];
      kb0 += k[j] * w0 * f.biases[0][j];
    }
    term.amplitude.resize(d);
    term.phase.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
      double a = f.weights[2][i];
      for (std::size_t j = 0; j < d; ++j) a *= jt[(i * d + j) * span + static_cast<std::size_t>(k[j] + z)];
      term.amplitude[i] = a;
      term.phase[i] = kb0 + w0 * f.biases[1][i] - std::numbers::pi / 2.0;
    }
    e.terms.push_back(std::move(term));
    for (std::size_t j = d; j-- > 0;) {
      if (++k[j] <= z) break;
      k[j] = -z;
    }
  }
  return e;
}

double eval_expansion(const HarmonicExpansion& e, double x) {
  double y = e.shift;
  for (const auto& t : e.terms)
    for (std::size_t i = 0; i < t.amplitude.size(); ++i) y += t.amplitude[i] * std::cos(t.frequency * x + t.phase[i]);
  return y;
}

std::vector<double> eval_expansion(const HarmonicExpansion& e, std::span<const double> xs) {
  std::vector<double> alpha(e.terms.size()), beta(e.terms.size());
  for (std::size_t t = 0; t < e.terms.size(); ++t) {
    alpha[t] = e.alpha(t);
    beta[t] = e.beta(t);
  }
  std::vector<double> out(xs.size(), e.shift);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < xs.size(); ++p) {
    double y = e.shift;
    for (std::size_t t = 0; t < e.terms.size(); ++t) {
      const double wx = e.terms[t].frequency * xs[p];
      y += alpha[t] * std::cos(wx) + beta[t] * std::sin(wx);
    }
    out[p] = y;
  }
  return out;
}

double fred_feasible_eval(std::span<const double> gamma, std::span<const std::size_t> u, std::size_t n, std::size_t x) {
  if (gamma.size() != u.size()) throw InvalidArgument("gamma and frequency set differ in length");
  if (x >= n) throw InvalidArgument("sample index " + std::to_string(x) + " outside [0, " + std::to_string(n) + ")");
  const double N = static_cast<double>(n);
  double y = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (u[j] >= n) throw InvalidArgument("frequency " + std::to_string(u[j]) + " outside [0, " + std::to_string(n) + ")");
    const double uu = static_cast<double>(u[j]);
    y += gamma[j] * std::cos(std::numbers::pi * uu * static_cast<double>(x) / N + std::numbers::pi * uu / (2.0 * N));
  }
  return y;
}

namespace {

void require_theorem_budget(std::size_t budget) {
  if (budget < 6)
    throw TheoremPreconditionViolated("threshold arithmetic needs B >= 6, got " + std::to_string(budget));
}

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > UINT64_MAX / base) throw InvalidArgument("harmonic count overflows 64 bits");
    r *= base;
  }
  return r;
}

}  // namespace

std::size_t max_width(std::size_t budget) {
  require_theorem_budget(budget);
  std::size_t r = static_cast<std::size_t>(std::sqrt(static_cast<double>(budget + 3)));
  while (r * r > budget + 3) --r;
  while ((r + 1) * (r + 1) <= budget + 3) ++r;
  return r - 2;
}

double zeta_threshold(std::size_t budget) {
  const std::size_t d = max_width(budget);
  const std::uint64_t target = 2 * budget + 1;
  double root = std::pow(static_cast<double>(target), 1.0 / static_cast<double>(d));
  // snap to an exact integer root so ceil() cannot land one above it
  const auto r = static_cast<std::uint64_t>(std::llround(root));
  if (checked_pow(r, d) == target) root = static_cast<double>(r);
  return 0.5 * (root - 1.0);
}

std::uint64_t harmonic_count(std::uint64_t zeta, std::size_t d) {
  if (d == 0) throw InvalidArgument("harmonic count needs width >= 1");
  return (checked_pow(2 * zeta + 1, d) - 1) / 2;
}

bool PointSet::contains(std::span<const double> p) const {
  for (std::size_t i = 0; i < size(); ++i)
    if (std::equal(p.begin(), p.end(), point(i).begin())) return true;
  return false;
}

bool PointSet::subset_of(const PointSet& other) const {
  if (dim != other.dim) return false;
  for (std::size_t i = 0; i < size(); ++i)
    if (!other.contains(point(i))) return false;
  return true;
}

PointSet lattice_space(std::size_t dim, std::span<const double> values) {
  if (dim == 0 || values.empty()) throw InvalidArgument("lattice space needs a dimension and values");
  PointSet s{dim, {}};
  std::vector<std::size_t> idx(dim, 0);
  for (;;) {
    for (auto i : idx) s.coords.push_back(values[i]);
    std::size_t j = dim;
    while (j > 0 && ++idx[j - 1] == values.size()) idx[--j] = 0;
    if (j == 0) break;
  }
  return s;
}

PointSet mask_last_axis(const PointSet& s) {
  PointSet out{s.dim, {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    if (p.back() == 0.0) out.coords.insert(out.coords.end(), p.begin(), p.end());
  }
  return out;
}

PointSet clip_space(const PointSet& s, double bound) {
  PointSet out{s.dim, {}};
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto p = s.point(i);
    if (std::all_of(p.begin(), p.end(), [&](double v) { return std::abs(v) <= bound; }))
      out.coords.insert(out.coords.end(), p.begin(), p.end());
  }
  return out;
}

SetLoss squared_distance_loss(std::vector<double> target) {
  return [target = std::move(target)](std::span<const double> x) {
    if (x.size() != target.size()) throw InvalidArgument("synthetic set and target differ in size");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - target[i]) * (x[i] - target[i]);
    return s;
  };
}

namespace {

double exhaustive_min(const PointSet& s, std::size_t count, const SetLoss& loss) {
  const std::size_t n = s.size();
  std::vector<std::size_t> idx(count, 0);
  std::vector<double> x(count * s.dim);
  double best = INFINITY;
  for (;;) {
    for (std::size_t m = 0; m < count; ++m) std::copy_n(s.point(idx[m]).begin(), s.dim, x.begin() + m * s.dim);
    best = std::min(best, loss(x));
    std::size_t j = count;
    while (j > 0 && ++idx[j - 1] == n) idx[--j] = 0;
    if (j == 0) break;
  }
  return best;
}

void check_space(const PointSet& s, std::size_t count) {
  if (s.size() == 0) throw InvalidArgument("candidate space is empty");
  double total = 1.0;
  for (std::size_t m = 0; m < count; ++m) total *= static_cast<double>(s.size());
  if (total > 1e6)
    throw SearchSpaceOverflow("exhaustive search over " + std::to_string(s.size()) + "^" + std::to_string(count) +
                              " tuples exceeds 1e6");
}

}  // namespace

Prop1Result prop1_oracle(const PointSet& s1, const PointSet& s2, std::size_t count, const SetLoss& loss) {
  if (count == 0) throw InvalidArgument("synthetic set size must be positive");
  if (s1.dim != s2.dim) throw InvalidArgument("candidate spaces differ in dimension");
  check_space(s1, count);
  check_space(s2, count);
  Prop1Result r;
  r.min_subset = exhaustive_min(s1, count, loss);
  r.min_superset = exhaustive_min(s2, count, loss);
  r.nested = s1.subset_of(s2);
  return r;
}

}  // namespace nfd
