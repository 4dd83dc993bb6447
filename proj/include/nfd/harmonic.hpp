#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "nfd/field.hpp"

namespace nfd {

/// Sum-of-cosines form of a 1-D sine network with two hidden layers of equal
/// width d and unit-scale sine layers (omega0 folded into the first two weight
/// matrices and biases):
///   F(x) = b2 + sum_k sum_i A[k,i] cos(omega_k x + phase[k,i])
/// over integer vectors k with max |k_j| <= zeta.
struct HarmonicExpansion {
  struct Term {
    std::vector<int> k;
    double frequency = 0.0;          // <k, W0>
    std::vector<double> amplitude;   // W2_i * prod_j J_{k_j}(W1_ij)
    std::vector<double> phase;       // <k, b0> + b1_i - pi/2
  };
  double shift = 0.0;  // b2
  std::size_t zeta = 0;
  std::vector<Term> terms;

  /// Collapses each term to alpha cos(omega x) + beta sin(omega x).
  double alpha(std::size_t t) const;
  double beta(std::size_t t) const;
};

/// Requires n = 1, m = 1 and two hidden layers of equal width.
HarmonicExpansion expand(const NeuralField& f, std::size_t zeta);
double eval_expansion(const HarmonicExpansion& e, double x);
/// Evaluates at every x using the alpha/beta form.
std::vector<double> eval_expansion(const HarmonicExpansion& e, std::span<const double> xs);

/// sum_{u in U} gamma_u cos(pi u x / N + pi u / 2N) at integer x in [0, N).
/// `gamma` is aligned with `u`. For orthonormal DCT coefficients c_u,
/// gamma_u = c_u sqrt(1/N) for u = 0 and c_u sqrt(2/N) otherwise.
double fred_feasible_eval(std::span<const double> gamma, std::span<const std::size_t> u, std::size_t n, std::size_t x);

/// floor(sqrt(3 + B) - 2): the widest two-hidden-layer 1-D field within B.
std::size_t max_width(std::size_t budget);
/// 1/2 ((2B + 1)^(1 / max_width(B)) - 1); exact when 2B + 1 is a perfect power.
double zeta_threshold(std::size_t budget);
/// ((2 zeta + 1)^d - 1) / 2: distinct nonzero frequencies up to sign.
std::uint64_t harmonic_count(std::uint64_t zeta, std::size_t d);

/// Finite candidate set of points in R^dim, stored row after row.
struct PointSet {
  std::size_t dim = 0;
  std::vector<double> coords;
  std::size_t size() const { return dim == 0 ? 0 : coords.size() / dim; }
  std::span<const double> point(std::size_t i) const {
    return std::span<const double>(coords).subspan(i * dim, dim);
  }
  bool contains(std::span<const double> p) const;
  /// Every point of this set is in `other`.
  bool subset_of(const PointSet& other) const;
};

/// All points of values^dim, lexicographic.
PointSet lattice_space(std::size_t dim, std::span<const double> values);
/// Points whose last coordinate is zero (dimension masking).
PointSet mask_last_axis(const PointSet& s);
/// Points with every |coordinate| <= bound (value clipping).
PointSet clip_space(const PointSet& s, double bound);

/// Loss over a synthetic set of M points, flattened point after point.
using SetLoss = std::function<double(std::span<const double>)>;
/// ||X - target||^2 with `target` flattened like X.
SetLoss squared_distance_loss(std::vector<double> target);

struct Prop1Result {
  double min_subset = 0.0;
  double min_superset = 0.0;
  bool nested = false;
};

/// Exhaustive minimum of `loss` over S1^M and S2^M. Throws
/// SearchSpaceOverflow when |S|^M exceeds 1e6 and InvalidArgument on
/// dimension mismatch.
Prop1Result prop1_oracle(const PointSet& s1, const PointSet& s2, std::size_t count, const SetLoss& loss);

}  // namespace nfd
