#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nfd {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a.
std::uint64_t hash_name(std::string_view name);

/// Named stream derivation: root ^ hash(name), so independent consumers of one
/// root seed never share draws.
std::uint64_t derive_seed(std::uint64_t root, std::string_view name);

/// Same as derive_seed, with an index mixed in (per-field, per-repeat streams).
std::uint64_t derive_seed(std::uint64_t root, std::string_view name, std::uint64_t index);

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [lo, hi) from the raw 53 high bits; portable across
/// standard libraries unlike std::uniform_real_distribution.
inline double uniform(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

/// Uniform integer in [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal via Box-Muller on `uniform`.
double normal(Rng& rng);

}  // namespace nfd
