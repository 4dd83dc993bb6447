#include "nfd/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nfd/errors.hpp"

namespace nfd {

namespace detail {

// Sum_m (-1)^m (x/2)^(2m+p) / (m! (m+p)!) for p >= 0, x >= 0.
double bessel_series(int p, double x) {
  if (x == 0.0) return p == 0 ? 1.0 : 0.0;
  const double h = 0.5 * x;
  double term = std::exp(p * std::log(h) - std::lgamma(p + 1.0));
  if (term == 0.0) return 0.0;
  double sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= -h * h / (static_cast<double>(m) * static_cast<double>(m + p));
    sum += term;
    if (m > h && std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Downward recurrence from an order well above max(p, x), normalized with
// J_0 + 2 sum_k J_2k = 1. The recurrence is stable downward for the minimal
// solution J, so accuracy is limited only by the start order.
double bessel_miller(int p, double x) {
  if (x == 0.0) return p == 0 ? 1.0 : 0.0;
  const double top = std::max(static_cast<double>(p), x);
  int start = static_cast<int>(top + 30.0 + std::sqrt(60.0 * top));
  start += start % 2;
  double next = 0.0, cur = 1e-300, norm = 0.0, result = 0.0;
  for (int n = start; n > 0; --n) {
    const double prev = 2.0 * n / x * cur - next;
    next = cur;
    cur = prev;  // now J_{n-1}, unnormalized
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      norm *= 1e-250;
      result *= 1e-250;
    }
    if (n - 1 == p) result = cur;
    if (n - 1 > 0 && (n - 1) % 2 == 0) norm += 2.0 * cur;
  }
  norm += cur;
  return result / norm;
}

}  // namespace detail

double bessel_j(int p, double x) {
  if (!(std::abs(x) <= 50.0)) throw UnsupportedRange("bessel_j argument " + std::to_string(x) + " outside |x| <= 50");
  double sign = 1.0;
  if (p < 0) {
    p = -p;
    if (p % 2) sign = -sign;
  }
  if (x < 0.0) {
    x = -x;
    if (p % 2) sign = -sign;
  }
  const double v = x <= 12.0 ? detail::bessel_series(p, x) : detail::bessel_miller(p, x);
  return sign * v;
}

}  // namespace nfd
