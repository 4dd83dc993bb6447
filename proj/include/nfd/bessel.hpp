#pragma once

namespace nfd {

/// Bessel function of the first kind J_p(x) for integer order p and
/// |x| <= 50. Power series for |x| <= 12, Miller downward recurrence above.
/// Negative orders use J_{-p} = (-1)^p J_p. Throws UnsupportedRange beyond 50.
double bessel_j(int p, double x);

namespace detail {
double bessel_series(int p, double x);
double bessel_miller(int p, double x);
}  // namespace detail

}  // namespace nfd
