#pragma once

#include <cmath>
#include <stdexcept>

namespace aep {

/// exp(-x) * I0(x) for x >= 0. Power series below x = 20, asymptotic
/// expansion above (its terms keep shrinking well past double precision there).
inline double bessel_i0_scaled(double x) {
  if (x < 0.0) x = -x;
  if (!std::isfinite(x)) throw std::domain_error("bessel_i0_scaled: non-finite argument");
  if (x < 20.0) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    return sum * std::exp(-x);
  }
  // e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) / (k * 8.0 * x);
    if (next > term) break;
    term = next;
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum / std::sqrt(2.0 * 3.141592653589793238462643383279502884 * x);
}

inline double bessel_i0(double x) { return bessel_i0_scaled(x) * std::exp(std::abs(x)); }

}  // namespace aep
