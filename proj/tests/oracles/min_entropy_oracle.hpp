#pragma once

// Test-only reference for the central-bin probability of a zero-mean
// Gaussian, by adaptive Gauss-Kronrod quadrature of the density. Shares no
// code with the erf-based implementation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qrng::oracle {

/// P(|V| ≤ δ/2) for V ~ N(0, var), integrating the standard normal density.
inline double central_bin_probability(double var, double step) {
  const double half_width = step / (2.0 * std::sqrt(var));  // in units of σ
  const double upper = std::min(half_width, 40.0);
  auto density = [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); };
  double err = 0.0;
  const double half = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      density, 0.0, upper, 15, 1e-15, &err);
  return std::min(2.0 * half, 1.0);
}

inline double min_entropy_bits(double var, double step) {
  return -std::log2(central_bin_probability(var, step));
}

/// P(code == k) for a mid-tread quantizer with `bits` bits; edge bins absorb
/// the clamped tails.
inline double bin_probability(std::int64_t k, double var, double step, int bits) {
  const double sigma = std::sqrt(var);
  const std::int64_t lo = -(std::int64_t{1} << (bits - 1));
  const std::int64_t hi = (std::int64_t{1} << (bits - 1)) - 1;
  auto cdf = [sigma](double v) { return 0.5 * std::erfc(-v / (sigma * std::numbers::sqrt2)); };
  const double a = k == lo ? -INFINITY : (static_cast<double>(k) - 0.5) * step;
  const double b = k == hi ? INFINITY : (static_cast<double>(k) + 0.5) * step;
  return (std::isinf(b) ? 1.0 : cdf(b)) - (std::isinf(a) ? 0.0 : cdf(a));
}

}  // namespace qrng::oracle
