#pragma once

// Reference values computed without touching the library's quadrature.

#include <cmath>
#include <numbers>

namespace oracle {

inline double beta_fn(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// P(sup_{s<=1} |W(s)| <= theta) for standard Brownian motion (reflection series).
inline double bm_small_ball(double theta) {
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double m = 2.0 * k + 1.0;
    const double term = std::exp(-pi * pi * m * m / (8.0 * theta * theta)) / m;
    sum += (k % 2 == 0 ? term : -term);
    if (term < 1e-300) break;
  }
  return 4.0 / pi * sum;
}

/// Wilson score interval, written out from the textbook formula.
inline void wilson(double hits, double n, double z, double& lo, double& hi) {
  const double p = hits / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  lo = centre - half;
  hi = centre + half;
}

} // namespace oracle

namespace oracle {

/// Mandelbrot-van Ness normalisation: Gamma(H+1/2)^2 / (Gamma(2H+1) sin(pi H)).
inline double fbm_c(double h) {
  return std::exp(2 * std::lgamma(h + 0.5) - std::lgamma(2 * h + 1)) / std::sin(std::numbers::pi * h);
}

} // namespace oracle
