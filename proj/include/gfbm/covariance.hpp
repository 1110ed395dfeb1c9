#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "gfbm/core.hpp"
#include "gfbm/quadrature.hpp"

namespace gfbm {

/// Thread-safe, caching evaluator of Cov(P(s), P(t)) for P in {X, Y, Z}.
///
///   Cov_Z(s,t) = int_0^{s^t} (s-u)^a (t-u)^a u^{-2g} du
///   Cov_Y(s,t) = int_0^inf ((s+x)^a - x^a)((t+x)^a - x^a) x^{-2g} dx
///   Cov_X      = Cov_Y + Cov_Z
///
/// Entries are cached on the exact bit patterns of (tag, min(s,t), max(s,t)).
/// Copies share the cache.
class CovarianceOracle {
public:
  explicit CovarianceOracle(GfbmParams params, double rel_tol = kDefaultRelTol);

  const GfbmParams& params() const noexcept { return params_; }
  double rel_tol() const noexcept { return rel_tol_; }

  double operator()(ProcessTag tag, double s, double t) const;

  std::size_t cache_size() const;

private:
  struct Cache;
  GfbmParams params_;
  double rel_tol_;
  std::shared_ptr<Cache> cache_;
};

double cov(const CovarianceOracle& oracle, ProcessTag tag, double s, double t);

/// Uncached quadrature for a single entry.
double cov_z_integral(const GfbmParams& p, double s, double t, double rel_tol = kDefaultRelTol);
double cov_y_integral(const GfbmParams& p, double s, double t, double rel_tol = kDefaultRelTol);

/// C(H) = int_R ((1-u)_+^{H-1/2} - (-u)_+^{H-1/2})^2 du, by quadrature, memoised.
double fbm_normalization(double h);

/// C(H) (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
double fbm_cov(double h, double s, double t);

/// E[(P(t) - P(s))^2]; throws DegenerateInterval when s == t.
double increment_variance(const CovarianceOracle& oracle, ProcessTag tag, double s, double t);

struct BandNorms {
  double inner = 0.0;  // ||X_1(s)||_2^2, kernel restricted to |x| <= v
  double outer = 0.0;  // ||X_2(s)||_2^2, kernel restricted to |x| >  v
};

BandNorms band_norms(const CovarianceOracle& oracle, double v, double s);

/// Deterministic log-spaced (s, t) pairs with t/s in [min_ratio, max_ratio].
struct PairSweep {
  double s_min = 1e-3;
  double s_max = 1.0;
  int s_points = 7;
  double min_ratio = 1.01;
  double max_ratio = 100.0;
  int ratio_points = 9;

  std::vector<std::pair<double, double>> pairs() const;
};

/// Ratios of a second-moment quantity to its lower / upper bound shapes over
/// a sweep; fitted_c_low = min(ratios_low), fitted_c_high = max(ratios_high).
struct BoundCheckReport {
  ProcessTag process = ProcessTag::X;
  std::vector<std::pair<double, double>> pairs;
  std::vector<double> ratios_low;
  std::vector<double> ratios_high;
  double fitted_c_low = 0.0;
  double fitted_c_high = 0.0;

  /// Every ratio finite and positive, and bracketed by the fitted constants.
  bool consistent() const;
};

/// Y: shapes |t-s|^2 / t^{2-2H} (low) and |t-s|^2 / s^{2-2H} (high).
/// Z and X: shapes |t-s|^{2 beta} / t^{2 gamma} and |t-s|^{2 beta} / s^{2 gamma}.
BoundCheckReport fit_increment_bounds(const CovarianceOracle& oracle, ProcessTag tag,
                                      const PairSweep& sweep = {});

/// ||X_2(s)||_2 / (s v^{beta-gamma-1}) over s <= v (ratios_high; low unused).
BoundCheckReport fit_band_outer_bound(const CovarianceOracle& oracle, std::span<const double> v_values,
                                      int s_points = 8);

/// sup_s ||X_1(s)||_2 / v^H over s in (0, u], u = ratio * v, for beta < 1/2.
BoundCheckReport fit_band_inner_bound(const CovarianceOracle& oracle, std::span<const double> v_values,
                                      double u_over_v = 16.0, int s_points = 12);

/// r(t) = e^{-Ht} Cov_X(e^t, 1).
double lamperti_autocov(const CovarianceOracle& oracle, double t);

struct LampertiFit {
  std::vector<double> t;
  std::vector<double> r;
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points_used = 0;
  bool non_positive = false;  // NonPositiveAutocov: fit restricted to the positive prefix
};

/// Least-squares slope of log r(t) against t.
LampertiFit fit_lamperti_decay(const CovarianceOracle& oracle, std::span<const double> t_grid);

} // namespace gfbm
