#include "gfbm/covariance.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "gfbm/errors.hpp"

namespace gfbm {

namespace {

constexpr int kMaxLevel = 12;
// Consecutive panel breakpoints on the smooth part of the Y integrand are at
// most this ratio apart.
constexpr double kGeometricPanelRatio = 8.0;

template <class F>
double panel(F&& f, double a, double b, double rel_tol) {
  if (!(b > a)) return 0.0;
  const auto r = detail::tanh_sinh_panel(f, a, b, rel_tol, kMaxLevel);
  if (!r.converged)
    throw NoConvergence("covariance panel [" + std::to_string(a) + ", " + std::to_string(b) +
                        "] did not converge (error " + std::to_string(r.error) + ")");
  return r.value;
}

template <class F>
double tail_panel(F&& f, double a, double rel_tol) {
  const auto r = detail::tanh_sinh_tail(f, a, a > 0.0 ? a : 1.0, rel_tol, kMaxLevel);
  if (!r.converged)
    throw NoConvergence("covariance tail from " + std::to_string(a) + " did not converge");
  return r.value;
}

inline double pow_or_one(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

/// int_lo^hi D(s,y) D(t,y) y^{-2 gamma} dy, D(s,y) = (s+y)^a - y^a; hi may be inf.
double y_integral(const GfbmParams& p, double s, double t, double lo, double hi, double rel_tol) {
  const double a = p.alpha();
  if (a == 0.0 || s == 0.0 || t == 0.0 || !(hi > lo)) return 0.0;
  const double g2 = 2.0 * p.gamma();
  auto f = [&](double y, auto...) {
    return power_difference(a, s, y) * power_difference(a, t, y) * pow_or_one(y, -g2);
  };

  std::vector<double> cuts{lo};
  for (double c : {std::min(s, t), std::max(s, t)})
    if (c > cuts.back() && c < hi) cuts.push_back(c);
  const bool infinite = std::isinf(hi);
  if (!infinite) cuts.push_back(hi);

  std::vector<double> refined{cuts.front()};
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double left = refined.back();
    if (left > 0.0)
      for (double c = left * kGeometricPanelRatio; c < cuts[i] / 1.5; c *= kGeometricPanelRatio)
        refined.push_back(c);
    refined.push_back(cuts[i]);
  }

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < refined.size(); ++i)
    total += panel(f, refined[i], refined[i + 1], rel_tol);
  if (infinite) total += tail_panel(f, refined.back(), rel_tol);
  return total;
}

/// int_lo^hi (s-x)^{2a} x^{-2g} dx for 0 <= lo < hi <= s, evaluated in the
/// variable x on [0, s/2] and in w = s - x on [s/2, s].
double z_diagonal_integral(const GfbmParams& p, double s, double lo, double hi, double rel_tol) {
  if (!(hi > lo) || s == 0.0) return 0.0;
  const double a2 = 2.0 * p.alpha();
  const double g2 = 2.0 * p.gamma();
  const double mid = 0.5 * s;
  double total = 0.0;
  if (lo < mid) {
    auto f = [&](double x, auto...) { return pow_or_one(s - x, a2) * pow_or_one(x, -g2); };
    total += panel(f, lo, std::min(hi, mid), rel_tol);
  }
  if (hi > mid) {
    auto f = [&](double w, auto...) { return pow_or_one(w, a2) * pow_or_one(s - w, -g2); };
    total += panel(f, s - hi, s - std::max(lo, mid), rel_tol);
  }
  return total;
}

} // namespace

double cov_z_integral(const GfbmParams& p, double s, double t, double rel_tol) {
  if (s < 0.0 || t < 0.0) throw InvalidArgument("covariance requires s, t >= 0");
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  if (s == t) return z_diagonal_integral(p, s, 0.0, s, rel_tol);

  const double a = p.alpha();
  const double g2 = 2.0 * p.gamma();
  const double delta = t - s;
  const double mid = 0.5 * s;

  auto near_origin = [&](double u, auto...) {
    return pow_or_one(s - u, a) * pow_or_one(t - u, a) * pow_or_one(u, -g2);
  };
  // w = s - u, so (s - u)^a = w^a stays accurate as u -> s.
  auto near_s = [&](double w, auto...) {
    return pow_or_one(w, a) * pow_or_one(delta + w, a) * pow_or_one(s - w, -g2);
  };

  double total = panel(near_origin, 0.0, mid, rel_tol);
  if (delta < mid) {
    total += panel(near_s, 0.0, delta, rel_tol);
    total += panel(near_s, delta, mid, rel_tol);
  } else {
    total += panel(near_s, 0.0, mid, rel_tol);
  }
  return total;
}

double cov_y_integral(const GfbmParams& p, double s, double t, double rel_tol) {
  if (s < 0.0 || t < 0.0) throw InvalidArgument("covariance requires s, t >= 0");
  return y_integral(p, s, t, 0.0, kInfinity, rel_tol);
}

struct CovarianceOracle::Cache {
  struct Key {
    std::uint64_t lo;
    std::uint64_t hi;
    int tag;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = k.lo * 0x9E3779B97F4A7C15ULL;
      h ^= k.hi + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
      h ^= static_cast<std::uint64_t>(k.tag) * 0xBF58476D1CE4E5B9ULL;
      return static_cast<std::size_t>(h ^ (h >> 31));
    }
  };
  mutable std::shared_mutex mutex;
  std::unordered_map<Key, double, KeyHash> values;
};

CovarianceOracle::CovarianceOracle(GfbmParams params, double rel_tol)
    : params_(params), rel_tol_(rel_tol), cache_(std::make_shared<Cache>()) {
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2))
    throw InvalidArgument("rel_tol must lie in (1e-14, 1e-2)");
}

std::size_t CovarianceOracle::cache_size() const {
  std::shared_lock lock(cache_->mutex);
  return cache_->values.size();
}

double CovarianceOracle::operator()(ProcessTag tag, double s, double t) const {
  if (!(s >= 0.0 && t >= 0.0) || !std::isfinite(s) || !std::isfinite(t))
    throw InvalidArgument("covariance requires finite s, t >= 0");
  if (s > t) std::swap(s, t);
  if (s == 0.0) return 0.0;
  if (tag == ProcessTag::X) return (*this)(ProcessTag::Y, s, t) + (*this)(ProcessTag::Z, s, t);

  const Cache::Key key{std::bit_cast<std::uint64_t>(s), std::bit_cast<std::uint64_t>(t),
                       static_cast<int>(tag)};
  {
    std::shared_lock lock(cache_->mutex);
    if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
  }
  const double value = tag == ProcessTag::Z ? cov_z_integral(params_, s, t, rel_tol_)
                                            : cov_y_integral(params_, s, t, rel_tol_);
  std::unique_lock lock(cache_->mutex);
  return cache_->values.try_emplace(key, value).first->second;
}

double cov(const CovarianceOracle& oracle, ProcessTag tag, double s, double t) {
  return oracle(tag, s, t);
}

double fbm_normalization(double h) {
  if (!(h > 0.0 && h < 1.0)) throw RangeError("h", "fbm_cov requires 0 < H < 1");
  static std::mutex mutex;
  static std::map<double, double> memo;
  {
    std::lock_guard lock(mutex);
    if (auto it = memo.find(h); it != memo.end()) return it->second;
  }
  const double e = h - 0.5;
  // u in (0, 1): (1 - u)^{2H-1}, written in v = 1 - u.
  SingularIntegrand forward;
  forward.offset_evaluator = [e](double, double v, double) { return std::pow(v, 2.0 * e); };
  forward.left_exponent = 2.0 * e;
  // u < 0: ((1 + x)^e - x^e)^2 with x = -u.
  SingularIntegrand history;
  history.offset_evaluator = [e](double x, double, double) {
    const double d = power_difference(e, 1.0, x);
    return d * d;
  };
  history.left_exponent = std::min(0.0, 2.0 * e);
  history.tail_exponent = 2.0 * e - 2.0;
  history.singular_points = {1.0};
  const double value = integrate_singular(forward, 0.0, 1.0, 1e-12).value +
                       integrate_singular(history, 0.0, kInfinity, 1e-12).value;
  std::lock_guard lock(mutex);
  memo.emplace(h, value);
  return value;
}

double fbm_cov(double h, double s, double t) {
  if (!(h > 0.0 && h < 1.0)) throw RangeError("h", "fbm_cov requires 0 < H < 1");
  if (s < 0.0 || t < 0.0) throw InvalidArgument("fbm_cov requires s, t >= 0");
  if (s == 0.0 || t == 0.0) return 0.0;
  const double two_h = 2.0 * h;
  return 0.5 * fbm_normalization(h) *
         (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

double increment_variance(const CovarianceOracle& oracle, ProcessTag tag, double s, double t) {
  if (s == t) throw DegenerateInterval("increment variance over an empty interval is 0");
  if (s > t) std::swap(s, t);
  if (s < 0.0) throw InvalidArgument("increment_variance requires 0 <= s < t");
  return oracle(tag, t, t) - 2.0 * oracle(tag, s, t) + oracle(tag, s, s);
}

BandNorms band_norms(const CovarianceOracle& oracle, double v, double s) {
  if (!(v > 0.0)) throw InvalidArgument("band_norms requires v > 0");
  if (s < 0.0) throw InvalidArgument("band_norms requires s >= 0");
  if (s == 0.0) return {};
  const GfbmParams& p = oracle.params();
  const double tol = oracle.rel_tol();
  const double m = std::min(v, s);
  BandNorms out;
  out.inner = y_integral(p, s, s, 0.0, v, tol) + z_diagonal_integral(p, s, 0.0, m, tol);
  out.outer = y_integral(p, s, s, v, kInfinity, tol) + z_diagonal_integral(p, s, m, s, tol);
  return out;
}

std::vector<std::pair<double, double>> PairSweep::pairs() const {
  if (s_points < 1 || ratio_points < 1 || !(s_min > 0.0) || s_max < s_min ||
      !(min_ratio > 1.0) || max_ratio < min_ratio)
    throw InvalidArgument("malformed pair sweep");
  auto logspace = [](double lo, double hi, int n, int i) {
    if (n == 1) return lo;
    return lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  };
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < s_points; ++i) {
    const double s = logspace(s_min, s_max, s_points, i);
    for (int j = 0; j < ratio_points; ++j) out.emplace_back(s, s * logspace(min_ratio, max_ratio, ratio_points, j));
  }
  return out;
}

bool BoundCheckReport::consistent() const {
  if (ratios_low.empty() || ratios_low.size() != ratios_high.size()) return false;
  for (std::size_t i = 0; i < ratios_low.size(); ++i) {
    const double lo = ratios_low[i];
    const double hi = ratios_high[i];
    if (!(std::isfinite(lo) && lo > 0.0 && std::isfinite(hi) && hi > 0.0)) return false;
    if (lo < fitted_c_low || hi > fitted_c_high) return false;
  }
  return fitted_c_low > 0.0 && std::isfinite(fitted_c_high);
}

namespace {

void finish(BoundCheckReport& r) {
  r.fitted_c_low = *std::min_element(r.ratios_low.begin(), r.ratios_low.end());
  r.fitted_c_high = *std::max_element(r.ratios_high.begin(), r.ratios_high.end());
}

} // namespace

BoundCheckReport fit_increment_bounds(const CovarianceOracle& oracle, ProcessTag tag,
                                      const PairSweep& sweep) {
  const GfbmParams& p = oracle.params();
  BoundCheckReport r;
  r.process = tag;
  r.pairs = sweep.pairs();
  for (const auto& [s, t] : r.pairs) {
    const double value = increment_variance(oracle, tag, s, t);
    const double d = t - s;
    double low_shape;
    double high_shape;
    if (tag == ProcessTag::Y) {
      low_shape = d * d / std::pow(t, 2.0 - 2.0 * p.h());
      high_shape = d * d / std::pow(s, 2.0 - 2.0 * p.h());
    } else {
      const double num = std::pow(d, 2.0 * p.beta());
      low_shape = num / std::pow(t, 2.0 * p.gamma());
      high_shape = num / std::pow(s, 2.0 * p.gamma());
    }
    r.ratios_low.push_back(value / low_shape);
    r.ratios_high.push_back(value / high_shape);
  }
  finish(r);
  return r;
}

BoundCheckReport fit_band_outer_bound(const CovarianceOracle& oracle, std::span<const double> v_values,
                                      int s_points) {
  const GfbmParams& p = oracle.params();
  BoundCheckReport r;
  for (double v : v_values) {
    for (int i = 0; i < s_points; ++i) {
      const double s = v * std::pow(1e-3, 1.0 - static_cast<double>(i) / std::max(1, s_points - 1));
      const double norm = std::sqrt(band_norms(oracle, v, s).outer);
      const double ratio = norm / (s * std::pow(v, p.beta() - p.gamma() - 1.0));
      r.pairs.emplace_back(s, v);
      r.ratios_low.push_back(ratio);
      r.ratios_high.push_back(ratio);
    }
  }
  finish(r);
  return r;
}

BoundCheckReport fit_band_inner_bound(const CovarianceOracle& oracle, std::span<const double> v_values,
                                      double u_over_v, int s_points) {
  const GfbmParams& p = oracle.params();
  BoundCheckReport r;
  for (double v : v_values) {
    const double u = u_over_v * v;
    const double shape = p.beta() < 0.5 ? std::pow(v, p.h())
                                        : std::pow(v, 0.5 - p.gamma()) * std::pow(u, p.beta() - 0.5);
    double sup = 0.0;
    for (int i = 0; i < s_points; ++i) {
      const double s = u * std::pow(1e-3, 1.0 - static_cast<double>(i) / std::max(1, s_points - 1));
      sup = std::max(sup, std::sqrt(band_norms(oracle, v, s).inner));
    }
    r.pairs.emplace_back(u, v);
    r.ratios_low.push_back(sup / shape);
    r.ratios_high.push_back(sup / shape);
  }
  finish(r);
  return r;
}

double lamperti_autocov(const CovarianceOracle& oracle, double t) {
  if (!(t >= 0.0)) throw InvalidArgument("lamperti_autocov requires t >= 0");
  return std::exp(-oracle.params().h() * t) * oracle(ProcessTag::X, std::exp(t), 1.0);
}

LampertiFit fit_lamperti_decay(const CovarianceOracle& oracle, std::span<const double> t_grid) {
  if (t_grid.size() < 6) throw InvalidArgument("Lamperti fit needs at least 6 grid points");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("Lamperti grid must be increasing");
  LampertiFit fit;
  for (double t : t_grid) {
    fit.t.push_back(t);
    fit.r.push_back(lamperti_autocov(oracle, t));
  }
  std::size_t n = 0;
  while (n < fit.r.size() && fit.r[n] > 0.0) ++n;
  fit.non_positive = n < fit.r.size();
  fit.points_used = n;
  if (n < 2) throw NumericalError("NonPositiveAutocov: fewer than two positive autocovariances");
  double mt = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += fit.t[i];
    my += std::log(fit.r[i]);
  }
  mt /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (fit.t[i] - mt) * (std::log(fit.r[i]) - my);
    sxx += (fit.t[i] - mt) * (fit.t[i] - mt);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mt;
  return fit;
}

} // namespace gfbm
