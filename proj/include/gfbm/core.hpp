#pragma once

#include <string_view>

namespace gfbm {

/// Validated GFBM parameters together with the derived indices.
///
/// Only derive_indices() constructs one, so holding a GfbmParams means the
/// pair (alpha, gamma) lies in the small-ball regime
///   0 < gamma < 1/2,  -1/2 + gamma < alpha < 1/2,
/// or gamma == 0 with fbm_limit() set (fractional / standard Brownian motion).
class GfbmParams {
public:
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  /// Self-similarity index H = alpha - gamma + 1/2.
  double h() const noexcept { return h_; }
  /// beta = alpha + 1/2, the small-ball exponent scale.
  double beta() const noexcept { return beta_; }
  double tau() const noexcept { return tau_; }
  /// Decay rate of the Lamperti autocovariance.
  double kappa5() const noexcept { return kappa5_; }
  bool fbm_limit() const noexcept { return fbm_limit_; }

  bool is_brownian() const noexcept { return alpha_ == 0.0 && gamma_ == 0.0; }

  friend bool operator==(const GfbmParams&, const GfbmParams&) = default;

private:
  friend GfbmParams derive_indices(double alpha, double gamma, bool fbm_limit);
  GfbmParams() = default;

  double alpha_ = 0.0;
  double gamma_ = 0.0;
  double h_ = 0.5;
  double beta_ = 0.5;
  double tau_ = 0.125;
  double kappa5_ = 0.5;
  bool fbm_limit_ = false;
};

/// Throws RangeError("gamma") or RangeError("alpha") for inputs outside the
/// admitted rectangle. gamma == 0 is accepted only when fbm_limit is set.
GfbmParams derive_indices(double alpha, double gamma, bool fbm_limit = false);

enum class ProcessTag { X, Y, Z };

std::string_view to_string(ProcessTag tag) noexcept;
ProcessTag process_tag_from_string(std::string_view name);

/// (s + x)^alpha - x^alpha for x > 0, s >= 0, without cancellation for x >> s.
double power_difference(double alpha, double s, double x) noexcept;

/// The GFBM integrand G(s, x) = ((s - x)_+^alpha - (-x)_+^alpha) |x|^{-gamma}.
/// Throws SingularPoint at x == 0 whenever the value is unbounded there.
double kernel_eval(const GfbmParams& p, double s, double x);

} // namespace gfbm
