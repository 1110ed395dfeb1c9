#include "gfbm/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gfbm/errors.hpp"

namespace gfbm {

GfbmParams derive_indices(double alpha, double gamma, bool fbm_limit) {
  if (!std::isfinite(alpha)) throw RangeError("alpha", "must be finite");
  if (!std::isfinite(gamma)) throw RangeError("gamma", "must be finite");

  const bool gamma_ok = (gamma > 0.0 && gamma < 0.5) || (gamma == 0.0 && fbm_limit);
  if (!gamma_ok) {
    if (gamma == 0.0)
      throw RangeError("gamma", "gamma = 0 requires the fbm_limit flag");
    throw RangeError("gamma", "gamma must lie in (0, 1/2), got " + std::to_string(gamma));
  }
  if (alpha >= 0.5 && alpha < 0.5 + gamma)
    throw RangeError("alpha", "alpha in [1/2, 1/2 + gamma) is the differentiable regime, "
                              "which has no small-ball criteria; got " +
                                  std::to_string(alpha));
  if (!(alpha > gamma - 0.5 && alpha < 0.5))
    throw RangeError("alpha", "alpha must lie in (-1/2 + gamma, 1/2), got " +
                                  std::to_string(alpha));

  GfbmParams p;
  p.alpha_ = alpha;
  p.gamma_ = gamma;
  p.h_ = alpha - gamma + 0.5;
  p.beta_ = alpha + 0.5;
  p.tau_ = std::min({(1.0 - p.h_) / 4.0, p.h_ / 4.0, (0.5 - gamma) / 4.0});
  p.kappa5_ = std::min(0.5 - gamma, 0.5 + gamma - alpha);
  p.fbm_limit_ = fbm_limit;
  return p;
}

std::string_view to_string(ProcessTag tag) noexcept {
  switch (tag) {
    case ProcessTag::X: return "X";
    case ProcessTag::Y: return "Y";
    case ProcessTag::Z: return "Z";
  }
  return "?";
}

ProcessTag process_tag_from_string(std::string_view name) {
  if (name == "X" || name == "x") return ProcessTag::X;
  if (name == "Y" || name == "y") return ProcessTag::Y;
  if (name == "Z" || name == "z") return ProcessTag::Z;
  throw InvalidArgument("unknown process tag '" + std::string(name) + "' (expected X, Y or Z)");
}

double power_difference(double alpha, double s, double x) noexcept {
  if (alpha == 0.0 || s == 0.0) return 0.0;
  // s / x can overflow when x is tiny; there is no cancellation to avoid then.
  if (x < s * 1e-200) return std::pow(s + x, alpha) - std::pow(x, alpha);
  return std::pow(x, alpha) * std::expm1(alpha * std::log1p(s / x));
}

double kernel_eval(const GfbmParams& p, double s, double x) {
  const double a = p.alpha();
  const double g = p.gamma();
  if (s == 0.0) return 0.0;
  if (x > s) return 0.0;
  if (x == 0.0) {
    if (g > 0.0 || a < 0.0)
      throw SingularPoint("G(s, x) is unbounded at x = 0; integrate around it");
    return std::pow(s, a);
  }
  if (x == s) {
    if (a < 0.0) throw SingularPoint("G(s, x) is unbounded at x = s for alpha < 0");
    return 0.0;
  }
  if (x > 0.0) return std::pow(s - x, a) * std::pow(x, -g);
  const double y = -x;
  return power_difference(a, s, y) * std::pow(y, -g);
}

} // namespace gfbm
