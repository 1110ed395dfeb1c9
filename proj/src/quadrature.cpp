#include "gfbm/quadrature.hpp"

#include <algorithm>
#include <array>
#include <numbers>
#include <string>

#include "gfbm/errors.hpp"

namespace gfbm {
namespace detail {

namespace {

// Abscissae closer than this to an endpoint are dropped; the rule then still
// resolves endpoint behaviour down to |x - a| ~ 1e-280 (b - a).
constexpr double kMinComplement = 1e-280;
constexpr int kMaxTableLevel = 16;

std::vector<TanhSinhNode> build_level(int level) {
  std::vector<TanhSinhNode> nodes;
  const double h = std::ldexp(1.0, -level);
  auto node_at = [](double t) {
    const double e = std::exp(std::numbers::pi * std::sinh(t));
    const double c = 1.0 / (1.0 + e);
    const double w = std::numbers::pi * std::cosh(t) * c * (e * c);
    return TanhSinhNode{c, w};
  };
  if (level == 0) nodes.push_back({0.5, std::numbers::pi / 4.0});
  const long step = level == 0 ? 1 : 2;
  for (long j = 1;; j += step) {
    const double t = static_cast<double>(j) * h;
    const TanhSinhNode node = node_at(t);
    if (node.c < kMinComplement) break;
    nodes.push_back(node);
  }
  return nodes;
}

} // namespace

const std::vector<TanhSinhNode>& tanh_sinh_level(int level) {
  static const std::array<std::vector<TanhSinhNode>, kMaxTableLevel + 1> table = [] {
    std::array<std::vector<TanhSinhNode>, kMaxTableLevel + 1> t;
    for (int k = 0; k <= kMaxTableLevel; ++k) t[k] = build_level(k);
    return t;
  }();
  if (level < 0 || level > kMaxTableLevel)
    throw InvalidArgument("tanh-sinh level out of range: " + std::to_string(level));
  return table[level];
}

} // namespace detail

QuadResult integrate_singular(const SingularIntegrand& f, double a, double b, double rel_tol,
                              QuadOptions options) {
  if (!f.evaluator && !f.offset_evaluator) throw InvalidArgument("integrand has no evaluator");
  if (!(rel_tol > 1e-14 && rel_tol < 1e-2))
    throw InvalidArgument("rel_tol must lie in (1e-14, 1e-2)");
  if (!std::isfinite(a) || !(a < b)) throw InvalidArgument("integration requires finite a < b");
  if (options.max_level < 3 || options.max_level > 16)
    throw InvalidArgument("max_level must lie in [3, 16]");

  const bool infinite = std::isinf(b);
  if (f.left_exponent && *f.left_exponent <= -1.0)
    throw NonIntegrable("left endpoint exponent " + std::to_string(*f.left_exponent) + " <= -1");
  if (f.right_exponent && *f.right_exponent <= -1.0)
    throw NonIntegrable("right endpoint exponent " + std::to_string(*f.right_exponent) +
                        " <= -1");
  if (infinite && f.tail_exponent && *f.tail_exponent >= -1.0)
    throw NonIntegrable("tail exponent " + std::to_string(*f.tail_exponent) + " >= -1");

  std::vector<double> cuts;
  cuts.push_back(a);
  std::vector<double> interior = f.singular_points;
  std::sort(interior.begin(), interior.end());
  for (double p : interior) {
    if (p == a || p == b) continue;
    if (!(p > a && p < b))
      throw InvalidArgument("singular point " + std::to_string(p) + " lies outside (a, b)");
    if (p != cuts.back()) cuts.push_back(p);
  }

  const bool with_offsets = static_cast<bool>(f.offset_evaluator);
  auto finite_fn = [&](double x, double dl, double dr) {
    return with_offsets ? f.offset_evaluator(x, dl, dr) : f.evaluator(x);
  };
  auto tail_fn = [&](double x, double dl) {
    if (!with_offsets && dl == 0.0) return 0.0;
    return with_offsets ? f.offset_evaluator(x, dl, kInfinity) : f.evaluator(x);
  };

  QuadResult result;
  result.converged = true;
  double l1 = 0.0;
  auto absorb = [&](const detail::UnitRuleResult& r) {
    result.value += r.value;
    result.abs_error_estimate += r.error;
    result.evaluations += r.evaluations;
    result.max_level = std::max(result.max_level, r.level);
    result.converged = result.converged && r.converged;
    ++result.subdivisions;
    l1 += r.l1;
  };

  // With a plain evaluator, nodes whose abscissa rounds onto a panel end
  // would sample the singularity itself; they are dropped.
  auto panel = [&](double lo, double hi) {
    auto fn = [&](double x, double dl, double dr) {
      if (!with_offsets && (x <= lo || x >= hi)) return 0.0;
      return finite_fn(x, dl, dr);
    };
    return detail::tanh_sinh_panel(fn, lo, hi, rel_tol, options.max_level);
  };
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) absorb(panel(cuts[i], cuts[i + 1]));
  if (infinite) {
    const double start = cuts.back();
    const double scale = start != 0.0 ? std::abs(start) : 1.0;
    absorb(detail::tanh_sinh_tail(tail_fn, start, scale, rel_tol, options.max_level));
  } else {
    absorb(panel(cuts.back(), b));
  }

  if (result.converged && result.abs_error_estimate > rel_tol * l1) result.converged = false;
  if (!result.converged && options.throw_on_failure)
    throw NoConvergence("error estimate " + std::to_string(result.abs_error_estimate) +
                        " above tolerance after level " + std::to_string(result.max_level));
  return result;
}

} // namespace gfbm
