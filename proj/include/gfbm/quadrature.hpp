#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace gfbm {

/// An integrand with known blow-up locations and (optionally) known algebraic
/// orders: f(x) ~ |x - a|^left_exponent near a, |b - x|^right_exponent near b,
/// x^tail_exponent as x -> +inf.
struct SingularIntegrand {
  std::function<double(double)> evaluator;
  /// Optional form f(x, x - left, right - x) where [left, right] is the panel
  /// containing x (right = +inf on a tail panel). Both offsets keep full
  /// relative precision near the panel ends, which matters for strong
  /// endpoint singularities away from the origin. Used instead of
  /// `evaluator` when set.
  std::function<double(double, double, double)> offset_evaluator;
  std::vector<double> singular_points;
  std::optional<double> left_exponent;
  std::optional<double> right_exponent;
  std::optional<double> tail_exponent;
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int subdivisions = 0;  // number of panels
  int max_level = 0;     // deepest tanh-sinh level used by any panel
  long evaluations = 0;
  bool converged = false;
};

struct QuadOptions {
  int max_level = 12;
  /// Throw NoConvergence instead of returning converged == false.
  bool throw_on_failure = true;
};

inline constexpr double kDefaultRelTol = 1e-10;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Integrates f over [a, b] (b may be +infinity). The interval is split at the
/// declared singular points, each finite panel is mapped to [0, 1] and summed
/// with a tanh-sinh rule whose level doubles up to options.max_level; a
/// semi-infinite panel goes through x = a + L u / (1 - u) first.
QuadResult integrate_singular(const SingularIntegrand& f, double a, double b,
                              double rel_tol = kDefaultRelTol, QuadOptions options = {});

namespace detail {

/// Node of the tanh-sinh rule on [0, 1]: c is the distance of the abscissa
/// from the nearer endpoint, w is du/dt at that node.
struct TanhSinhNode {
  double c;
  double w;
};

/// Nodes with t > 0 that are new at `level` (step 2^-level). Level 0 also
/// carries the centre node t = 0 first.
const std::vector<TanhSinhNode>& tanh_sinh_level(int level);

struct UnitRuleResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
  int level = 0;
  long evaluations = 0;
  bool converged = false;
};

/// Integrates g over [0, 1]. g receives (u, 1 - u), each accurate to full
/// relative precision, so integrands singular at either end can be written
/// in terms of the distance to that end.
template <class G>
UnitRuleResult tanh_sinh_unit(G&& g, double rel_tol, int max_level) {
  UnitRuleResult r;
  double sum = 0.0;
  double l1 = 0.0;
  double previous = 0.0;
  for (int level = 0; level <= max_level; ++level) {
    const double h = std::ldexp(1.0, -level);
    double level_sum = 0.0;
    double level_abs = 0.0;
    const auto& nodes = tanh_sinh_level(level);
    std::size_t start = 0;
    if (level == 0) {
      const double v = g(0.5, 0.5) * nodes[0].w;
      level_sum += v;
      level_abs += std::abs(v);
      ++r.evaluations;
      start = 1;
    }
    for (std::size_t i = start; i < nodes.size(); ++i) {
      const double c = nodes[i].c;
      const double w = nodes[i].w;
      const double lo = g(c, 1.0 - c) * w;
      const double hi = g(1.0 - c, c) * w;
      level_sum += lo + hi;
      level_abs += std::abs(lo) + std::abs(hi);
    }
    r.evaluations += 2 * static_cast<long>(nodes.size() - start);
    if (level == 0) {
      sum = level_sum;
      l1 = level_abs;
    } else {
      sum = 0.5 * sum + h * level_sum;
      l1 = 0.5 * l1 + h * level_abs;
    }
    r.value = sum;
    r.l1 = l1;
    r.level = level;
    if (!std::isfinite(sum)) {
      r.error = std::numeric_limits<double>::infinity();
      r.converged = false;
      return r;
    }
    if (level > 0) {
      r.error = std::abs(sum - previous);
      if (level >= 3 && r.error <= rel_tol * l1) {
        r.converged = true;
        return r;
      }
    }
    previous = sum;
  }
  return r;
}

/// Finite panel [a, b]; f receives (x, x - a, b - x).
template <class F>
UnitRuleResult tanh_sinh_panel(F&& f, double a, double b, double rel_tol, int max_level) {
  const double width = b - a;
  auto g = [&](double u, double v) {
    if (u <= v) {
      const double d = width * u;
      return f(a + d, d, width * v) * width;
    }
    const double d = width * v;
    return f(b - d, width * u, d) * width;
  };
  return tanh_sinh_unit(g, rel_tol, max_level);
}

/// Semi-infinite panel [a, inf) through x = a + scale * u / (1 - u).
template <class F>
UnitRuleResult tanh_sinh_tail(F&& f, double a, double scale, double rel_tol, int max_level) {
  auto g = [&](double u, double v) {
    const double offset = scale * u / v;
    if (!std::isfinite(offset)) return 0.0;
    const double val = f(a + offset, offset);
    if (val == 0.0) return 0.0;
    // scale / v^2 == offset / (u v); this order avoids overflow deep in the tail.
    return val * offset / u / v;
  };
  return tanh_sinh_unit(g, rel_tol, max_level);
}

} // namespace detail
} // namespace gfbm
