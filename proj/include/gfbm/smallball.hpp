#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfbm/simulate.hpp"

namespace gfbm {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct WilsonInterval {
  double low = 0.0;
  double high = 1.0;
};

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z = kWilsonZ95);

/// Grid recipe applied on [0, horizon].
struct GridSpec {
  GridKind kind = GridKind::Uniform;
  int n = 1025;
  double ratio = 0.0;  // geometric only; 0 selects default_geometric_ratio

  Grid build(double horizon, const GfbmParams& p) const;
  /// Nested refinement: uniform n -> 2n, geometric n -> 2n - 1 with sqrt(ratio).
  GridSpec doubled(const GfbmParams& p) const;
};

struct SmallBallEstimate {
  double theta = 0.0;
  double horizon = 1.0;
  std::size_t n_paths = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::size_t grid_n = 0;
  GridKind grid_kind = GridKind::Uniform;
  std::string grid_descriptor;
  std::uint64_t seed = 0;

  bool no_hits() const noexcept { return hits == 0; }
  bool all_hits() const noexcept { return hits == n_paths; }
};

SmallBallEstimate make_estimate(double theta, double horizon, std::size_t n_paths, std::size_t hits,
                                const Grid& grid, std::uint64_t seed);

/// P(M(horizon) <= theta * horizon^H), which equals phi(theta) by self-similarity.
SmallBallEstimate estimate_phi(const CovarianceOracle& oracle, double theta, double horizon,
                               const GridSpec& grid, std::size_t n_paths, std::uint64_t seed,
                               int workers = 0);

/// Several thresholds from one ensemble (the estimates share their paths).
std::vector<SmallBallEstimate> estimate_phi_curve(const CovarianceOracle& oracle,
                                                  const std::vector<double>& thetas, double horizon,
                                                  const GridSpec& grid, std::size_t n_paths,
                                                  std::uint64_t seed, int workers = 0);

/// Doubles the grid until p_hat moves by less than half the CI width, at
/// most three times and never past kMaxGridSize. Returns every estimate
/// made; the last is the accepted one.
std::vector<SmallBallEstimate> estimate_phi_refined(const CovarianceOracle& oracle, double theta,
                                                    double horizon, GridSpec grid, std::size_t n_paths,
                                                    std::uint64_t seed, int workers = 0);

struct ExponentFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  /// log kappa estimate: log(-log phi) = intercept + slope * log(1/theta).
  double intercept = 0.0;
  std::size_t points_used = 0;
};

/// Weighted least squares of log(-log p_hat) on log(1/theta), weights
/// n p (log p)^2 / (1 - p). Only p_hat in [10/n, 1 - 10/n] enters.
/// Throws InsufficientSpread unless at least four distinct thetas remain and
/// -log p_hat spans a factor of at least four across them.
ExponentFit fit_small_ball_exponent(const std::vector<SmallBallEstimate>& estimates);

/// phi(theta) = exp(-kappa theta^{-1/beta}).
struct SmallBallModel {
  double kappa = 1.0;
  double beta = 0.5;

  SmallBallModel(double kappa, double beta);

  double phi(double theta) const;
  double log_phi(double theta) const { return -psi(theta); }
  double psi(double theta) const;
  double psi_prime(double theta) const;
  /// max(kappa / beta, beta / kappa).
  double k2() const;
  /// (beta / K2)^beta.
  double monotone_threshold() const;
};

struct PsiToolkitReport {
  bool model_mode = true;
  bool convex = true;
  std::size_t convexity_violations = 0;
  bool derivative_bounds = true;   // two-sided psi' bound with K2 (model mode)
  double k2 = 0.0;
  double fitted_k3 = 0.0;          // max of |log ratio| / (|eps - theta| theta^{-1-1/beta})
  double k3_model_bound = 0.0;     // kappa / beta
  double k3_shape_bound = 0.0;     // 3 kappa 2^{1/beta}
  bool ratio_bounds = true;
  double monotone_threshold = 0.0; // analytic (model) or detected (empirical)
  bool monotone_below_threshold = true;
  std::size_t monotonicity_violations = 0;

  bool passed() const { return convex && derivative_bounds && ratio_bounds && monotone_below_threshold; }
};

PsiToolkitReport psi_toolkit_check(const SmallBallModel& model, int grid_points = 200);

/// Empirical mode on estimates sorted by theta with successive ratios <= 2;
/// beta is the index used in theta^{-1/beta} phi(theta). Violations are
/// counted only when they persist at the CI extremes.
PsiToolkitReport psi_toolkit_check(std::vector<SmallBallEstimate> estimates, double beta);

struct JointProbe {
  double p_joint = 0.0;
  double phi_hat = 0.0;  // P(M(t) <= theta t^H) from the same paths
  double covariate = 0.0; // (u - t) / (u^{gamma/beta} eta^{1/beta})
  std::size_t hits = 0;
  std::size_t n_paths = 0;
  bool no_hits = false;
};

/// P(M(t) <= theta t^H, M(u) <= eta) by Monte Carlo on a grid with spacing
/// t / points_to_t running to u.
JointProbe joint_smallball_probe(const CovarianceOracle& oracle, double t, double u, double theta,
                                 double eta, std::size_t n_paths, std::uint64_t seed,
                                 int points_to_t = 256, int workers = 0);

} // namespace gfbm
