#include "gfbm/smallball.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gfbm/errors.hpp"

namespace gfbm {

WilsonInterval wilson_interval(std::size_t hits, std::size_t n, double z) {
  if (n == 0) throw InvalidArgument("Wilson interval needs n > 0");
  if (hits > n) throw InvalidArgument("hits exceed trials");
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  WilsonInterval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // Rounding can push an endpoint past p_hat at the boundaries.
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  return ci;
}

Grid GridSpec::build(double horizon, const GfbmParams& p) const {
  return build_grid(kind, n, horizon, ratio, p);
}

GridSpec GridSpec::doubled(const GfbmParams& p) const {
  GridSpec next = *this;
  if (kind == GridKind::Geometric) {
    const double r = ratio == 0.0 ? default_geometric_ratio(p) : ratio;
    next.n = 2 * n - 1;
    next.ratio = std::sqrt(r);
  } else {
    next.n = 2 * n;
  }
  return next;
}

SmallBallEstimate make_estimate(double theta, double horizon, std::size_t n_paths, std::size_t hits,
                                const Grid& grid, std::uint64_t seed) {
  SmallBallEstimate e;
  e.theta = theta;
  e.horizon = horizon;
  e.n_paths = n_paths;
  e.hits = hits;
  e.p_hat = static_cast<double>(hits) / static_cast<double>(n_paths);
  const auto ci = wilson_interval(hits, n_paths);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  e.grid_n = grid.size();
  e.grid_kind = grid.kind;
  e.grid_descriptor = grid.descriptor();
  e.seed = seed;
  return e;
}

std::vector<SmallBallEstimate> estimate_phi_curve(const CovarianceOracle& oracle,
                                                  const std::vector<double>& thetas, double horizon,
                                                  const GridSpec& spec, std::size_t n_paths,
                                                  std::uint64_t seed, int workers) {
  if (n_paths < 100) throw InvalidArgument("estimate_phi needs at least 100 paths");
  if (!(horizon > 0.0)) throw InvalidArgument("horizon must be positive");
  for (double th : thetas)
    if (!(th > 0.0)) throw InvalidArgument("theta must be positive");
  const Grid grid = spec.build(horizon, oracle.params());
  const PathSampler sampler(oracle, grid, ProcessTag::X, workers);
  const Eigen::MatrixXd sup = sampler.running_sup_at(n_paths, seed, {grid.horizon()});
  const double scale = std::pow(horizon, oracle.params().h());

  std::vector<SmallBallEstimate> out;
  for (double th : thetas) {
    const double level = th * scale;
    const auto hits = static_cast<std::size_t>((sup.col(0).array() <= level).count());
    out.push_back(make_estimate(th, horizon, n_paths, hits, grid, seed));
  }
  return out;
}

SmallBallEstimate estimate_phi(const CovarianceOracle& oracle, double theta, double horizon,
                               const GridSpec& grid, std::size_t n_paths, std::uint64_t seed,
                               int workers) {
  return estimate_phi_curve(oracle, {theta}, horizon, grid, n_paths, seed, workers).front();
}

std::vector<SmallBallEstimate> estimate_phi_refined(const CovarianceOracle& oracle, double theta,
                                                    double horizon, GridSpec grid, std::size_t n_paths,
                                                    std::uint64_t seed, int workers) {
  std::vector<SmallBallEstimate> history{estimate_phi(oracle, theta, horizon, grid, n_paths, seed, workers)};
  for (int doubling = 0; doubling < 3; ++doubling) {
    const GridSpec next = grid.doubled(oracle.params());
    if (static_cast<std::size_t>(next.n) > kMaxGridSize) break;
    grid = next;
    history.push_back(estimate_phi(oracle, theta, horizon, grid, n_paths, seed, workers));
    const auto& prev = history[history.size() - 2];
    const auto& cur = history.back();
    if (std::abs(cur.p_hat - prev.p_hat) < 0.5 * (cur.ci_high - cur.ci_low)) break;
  }
  return history;
}

ExponentFit fit_small_ball_exponent(const std::vector<SmallBallEstimate>& estimates) {
  struct Point {
    double x, y, w, neg_log_p, theta;
  };
  std::vector<Point> pts;
  for (const auto& e : estimates) {
    const double n = static_cast<double>(e.n_paths);
    const double p = e.p_hat;
    if (!(p >= 10.0 / n && p <= 1.0 - 10.0 / n) || p <= 0.0 || p >= 1.0) continue;
    const double lp = std::log(p);
    pts.push_back({std::log(1.0 / e.theta), std::log(-lp), n * p * lp * lp / (1.0 - p), -lp, e.theta});
  }
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.theta < b.theta; });
  const auto distinct = std::unique(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
                          return a.theta == b.theta;
                        }) - pts.begin();
  if (distinct < 4) throw InsufficientSpread("need at least four usable estimates with distinct theta");
  double lo = pts.front().neg_log_p, hi = lo;
  for (const auto& q : pts) {
    lo = std::min(lo, q.neg_log_p);
    hi = std::max(hi, q.neg_log_p);
  }
  if (hi < 4.0 * lo) throw InsufficientSpread("-log p_hat spans less than a factor of 4");

  double sw = 0, sx = 0, sy = 0;
  for (const auto& q : pts) {
    sw += q.w;
    sx += q.w * q.x;
    sy += q.w * q.y;
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (const auto& q : pts) {
    sxx += q.w * (q.x - mx) * (q.x - mx);
    sxy += q.w * (q.x - mx) * (q.y - my);
  }
  ExponentFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.stderr_slope = std::sqrt(1.0 / sxx);
  fit.points_used = pts.size();
  return fit;
}

SmallBallModel::SmallBallModel(double kappa_, double beta_) : kappa(kappa_), beta(beta_) {
  if (!(kappa > 0.0)) throw InvalidArgument("model kappa must be positive");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("model beta must lie in (0, 1)");
}

double SmallBallModel::psi(double theta) const { return kappa * std::pow(theta, -1.0 / beta); }
double SmallBallModel::phi(double theta) const { return std::exp(-psi(theta)); }
double SmallBallModel::psi_prime(double theta) const {
  return -(kappa / beta) * std::pow(theta, -1.0 - 1.0 / beta);
}
double SmallBallModel::k2() const { return std::max(kappa / beta, beta / kappa); }
double SmallBallModel::monotone_threshold() const { return std::pow(beta / k2(), beta); }

PsiToolkitReport psi_toolkit_check(const SmallBallModel& m, int grid_points) {
  if (grid_points < 8) throw InvalidArgument("psi toolkit grid needs at least 8 points");
  PsiToolkitReport r;
  r.model_mode = true;
  r.k2 = m.k2();
  r.k3_model_bound = m.kappa / m.beta;
  r.k3_shape_bound = 3.0 * m.kappa * std::pow(2.0, 1.0 / m.beta);
  r.monotone_threshold = m.monotone_threshold();

  // Log grid on (0, 1): theta_i = 10^{-3 + 3 i / (n - 1)}, last point excluded.
  std::vector<double> th(grid_points);
  for (int i = 0; i < grid_points; ++i) th[i] = std::pow(10.0, -3.0 + 3.0 * i / grid_points);

  for (int i = 1; i + 1 < grid_points; ++i) {
    const double w = (th[i] - th[i - 1]) / (th[i + 1] - th[i - 1]);
    const double chord = (1.0 - w) * m.psi(th[i - 1]) + w * m.psi(th[i + 1]);
    if (m.psi(th[i]) > chord * (1.0 + 1e-12)) ++r.convexity_violations;
  }
  r.convex = r.convexity_violations == 0;

  const double k2 = r.k2;
  for (double t : th) {
    if (t >= 1.0 / k2) continue;
    const double scaled = m.psi_prime(t) * std::pow(t, 1.0 + 1.0 / m.beta);
    if (scaled < -k2 * (1.0 + 1e-12) || scaled > -(1.0 / k2) * (1.0 - 1e-12)) r.derivative_bounds = false;
  }

  // Two-sided ratio control for theta <= eps <= 2 theta < 1.
  for (double t : th) {
    if (2.0 * t >= 1.0) continue;
    for (int j = 1; j <= 8; ++j) {
      const double eps = t * (1.0 + j / 8.0);
      const double log_ratio = m.psi(t) - m.psi(eps);
      const double shape = (eps - t) * std::pow(t, -1.0 - 1.0 / m.beta);
      r.fitted_k3 = std::max(r.fitted_k3, std::abs(log_ratio) / shape);
    }
  }
  r.ratio_bounds = r.fitted_k3 <= r.k3_model_bound * (1.0 + 1e-12) && r.fitted_k3 <= r.k3_shape_bound;

  // Compared on the log scale: phi itself underflows for small theta.
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : th) {
    if (t >= r.monotone_threshold) break;
    const double log_g = -std::log(t) / m.beta - m.psi(t);
    if (!(log_g > prev)) ++r.monotonicity_violations;
    prev = log_g;
  }
  r.monotone_below_threshold = r.monotonicity_violations == 0;
  return r;
}

PsiToolkitReport psi_toolkit_check(std::vector<SmallBallEstimate> est, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  std::sort(est.begin(), est.end(), [](const auto& a, const auto& b) { return a.theta < b.theta; });
  std::erase_if(est, [](const auto& e) { return e.hits == 0; });
  if (est.size() < 3) throw InsufficientSpread("empirical psi check needs three estimates with hits");
  for (std::size_t i = 1; i < est.size(); ++i)
    if (est[i].theta > 2.0 * est[i - 1].theta) throw InvalidArgument("successive theta ratios must be <= 2");

  PsiToolkitReport r;
  r.model_mode = false;
  r.derivative_bounds = true;
  r.ratio_bounds = true;
  auto psi_low = [](const SmallBallEstimate& e) { return -std::log(e.ci_high); };
  auto psi_high = [](const SmallBallEstimate& e) { return -std::log(std::max(e.ci_low, 1e-300)); };

  for (std::size_t i = 1; i + 1 < est.size(); ++i) {
    const double w = (est[i].theta - est[i - 1].theta) / (est[i + 1].theta - est[i - 1].theta);
    const double chord = (1.0 - w) * psi_high(est[i - 1]) + w * psi_high(est[i + 1]);
    if (psi_low(est[i]) > chord) ++r.convexity_violations;
  }
  r.convex = r.convexity_violations == 0;

  for (std::size_t i = 0; i + 1 < est.size(); ++i) {
    const double t = est[i].theta, e = est[i + 1].theta;
    if (e > 2.0 * t || 2.0 * t >= 1.0) continue;
    const double shape = (e - t) * std::pow(t, -1.0 - 1.0 / beta);
    r.fitted_k3 = std::max(r.fitted_k3, std::abs(std::log(est[i + 1].p_hat / est[i].p_hat)) / shape);
  }

  // Threshold: first local maximum of the point estimates of theta^{-1/beta} phi.
  auto g = [beta](double theta, double p) { return std::pow(theta, -1.0 / beta) * p; };
  std::size_t top = est.size() - 1;
  for (std::size_t i = 0; i + 1 < est.size(); ++i)
    if (g(est[i + 1].theta, est[i + 1].p_hat) < g(est[i].theta, est[i].p_hat)) {
      top = i;
      break;
    }
  r.monotone_threshold = est[top].theta;
  for (std::size_t i = 0; i < top; ++i) {
    const double hi_next = g(est[i + 1].theta, est[i + 1].ci_high);
    const double lo_here = g(est[i].theta, est[i].ci_low);
    if (hi_next < lo_here) ++r.monotonicity_violations;
  }
  r.monotone_below_threshold = r.monotonicity_violations == 0;
  return r;
}

JointProbe joint_smallball_probe(const CovarianceOracle& oracle, double t, double u, double theta,
                                 double eta, std::size_t n_paths, std::uint64_t seed, int points_to_t,
                                 int workers) {
  if (!(t > 0.0 && u >= t)) throw InvalidArgument("joint probe needs 0 < t <= u");
  if (!(theta > 0.0 && eta > 0.0)) throw InvalidArgument("joint probe thresholds must be positive");
  if (points_to_t < 2) throw BadSize("points_to_t must be at least 2");
  const double h = t / points_to_t;
  std::vector<double> pts;
  for (int k = 1; k <= points_to_t; ++k) pts.push_back(k * h);
  pts.back() = t;
  if (u > t) {
    const auto extra = static_cast<std::size_t>(std::ceil((u - t) / h * (1.0 - 1e-12)));
    for (std::size_t k = 1; k <= extra; ++k) pts.push_back(std::min(u, t + static_cast<double>(k) * h));
    pts.back() = u;
  }
  const Grid grid = custom_grid(std::move(pts));
  const PathSampler sampler(oracle, grid, ProcessTag::X, workers);
  const Eigen::MatrixXd sup = sampler.running_sup_at(n_paths, seed, {t, u});

  const double first_level = theta * std::pow(t, oracle.params().h());
  std::size_t first = 0, both = 0;
  for (Eigen::Index i = 0; i < sup.rows(); ++i) {
    if (sup(i, 0) <= first_level) {
      ++first;
      if (sup(i, 1) <= eta) ++both;
    }
  }
  const GfbmParams& p = oracle.params();
  JointProbe out;
  out.n_paths = n_paths;
  out.hits = both;
  out.no_hits = both == 0;
  out.p_joint = static_cast<double>(both) / static_cast<double>(n_paths);
  out.phi_hat = static_cast<double>(first) / static_cast<double>(n_paths);
  out.covariate = (u - t) / (std::pow(u, p.gamma() / p.beta()) * std::pow(eta, 1.0 / p.beta()));
  return out;
}

} // namespace gfbm
