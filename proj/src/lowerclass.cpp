#include "gfbm/lowerclass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "gfbm/errors.hpp"
#include "gfbm/quadrature.hpp"

namespace gfbm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLn2 = std::numbers::ln2;
const double kZeroStart = std::exp(-std::numbers::e);
const double kInfinityStart = std::exp(std::numbers::e);

} // namespace

std::string_view to_string(Direction d) noexcept { return d == Direction::Zero ? "zero" : "infinity"; }

Direction direction_from_string(std::string_view name) {
  if (name == "zero" || name == "0") return Direction::Zero;
  if (name == "infinity" || name == "inf") return Direction::Infinity;
  throw InvalidArgument("unknown direction '" + std::string(name) + "'");
}

std::string_view to_string(TestForm f) noexcept {
  switch (f) {
    case TestForm::FLambda: return "f_lambda";
    case TestForm::PowerTimesLogLog: return "power_times_loglog";
    case TestForm::Constant: return "constant";
    case TestForm::Table: return "table";
  }
  return "table";
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Finite: return "finite";
    case Decision::Infinite: return "infinite";
    case Decision::Inconclusive: return "inconclusive";
    case Decision::FailsBoundedness: return "fails_boundedness";
  }
  return "inconclusive";
}

// ---------------------------------------------------------------------------
// Test functions

TestFunction TestFunction::power_times_loglog(double c, double power, double loglog_power, double h) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("test function scale must be positive");
  if (!(h > 0.0 && h < 1.0)) throw InvalidArgument("H must lie in (0, 1)");
  TestFunction f;
  f.form_ = TestForm::PowerTimesLogLog;
  f.c_ = c;
  f.power_ = power;
  f.loglog_power_ = loglog_power;
  f.h_ = h;
  return f;
}

TestFunction TestFunction::f_lambda(double lambda, double h, double beta) {
  if (!(lambda > 0.0)) throw InvalidArgument("f_lambda needs lambda > 0");
  TestFunction f = power_times_loglog(lambda, h, -beta, h);
  f.form_ = TestForm::FLambda;
  return f;
}

TestFunction TestFunction::constant(double c, double h) {
  TestFunction f = power_times_loglog(c, 0.0, 0.0, h);
  f.form_ = TestForm::Constant;
  return f;
}

TestFunction TestFunction::table(std::vector<std::pair<double, double>> samples, double h) {
  if (samples.size() < 2) throw InvalidArgument("a table test function needs two samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!(samples[i].first > 0.0 && samples[i].second > 0.0))
      throw InvalidArgument("table samples must be positive");
    if (i > 0 && !(samples[i].first > samples[i - 1].first))
      throw NotMonotone("table abscissae must be strictly increasing");
    if (i > 0 && samples[i].second < samples[i - 1].second)
      throw NotMonotone("table values decrease between t=" + std::to_string(samples[i - 1].first) +
                        " and t=" + std::to_string(samples[i].first));
  }
  TestFunction f = constant(1.0, h);
  f.form_ = TestForm::Table;
  f.table_ = std::move(samples);
  return f;
}

double TestFunction::log_value(double log_t) const {
  if (form_ == TestForm::Table) {
    const double t = std::exp(log_t);
    if (t <= table_.front().first) return std::log(table_.front().second);
    if (t >= table_.back().first) return std::log(table_.back().second);
    const auto it = std::upper_bound(table_.begin(), table_.end(), t,
                                     [](double v, const auto& s) { return v < s.first; });
    const auto& [t1, x1] = *it;
    const auto& [t0, x0] = *(it - 1);
    return std::log(x0 + (x1 - x0) * (t - t0) / (t1 - t0));
  }
  double v = std::log(c_) + power_ * log_t;
  if (loglog_power_ != 0.0) {
    const double ll = std::log(std::abs(log_t));
    if (!(ll > 0.0)) return kNaN;
    v += loglog_power_ * std::log(ll);
  }
  return v;
}

double TestFunction::log_ratio(double log_t) const {
  if (form_ == TestForm::Table) return log_value(log_t) - h_ * log_t;
  // Subtracting H log t from log xi would cancel badly when |log t| is huge.
  double v = std::log(c_) + (power_ - h_) * log_t;
  if (loglog_power_ != 0.0) {
    const double ll = std::log(std::abs(log_t));
    if (!(ll > 0.0)) return kNaN;
    v += loglog_power_ * std::log(ll);
  }
  return v;
}

double TestFunction::operator()(double t) const { return std::exp(log_value(std::log(t))); }
double TestFunction::ratio(double t) const { return std::exp(log_ratio(std::log(t))); }

bool TestFunction::in_domain(double t, Direction d) noexcept {
  return d == Direction::Zero ? (t > 0.0 && t <= kZeroStart) : t >= kInfinityStart;
}

std::string TestFunction::describe() const {
  std::ostringstream o;
  switch (form_) {
    case TestForm::FLambda: o << "f_lambda(lambda=" << c_ << ", H=" << h_ << ", beta=" << -loglog_power_ << ")"; break;
    case TestForm::PowerTimesLogLog:
      o << c_ << " t^" << power_ << " (ln|ln t|)^" << loglog_power_;
      break;
    case TestForm::Constant: o << "constant(" << c_ << ")"; break;
    case TestForm::Table: o << "table(" << table_.size() << " samples)"; break;
  }
  return o.str();
}

nlohmann::json TestFunction::to_json() const {
  nlohmann::json j{{"form", to_string(form_)}, {"h", h_}};
  switch (form_) {
    case TestForm::FLambda: j["lambda"] = c_; j["beta"] = -loglog_power_; break;
    case TestForm::PowerTimesLogLog: j["c"] = c_; j["power"] = power_; j["loglog_power"] = loglog_power_; break;
    case TestForm::Constant: j["c"] = c_; break;
    case TestForm::Table: j["samples"] = table_; break;
  }
  return j;
}

// ---------------------------------------------------------------------------
// phi sources

PhiSource PhiSource::model(const SmallBallModel& m) {
  PhiSource s;
  s.beta_ = m.beta;
  s.model_ = m;
  std::ostringstream o;
  o << "model(kappa=" << m.kappa << ", beta=" << m.beta << ")";
  s.description_ = o.str();
  return s;
}

PhiSource PhiSource::empirical(const std::vector<SmallBallEstimate>& estimates, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidArgument("beta must lie in (0, 1)");
  std::vector<std::pair<double, double>> pts;
  for (const auto& e : estimates)
    if (e.hits > 0 && e.hits < e.n_paths) pts.emplace_back(std::pow(e.theta, -1.0 / beta), std::log(e.p_hat));
  if (pts.size() < 2) throw InsufficientSpread("empirical phi needs two estimates strictly inside (0, 1)");
  std::sort(pts.begin(), pts.end());
  PhiSource s;
  s.beta_ = beta;
  double running = 0.0;
  for (const auto& [x, y] : pts) {
    if (!s.x_.empty() && x == s.x_.back()) continue;
    running = std::min(running, y);
    s.x_.push_back(x);
    s.y_.push_back(running);
  }
  if (s.x_.size() < 2) throw InsufficientSpread("empirical phi needs two distinct thetas");
  s.description_ = "empirical(" + std::to_string(s.x_.size()) + " points)";
  return s;
}

double PhiSource::log_phi(double log_theta) const {
  if (model_) return -model_->kappa * std::exp(-log_theta / model_->beta);
  const double x = std::exp(-log_theta / beta_);
  if (std::isinf(x)) return kNegInf;
  if (x <= x_.front()) return y_.front() * x / x_.front();
  const std::size_t n = x_.size();
  if (x >= x_.back()) {
    double slope = (y_[n - 1] - y_[n - 2]) / (x_[n - 1] - x_[n - 2]);
    if (!(slope < 0.0)) slope = y_[n - 1] / x_[n - 1];
    return y_.back() + slope * (x - x_.back());
  }
  const auto k = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
  return y_[k - 1] + (y_[k] - y_[k - 1]) * (x - x_[k - 1]) / (x_[k] - x_[k - 1]);
}

// ---------------------------------------------------------------------------
// Integral criterion

CriterionVerdict evaluate_criterion(const TestFunction& xi, const PhiSource& phi, Direction direction,
                                    const CriterionOptions& opt) {
  if (!(opt.max_log_w >= 8.0 && opt.max_log_w <= 700.0))
    throw InvalidArgument("max_log_w must lie in [8, 700]");
  if (xi.form() == TestForm::Table) {
    const auto& s = xi.samples();
    const bool reaches = direction == Direction::Zero ? s.front().first <= kZeroStart : s.back().first >= kInfinityStart;
    if (!reaches) throw DomainMismatch("table samples do not reach the " + std::string(to_string(direction)) + " domain");
  }
  const double sign = direction == Direction::Zero ? -1.0 : 1.0;
  const double inv_beta = 1.0 / phi.beta();
  // u = ln w, w = |ln t|.
  auto log_ratio_at = [&](double u) { return xi.log_ratio(sign * std::exp(u)); };
  auto log_g = [&](double u) {
    const double lr = log_ratio_at(u);
    return -inv_beta * lr + phi.log_phi(lr);
  };

  CriterionVerdict v;
  v.direction = direction;
  v.phi_source = phi.description();

  // Boundedness of xi / t^H on the sampled range.
  double max_lr = kNegInf;
  bool finite_samples = true;
  for (double u = 1.0; u <= opt.max_log_w; u += 0.25) {
    const double lr = log_ratio_at(u);
    if (std::isnan(lr) || lr == std::numeric_limits<double>::infinity()) finite_samples = false;
    max_lr = std::max(max_lr, lr);
  }
  const double lr_end = log_ratio_at(opt.max_log_w);
  const double lr_half = log_ratio_at(0.5 * opt.max_log_w);
  v.bounded = finite_samples && max_lr <= 50.0 && !(lr_end > lr_half + 1.0);

  // xi(t) / t^{(1+eps0)H} non-increasing in t, sampled in u.
  {
    const double e = (1.0 + opt.necessity_eps0) * xi.h();
    bool ok = true;
    double prev = 0.0;
    bool have = false;
    for (double u = 1.0; u <= std::min(opt.max_log_w, 64.0); u += 0.25) {
      const double L = sign * std::exp(u);
      const double val = xi.log_value(L) - e * L;
      // Walking away from e^{-e} towards 0 decreases t, so the value must not drop.
      if (have) {
        const bool bad = direction == Direction::Zero ? val < prev - 1e-12 * std::abs(prev)
                                                      : val > prev + 1e-12 * std::abs(prev);
        if (bad) ok = false;
      }
      prev = val;
      have = true;
    }
    v.necessity_monotone = ok;
  }

  if (!v.bounded) {
    v.decision = Decision::FailsBoundedness;
    v.integral_value = kNaN;
    return v;
  }

  auto integrand = [&](double u, auto...) { return std::exp(log_g(u) + u); };
  double total = 0.0;
  constexpr double kPanelWidth = 4.0;
  double lo = 1.0;
  for (double hi = 2.0;; hi = std::min(2.0 * hi, opt.max_log_w)) {
    for (double a = lo; a < hi; a += kPanelWidth) {
      const double b = std::min(hi, a + kPanelWidth);
      const auto r = detail::tanh_sinh_panel(integrand, a, b, opt.rel_tol, 12);
      if (!r.converged && std::isfinite(r.value))
        throw NoConvergence("criterion panel [" + std::to_string(a) + ", " + std::to_string(b) + "] in ln w");
      total += r.value;
    }
    lo = hi;
    v.log_w_reached = hi;
    if (!std::isfinite(total)) {
      v.decision = Decision::Infinite;
      v.integral_value = std::numeric_limits<double>::infinity();
      return v;
    }

    const double g_end = log_g(hi);
    constexpr double kStep = 1e-3;
    const double local = (g_end - log_g(hi - kStep)) / kStep;
    const double decades = std::log(100.0);
    v.tail_exponent = local;
    v.two_decade_slope = hi - decades >= 1.0 ? (g_end - log_g(hi - decades)) / decades : local;

    if (hi >= 8.0) {
      if (g_end == kNegInf) {
        v.tail_bound = 0.0;
      } else if (local < -1.0) {
        v.tail_bound = std::exp(g_end + hi) / (-local - 1.0);
      } else {
        v.tail_bound = std::numeric_limits<double>::infinity();
      }
      if (v.tail_bound <= opt.finite_tail_ratio * total) {
        v.decision = Decision::Finite;
        v.integral_value = total;
        return v;
      }
    }
    if (hi >= opt.max_log_w) break;
  }
  if (v.two_decade_slope >= -1.0) {
    v.decision = Decision::Infinite;
    v.integral_value = std::numeric_limits<double>::infinity();
  } else {
    v.decision = Decision::Inconclusive;
    v.integral_value = total;
  }
  return v;
}

nlohmann::json CriterionVerdict::to_json() const {
  auto num = [](double x) -> nlohmann::json {
    if (std::isfinite(x)) return x;
    if (std::isnan(x)) return nullptr;
    return x > 0 ? "inf" : "-inf";
  };
  return {{"schema", "lowerclass-v1"},
          {"kind", "criterion_verdict"},
          {"direction", to_string(direction)},
          {"boundedness", bounded ? "bounded" : "unbounded"},
          {"integral_value", num(integral_value)},
          {"decision", to_string(decision)},
          {"phi_source", phi_source},
          {"diagnostics",
           {{"log_w_reached", log_w_reached},
            {"tail_bound", num(tail_bound)},
            {"tail_exponent", num(tail_exponent)},
            {"two_decade_slope", num(two_decade_slope)},
            {"necessity_monotone", necessity_monotone}}}};
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw InvalidArgument("log grid needs 0 < lo < hi and n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  g.back() = hi;
  return g;
}

ThresholdResult classify_lambda_threshold(const PhiSource& phi, Direction direction,
                                          const std::vector<double>& grid) {
  if (grid.size() < 16) throw InvalidArgument("lambda grid needs at least 16 points");
  if (!(grid[0] > 0.0)) throw InvalidArgument("lambda grid must be positive");
  const double step = std::log(grid[1] / grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("lambda grid must be increasing");
    if (std::abs(std::log(grid[i] / grid[i - 1]) - step) > 1e-6 * step)
      throw InvalidArgument("lambda grid must be log-spaced");
  }
  ThresholdResult r;
  r.log_step = step;
  const auto model = phi.as_model();
  r.analytic = model ? std::pow(model->kappa, model->beta) : kNaN;
  for (double lambda : grid) {
    const auto verdict = evaluate_criterion(TestFunction::f_lambda(lambda, 0.5, phi.beta()), phi, direction);
    r.verdicts.emplace_back(lambda, verdict.decision);
  }
  const bool first_finite = r.verdicts.front().second == Decision::Finite;
  for (std::size_t i = 1; i < r.verdicts.size(); ++i) {
    if (first_finite && r.verdicts[i].second != Decision::Finite) {
      r.flip_lambda = grid[i];
      r.last_finite = grid[i - 1];
      return r;
    }
  }
  throw NoFlip("all " + std::to_string(grid.size()) + " verdicts on [" + std::to_string(grid.front()) + ", " +
               std::to_string(grid.back()) + "] agree");
}

ThresholdResult classify_lambda_threshold(const SmallBallModel& model, Direction direction,
                                          const std::vector<double>& grid) {
  return classify_lambda_threshold(PhiSource::model(model), direction, grid);
}

// ---------------------------------------------------------------------------
// Covering sequence

CoveringReport covering_sequence(const GfbmParams& p, double b, double eps, long long band_n) {
  if (!(b > 0.0 && eps > 0.0)) throw InvalidArgument("covering sequence needs b, eps > 0");
  if (band_n < 1) throw InvalidArgument("band_n must be positive");
  constexpr long long kMaxTerms = 100000000;
  CoveringReport r;
  r.eps = eps;
  r.b = b;
  r.rho = p.h() / p.beta();
  r.band_limit = std::pow(r.rho, 1.0 / r.rho);
  r.band_n = band_n;
  const double scale = std::pow(eps, 1.0 / p.h());
  const double e = p.gamma() / p.beta();
  const double inv_rho = 1.0 / r.rho;
  // Representation error in eps^{1/H} can push t_n a hair above b.
  const double limit = b * (1.0 + 1e-12);

  double a = 1.0;
  r.band_low = std::numeric_limits<double>::infinity();
  r.band_high = 0.0;
  bool counting = true;
  for (long long n = 1;; ++n) {
    const double t = a * scale;
    if (counting) {
      if (t <= limit) {
        r.l_eps = n;
        if (r.leading_terms.size() < 64) r.leading_terms.push_back(t);
      } else {
        counting = false;
      }
    }
    if (n <= band_n) {
      const double ratio = a * std::pow(static_cast<double>(n), -inv_rho);
      r.band_low = std::min(r.band_low, ratio);
      r.band_high = std::max(r.band_high, ratio);
    }
    if (counting && n >= kMaxTerms) {
      r.capped = true;
      counting = false;
    }
    if (!counting && n >= band_n) break;
    a += e == 0.0 ? 1.0 : std::pow(a, e);
  }
  r.covering_count = r.l_eps + 1;
  return r;
}

nlohmann::json CoveringReport::to_json() const {
  return {{"schema", "lowerclass-v1"},
          {"kind", "covering_sequence"},
          {"eps", eps},
          {"b", b},
          {"rho", rho},
          {"L_eps", l_eps},
          {"capped", capped},
          {"covering_count", covering_count},
          {"covering_count_le_2L", l_eps >= 1 && covering_count <= 2 * l_eps},
          {"leading_terms", leading_terms},
          {"band", {{"n_max", band_n}, {"low", band_low}, {"high", band_high}, {"limit", band_limit}}}};
}

// ---------------------------------------------------------------------------
// Recursive sequences

KIndex k_index_from_ratio(double ratio, double k1) {
  if (!(ratio > 0.0)) throw InvalidArgument("k_index needs a positive ratio");
  if (!(k1 > 0.0)) throw InvalidArgument("K1 must be positive");
  KIndex k;
  k.k = static_cast<int>(std::floor(std::log2(ratio)));
  k.negative_ratio = k.k < 0;
  k.n_k = std::exp(std::ldexp(1.0, k.k - 2) / k1);
  return k;
}

KIndex k_index(const GfbmParams& p, const TestFunction& xi, double t, double k1) {
  const double lr = xi.log_ratio(std::log(t));
  if (!std::isfinite(lr)) throw InvalidArgument("k_index needs xi(t) > 0");
  // (t^H / xi)^{1/beta} = exp(-lr / beta); take log2 without forming it.
  const double log2_ratio = -lr / p.beta() / kLn2;
  if (!(k1 > 0.0)) throw InvalidArgument("K1 must be positive");
  KIndex k;
  k.k = static_cast<int>(std::floor(log2_ratio));
  k.negative_ratio = k.k < 0;
  k.n_k = std::exp(std::ldexp(1.0, k.k - 2) / k1);
  return k;
}

double SequenceReport::max_u_residual() const {
  double m = 0.0;
  for (std::size_t i = 0; i < residuals.size(); ++i)
    if (i < branches.size() && branches[i] == 'u') m = std::max(m, residuals[i]);
  return m;
}

namespace {

/// Smallest x in (lo, hi] with pred(x), assuming !pred(lo) and pred(hi).
template <class Pred>
double bisect_first_true(Pred&& pred, double lo, double hi) {
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) return hi;
    (pred(mid) ? hi : lo) = mid;
  }
  throw BisectionFailure("bisection did not close its bracket");
}

struct SequenceContext {
  const GfbmParams& p;
  const TestFunction& xi;
  double L;
  double inv_beta;
  double g_over_b;

  double xi_at(double t) const { return xi(t); }
  double ratio_pow(double t) const { return std::exp(inv_beta * xi.log_ratio(std::log(t))); }
};

} // namespace

SequenceReport lower_class_sequences(const GfbmParams& p, const TestFunction& xi, double L, Direction direction,
                                     int N, SequenceVariant variant) {
  if (!(L > 2.0 * p.h())) throw InvalidArgument("L must exceed 2H");
  if (N < 2 || N > 100000) throw InvalidArgument("N must lie in [2, 100000]");
  if (variant == SequenceVariant::Necessity && direction == Direction::Zero)
    throw InvalidArgument("the necessity construction is defined at infinity only");
  const SequenceContext ctx{p, xi, L, 1.0 / p.beta(), p.gamma() / p.beta()};

  SequenceReport r;
  r.direction = direction;
  r.variant = variant;
  r.L = L;
  double t = direction == Direction::Zero ? kZeroStart : kInfinityStart;
  r.terms.push_back(t);

  while (static_cast<int>(r.terms.size()) < N) {
    const double xt = ctx.xi_at(t);
    double next = 0.0;
    char branch = 'u';
    double residual = 0.0;

    if (direction == Direction::Zero) {
      const double c = std::pow(t, ctx.g_over_b);
      auto F = [&](double u) { return u + c * std::pow(ctx.xi_at(u), ctx.inv_beta) - t; };
      double lo = 0.5 * t;
      if (F(lo) > 0.0) lo = 1e-15 * t;
      if (F(lo) > 0.0) {
        r.stop_reason = "no root of the u-equation above 1e-15 t_n";
        break;
      }
      const double u = bisect_first_true([&](double x) { return F(x) >= 0.0; }, lo, t);
      residual = std::abs(F(u)) / t;

      auto V = [&](double x) { return ctx.xi_at(x) * (1.0 + L * ctx.ratio_pow(x)) - xt; };
      bool v_below_u = V(u) >= 0.0;
      if (!v_below_u) {
        // v < u is possible when the v-set has a component below u.
        for (double x = u * 0.8408964152537145; x > std::max(1e-300, u * 0x1p-64); x *= 0.8408964152537145)
          if (V(x) >= 0.0) {
            v_below_u = true;
            break;
          }
      }
      if (v_below_u) {
        next = u;
        branch = 'u';
      } else {
        constexpr int kScan = 64;
        double prev = u;
        double v = t;
        for (int k = 1; k <= kScan; ++k) {
          const double x = k == kScan ? t : u + (t - u) * k / kScan;
          if (V(x) >= 0.0) {
            v = bisect_first_true([&](double y) { return V(y) >= 0.0; }, prev, x);
            break;
          }
          prev = x;
        }
        next = v;
        branch = 'v';
      }
      // Chaining: xi(s) <= xi(t_n) <= xi(t_{n+1}) (1 + L (xi(t_{n+1}) / t_{n+1}^H)^{1/beta}) on (t_{n+1}, t_n].
      const double bound = ctx.xi_at(next) * (1.0 + L * ctx.ratio_pow(next));
      if (xt > bound * (1.0 + 1e-12)) r.chaining_ok = false;
      for (int k = 1; k <= 3; ++k) {
        const double s = next + (t - next) * k / 4.0;
        if (ctx.xi_at(s) > xt * (1.0 + 1e-12)) r.chaining_ok = false;
      }
    } else if (variant == SequenceVariant::Sufficiency) {
      const double step = std::pow(t, ctx.g_over_b) * std::pow(xt, ctx.inv_beta);
      const double u = t + step;
      residual = std::abs(u - t - step) / t;
      const double target = xt * (1.0 + L * ctx.ratio_pow(t));
      if (ctx.xi_at(u) >= target) {
        next = bisect_first_true([&](double x) { return ctx.xi_at(x) >= target; }, t, u);
        branch = 'v';
      } else {
        next = u;
        branch = 'u';
      }
    } else {
      // s_n maximises log xi(x) - 2H log x over x >= t_n.
      auto objective = [&](double log_x) { return xi.log_value(log_x) - 2.0 * p.h() * log_x; };
      const double log_t = std::log(t);
      const double step = kLn2 / 4.0;
      const double log_end = std::min(std::log(1e300), log_t + 256.0 * kLn2);
      double best = log_t;
      double best_val = objective(log_t);
      for (double lx = log_t + step; lx <= log_end; lx += step) {
        const double val = objective(lx);
        if (val > best_val) {
          best_val = val;
          best = lx;
        }
      }
      double a = std::max(log_t, best - step);
      double b = std::min(log_end, best + step);
      const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
      for (int iter = 0; iter < 200 && b - a > 1e-13 * std::max(1.0, std::abs(b)); ++iter) {
        const double c1 = b - inv_phi * (b - a);
        const double c2 = a + inv_phi * (b - a);
        if (objective(c1) >= objective(c2))
          b = c2;
        else
          a = c1;
      }
      double log_s = 0.5 * (a + b);
      if (objective(log_t) >= objective(log_s)) log_s = log_t;
      const double s = log_s == log_t ? t : std::exp(log_s);
      next = s * (1.0 + ctx.ratio_pow(s));
      residual = std::abs(next - s - std::pow(s, ctx.g_over_b) * std::pow(ctx.xi_at(s), ctx.inv_beta)) / s;
      branch = 's';
    }

    if (std::abs(next - t) < 1e-15 * t)
      throw StalledSequence("terms stalled at t=" + std::to_string(t) + " after " + std::to_string(r.terms.size()) +
                            " terms");
    r.branches.push_back(branch);
    r.residuals.push_back(residual);
    t = next;
    r.terms.push_back(t);
    if (direction == Direction::Zero && t < 1e-300) {
      r.stop_reason = "terms fell below 1e-300";
      break;
    }
    if (direction == Direction::Infinity && t > 1e300) {
      r.stop_reason = "terms exceeded 1e300";
      break;
    }
  }
  if (r.stop_reason.empty()) r.stop_reason = "reached N terms";

  for (std::size_t i = 1; i < r.terms.size(); ++i) {
    const bool ok = direction == Direction::Zero ? r.terms[i] < r.terms[i - 1] : r.terms[i] > r.terms[i - 1];
    if (!ok) r.monotone = false;
  }
  r.limit_reached = direction == Direction::Zero ? r.terms.back() < 1e-6 : r.terms.back() > 1e6;
  r.final_ratio = xi.ratio(r.terms.back());
  for (double term : r.terms) {
    const double lr = xi.log_ratio(std::log(term));
    r.k_indices.push_back(static_cast<int>(std::floor(-lr / p.beta() / kLn2)));
  }

  if (variant == SequenceVariant::Necessity) {
    // xi(t_m) / t_m^{2H} <= 2 xi(t_n) / t_n^{2H} for all m >= n, in logs.
    std::vector<double> q;
    for (double term : r.terms) q.push_back(xi.log_value(std::log(term)) - 2.0 * p.h() * std::log(term));
    double suffix = kNegInf;
    for (std::size_t i = q.size(); i-- > 0;) {
      suffix = std::max(suffix, q[i]);
      if (suffix > q[i] + kLn2 + 1e-12) r.tmn_ok = false;
    }
  }
  return r;
}

nlohmann::json SequenceReport::to_json() const {
  std::string branch_string(branches.begin(), branches.end());
  return {{"schema", "lowerclass-v1"},
          {"kind", "sequence_report"},
          {"direction", to_string(direction)},
          {"variant", variant == SequenceVariant::Sufficiency ? "sufficiency" : "necessity"},
          {"L", L},
          {"terms", terms},
          {"branches", branch_string},
          {"k_indices", k_indices},
          {"residuals", residuals},
          {"max_u_residual", max_u_residual()},
          {"monotone", monotone},
          {"limit_reached", limit_reached},
          {"chaining_ok", chaining_ok},
          {"tmn_ok", tmn_ok},
          {"final_ratio", final_ratio},
          {"stop_reason", stop_reason}};
}

} // namespace gfbm
