#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gfbm/core.hpp"
#include "gfbm/smallball.hpp"

namespace gfbm {

enum class Direction { Zero, Infinity };

std::string_view to_string(Direction d) noexcept;
Direction direction_from_string(std::string_view name);

enum class TestForm { FLambda, PowerTimesLogLog, Constant, Table };

std::string_view to_string(TestForm f) noexcept;

/// A nondecreasing continuous xi(t) together with its ratio xi(t) / t^H.
///
/// The closed forms are c t^p (ln|ln t|)^q; f_lambda is the case c = lambda,
/// p = H, q = -beta. Tables interpolate linearly in t and are held constant
/// outside their sample range. All log-scale accessors take L = ln t so that
/// t itself may under- or overflow.
class TestFunction {
public:
  static TestFunction f_lambda(double lambda, double h, double beta);
  static TestFunction power_times_loglog(double c, double power, double loglog_power, double h);
  static TestFunction constant(double c, double h);
  /// Throws NotMonotone unless t is strictly and xi weakly increasing.
  static TestFunction table(std::vector<std::pair<double, double>> samples, double h);

  TestForm form() const noexcept { return form_; }
  double h() const noexcept { return h_; }
  double lambda() const noexcept { return c_; }
  const std::vector<std::pair<double, double>>& samples() const noexcept { return table_; }

  double operator()(double t) const;
  double ratio(double t) const;
  double log_value(double log_t) const;
  double log_ratio(double log_t) const;

  /// Domain (0, e^{-e}] for Zero, [e^e, inf) for Infinity.
  static bool in_domain(double t, Direction d) noexcept;

  std::string describe() const;
  nlohmann::json to_json() const;

private:
  TestForm form_ = TestForm::Constant;
  double h_ = 0.5;
  double c_ = 1.0;
  double power_ = 0.0;
  double loglog_power_ = 0.0;
  std::vector<std::pair<double, double>> table_;
};

/// log phi as a function of log theta, from the parametric model or from a
/// table of estimates interpolated linearly in (theta^{-1/beta}, log phi).
class PhiSource {
public:
  static PhiSource model(const SmallBallModel& m);
  /// Estimates with hits in (0, n); log phi is made nonincreasing in
  /// theta^{-1/beta}, joined linearly to (0, 0) on the left and extended with
  /// the last segment's slope on the right.
  static PhiSource empirical(const std::vector<SmallBallEstimate>& estimates, double beta);

  double beta() const noexcept { return beta_; }
  double log_phi(double log_theta) const;
  const std::string& description() const noexcept { return description_; }
  std::optional<SmallBallModel> as_model() const { return model_; }

private:
  double beta_ = 0.5;
  std::optional<SmallBallModel> model_;
  std::vector<double> x_;  // theta^{-1/beta}, increasing
  std::vector<double> y_;  // log phi
  std::string description_;
};

enum class Decision { Finite, Infinite, Inconclusive, FailsBoundedness };

std::string_view to_string(Decision d) noexcept;

struct CriterionOptions {
  double max_log_w = 512.0;     // ln W cap; W is squared each round starting from e^2
  double finite_tail_ratio = 1e-6;
  double rel_tol = 1e-10;
  double necessity_eps0 = 0.05; // exponent slack in the necessity monotonicity check
};

struct CriterionVerdict {
  Direction direction = Direction::Zero;
  bool bounded = true;
  double integral_value = 0.0;  // +inf when decision == Infinite
  Decision decision = Decision::Inconclusive;
  std::string phi_source;
  double log_w_reached = 0.0;
  double tail_bound = 0.0;
  double tail_exponent = 0.0;   // local d log g / d log w at the last W
  double two_decade_slope = 0.0;
  /// xi(t) / t^{(1 + eps0) H} non-increasing towards the limit point (informational).
  bool necessity_monotone = false;

  nlohmann::json to_json() const;
};

/// Integrates (xi/t^H)^{-1/beta} phi(xi/t^H) dt/t in w = |ln t| from e to
/// infinity by squaring W; decides finite once the power-law tail majorant
/// g(W) W / (q - 1) falls below finite_tail_ratio of the running value, and
/// infinite when W reaches the cap while the log-log slope of the integrand
/// over the last two decades is >= -1.
CriterionVerdict evaluate_criterion(const TestFunction& xi, const PhiSource& phi, Direction direction,
                                    const CriterionOptions& options = {});

struct ThresholdResult {
  double flip_lambda = 0.0;   // first grid value not classified finite
  double last_finite = 0.0;   // grid value just below it
  double log_step = 0.0;      // log spacing of the grid
  double analytic = 0.0;      // kappa^beta
  std::vector<std::pair<double, Decision>> verdicts;
};

/// Throws NoFlip when every grid point gets the same verdict. The grid must be
/// increasing, log-spaced and hold at least 16 points.
ThresholdResult classify_lambda_threshold(const SmallBallModel& model, Direction direction,
                                          const std::vector<double>& lambda_grid);

/// Same sweep against any phi source; `analytic` is NaN unless it is a model.
ThresholdResult classify_lambda_threshold(const PhiSource& phi, Direction direction,
                                          const std::vector<double>& lambda_grid);

/// lo * (hi / lo)^{i / (n - 1)}, i = 0..n-1.
std::vector<double> log_grid(double lo, double hi, int n);

struct CoveringReport {
  double eps = 0.0;
  double b = 0.0;
  double rho = 0.0;
  long long l_eps = 0;
  bool capped = false;          // stopped at the 1e8 term guard
  long long covering_count = 0; // L_eps + 1
  std::vector<double> leading_terms;  // t_1, t_2, ... (at most 64)
  long long band_n = 0;
  double band_low = 0.0;        // inf_{n <= band_n} a_n n^{-1/rho}
  double band_high = 0.0;       // sup_{n <= band_n} a_n n^{-1/rho}
  double band_limit = 0.0;      // rho^{1/rho}

  nlohmann::json to_json() const;
};

/// a_1 = 1, a_n = a_{n-1} + a_{n-1}^{gamma/beta}, t_n = a_n eps^{1/H};
/// L_eps = max{n : t_n <= b} (with a 1e-12 relative slack on b).
CoveringReport covering_sequence(const GfbmParams& p, double b, double eps, long long band_n = 1000000);

enum class SequenceVariant { Sufficiency, Necessity };

struct SequenceReport {
  Direction direction = Direction::Zero;
  SequenceVariant variant = SequenceVariant::Sufficiency;
  double L = 0.0;
  std::vector<double> terms;
  std::vector<char> branches;       // 'u', 'v' or 's'; entry n is the branch that produced terms[n+1]
  std::vector<int> k_indices;
  std::vector<double> residuals;    // relative residual of the defining equation per step
  bool monotone = true;
  bool limit_reached = false;       // last term below 1e-6 (zero) or above 1e6 (infinity)
  bool chaining_ok = true;          // sufficiency at zero
  bool tmn_ok = true;               // necessity at infinity
  double final_ratio = 0.0;         // xi(t_N) / t_N^H
  std::string stop_reason;

  double max_u_residual() const;
  nlohmann::json to_json() const;
};

/// Terms t_1 = e^{-e} (Zero) or e^{e} (Infinity), at most N. Stops early with
/// a stop_reason once the terms leave [1e-300, 1e300] or a root bracket is
/// lost. Throws StalledSequence when successive terms agree to 1e-15.
SequenceReport lower_class_sequences(const GfbmParams& p, const TestFunction& xi, double L, Direction direction,
                                     int N, SequenceVariant variant = SequenceVariant::Sufficiency);

struct KIndex {
  int k = 0;
  double n_k = 0.0;
  bool negative_ratio = false;
};

/// 2^k <= (t^H / xi(t))^{1/beta} < 2^{k+1}; N_k = exp(2^{k-2} / K1).
KIndex k_index(const GfbmParams& p, const TestFunction& xi, double t, double k1);

/// Same with the ratio (t^H / xi)^{1/beta} given directly.
KIndex k_index_from_ratio(double ratio, double k1);

} // namespace gfbm
