#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gfbm/errors.hpp"
#include "gfbm/lowerclass.hpp"

using namespace gfbm;

namespace {
const double kEe = std::exp(-std::numbers::e);
}

TEST_CASE("test function values") {
  const auto f = TestFunction::f_lambda(1.0, 0.6, 0.7);
  CHECK(f(kEe) == doctest::Approx(std::exp(-0.6 * std::numbers::e)).epsilon(1e-14));
  CHECK(f.ratio(kEe) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(TestFunction::constant(3.0, 0.5)(0.01) == doctest::Approx(3.0));
  CHECK(TestFunction::in_domain(0.01, Direction::Zero));
  CHECK_FALSE(TestFunction::in_domain(0.5, Direction::Zero));
  CHECK(TestFunction::in_domain(20.0, Direction::Infinity));

  CHECK_THROWS_AS(TestFunction::table({{1.0, 2.0}, {2.0, 1.0}}, 0.5), NotMonotone);
  const auto tab = TestFunction::table({{0.01, 0.1}, {0.05, 0.2}}, 0.5);
  CHECK(tab(0.03) == doctest::Approx(0.15));
  CHECK(tab(0.001) == doctest::Approx(0.1));
  CHECK(f.to_json()["form"] == "f_lambda");
}

TEST_CASE("log ratio stays exact deep in the tail") {
  const auto f = TestFunction::f_lambda(1.5, 0.6, 0.7);
  // ln|ln t| = 300 exactly, so log(xi / t^H) = log 1.5 - 0.7 log 300
  const double L = -std::exp(300.0);
  CHECK(f.log_ratio(L) == doctest::Approx(std::log(1.5) - 0.7 * std::log(300.0)).epsilon(1e-14));
}

TEST_CASE("criterion examples for the Brownian-shaped model") {
  const auto phi = PhiSource::model(SmallBallModel(1.0, 0.5));
  auto decide = [&](double lambda) {
    return evaluate_criterion(TestFunction::f_lambda(lambda, 0.5, 0.5), phi, Direction::Zero).decision;
  };
  CHECK(decide(0.5) == Decision::Finite);
  CHECK(decide(2.0) == Decision::Infinite);
  CHECK(decide(1.0) == Decision::Infinite);

  const auto v = evaluate_criterion(TestFunction::f_lambda(0.5, 0.5, 0.5), phi, Direction::Zero);
  // integral of (ln w) w^{-4} over w > e with the lambda^{-2} = 4 prefactor
  const double exact = 4.0 * (1.0 / 3.0 + 1.0 / 9.0) * std::exp(-3.0);
  CHECK(v.integral_value == doctest::Approx(exact).epsilon(1e-6));
  const auto j = v.to_json();
  CHECK(j["schema"] == "lowerclass-v1");
  CHECK(j["decision"] == "finite");
  CHECK(j["phi_source"] == "model(kappa=1, beta=0.5)");
}

TEST_CASE("finite iff lambda below kappa^beta on a lattice") {
  for (double kappa : {0.5, 1.0, 2.0, 4.0})
    for (double beta : {0.3, 0.5, 0.7, 0.9}) {
      const auto phi = PhiSource::model(SmallBallModel(kappa, beta));
      const double threshold = std::pow(kappa, beta);
      for (auto d : {Direction::Zero, Direction::Infinity}) {
        CHECK(evaluate_criterion(TestFunction::f_lambda(0.8 * threshold, 0.5, beta), phi, d).decision ==
              Decision::Finite);
        CHECK(evaluate_criterion(TestFunction::f_lambda(threshold, 0.5, beta), phi, d).decision ==
              Decision::Infinite);
        CHECK(evaluate_criterion(TestFunction::f_lambda(1.25 * threshold, 0.5, beta), phi, d).decision ==
              Decision::Infinite);
      }
    }
}

TEST_CASE("lower and upper bound models bracket the classification") {
  const SmallBallModel lower(0.8, 0.7), upper(1.6, 0.7);
  const double l4 = std::pow(lower.kappa, 0.7), l3 = std::pow(upper.kappa, 0.7);
  CHECK(evaluate_criterion(TestFunction::f_lambda(0.9 * l4, 0.5, 0.7), PhiSource::model(lower), Direction::Zero)
            .decision == Decision::Finite);
  CHECK(evaluate_criterion(TestFunction::f_lambda(1.1 * l3, 0.5, 0.7), PhiSource::model(upper), Direction::Zero)
            .decision == Decision::Infinite);
}

TEST_CASE("unbounded ratios fail the boundedness check") {
  const auto phi = PhiSource::model(SmallBallModel(1.0, 0.5));
  const auto v = evaluate_criterion(TestFunction::constant(1.0, 0.5), phi, Direction::Zero);
  CHECK(v.decision == Decision::FailsBoundedness);
  CHECK_FALSE(v.bounded);
}

TEST_CASE("tables must reach the limit domain") {
  const auto phi = PhiSource::model(SmallBallModel(1.0, 0.5));
  const auto tab = TestFunction::table({{0.2, 0.1}, {0.5, 0.2}}, 0.5);
  CHECK_THROWS_AS(evaluate_criterion(tab, phi, Direction::Zero), DomainMismatch);
}

TEST_CASE("threshold classifier") {
  const auto grid = log_grid(0.25, 4.0, 16);
  const auto r1 = classify_lambda_threshold(SmallBallModel(1.0, 0.7), Direction::Zero, grid);
  CHECK(r1.last_finite < 1.0);
  CHECK(r1.flip_lambda >= 1.0);
  CHECK(std::log(r1.flip_lambda / r1.last_finite) == doctest::Approx(r1.log_step));
  const auto r2 = classify_lambda_threshold(SmallBallModel(2.0, 0.5), Direction::Zero, grid);
  CHECK(std::abs(std::log(r2.flip_lambda / std::sqrt(2.0))) <= r2.log_step);
  CHECK(r2.analytic == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(classify_lambda_threshold(SmallBallModel(1.0, 0.5), Direction::Zero, log_grid(2.0, 4.0, 16)),
                  NoFlip);
  CHECK_THROWS_AS(classify_lambda_threshold(SmallBallModel(1.0, 0.5), Direction::Zero, log_grid(0.5, 4.0, 8)),
                  InvalidArgument);
}

TEST_CASE("empirical phi source") {
  std::vector<SmallBallEstimate> est;
  const auto g = build_grid(GridKind::Uniform, 8, 1.0);
  for (double th : {0.3, 0.5, 0.7, 1.0}) {
    const double p = std::exp(-std::pow(th, -2.0));
    est.push_back(make_estimate(th, 1.0, 1000000, static_cast<std::size_t>(p * 1e6), g, 1));
  }
  const auto phi = PhiSource::empirical(est, 0.5);
  CHECK(phi.log_phi(std::log(0.5)) == doctest::Approx(-4.0).epsilon(1e-3));
  CHECK(phi.log_phi(std::log(0.6)) <= phi.log_phi(std::log(0.7)));
  CHECK(phi.description().rfind("empirical", 0) == 0);
  const auto r = classify_lambda_threshold(phi, Direction::Zero, log_grid(0.25, 4.0, 24));
  CHECK(std::abs(std::log(r.flip_lambda)) <= 2 * r.log_step);
  CHECK(std::isnan(r.analytic));
}

TEST_CASE("covering sequence") {
  const auto bm = covering_sequence(derive_indices(0.0, 0.0, true), 1.0, 0.1, 1000);
  CHECK(bm.l_eps == 100);
  CHECK(bm.leading_terms[0] == doctest::Approx(0.01));
  CHECK(bm.leading_terms[4] == doctest::Approx(0.05));
  CHECK(bm.rho == 1.0);
  CHECK(bm.band_low == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bm.band_high == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bm.covering_count <= 2 * bm.l_eps);

  const auto p = covering_sequence(derive_indices(0.2, 0.1), 1.0, 0.1, 1000000);
  CHECK(p.band_low > 0.0);
  CHECK(std::isfinite(p.band_high));
  CHECK(p.band_limit == doctest::Approx(std::pow(p.rho, 1.0 / p.rho)));
  CHECK(p.covering_count <= 2 * p.l_eps);
}

TEST_CASE("constant test function gives explicit steps") {
  const auto bm = derive_indices(0.0, 0.0, true);
  const auto xi = TestFunction::constant(0.01, bm.h());
  const auto zero = lower_class_sequences(bm, xi, 2.0, Direction::Zero, 20);
  const double step = std::pow(0.01, 2.0);
  for (std::size_t n = 1; n < zero.terms.size(); ++n) {
    CHECK(zero.terms[n] == doctest::Approx(zero.terms[n - 1] - step).epsilon(1e-12));
    CHECK(zero.branches[n - 1] == 'u');
  }
  const auto inf = lower_class_sequences(bm, xi, 2.0, Direction::Infinity, 20);
  for (std::size_t n = 1; n < inf.terms.size(); ++n)
    CHECK(inf.terms[n] == doctest::Approx(inf.terms[n - 1] + step).epsilon(1e-12));
}

TEST_CASE("f_lambda sequences") {
  const auto p = derive_indices(0.2, 0.1);
  const auto xi = TestFunction::f_lambda(1.0, p.h(), p.beta());
  const auto zero = lower_class_sequences(p, xi, 2 * p.h() + 1, Direction::Zero, 2000);
  CHECK(zero.monotone);
  CHECK(zero.limit_reached);
  CHECK(zero.terms.back() < 1e-6);
  CHECK(zero.max_u_residual() < 1e-10);
  CHECK(zero.chaining_ok);

  const auto inf = lower_class_sequences(p, xi, 2 * p.h() + 1, Direction::Infinity, 2000);
  CHECK(inf.monotone);
  CHECK(inf.limit_reached);
  CHECK(inf.max_u_residual() < 1e-10);

  const auto nec = lower_class_sequences(p, xi, 2 * p.h() + 1, Direction::Infinity, 200, SequenceVariant::Necessity);
  CHECK(nec.tmn_ok);
  CHECK(nec.monotone);
  CHECK(nec.to_json()["variant"] == "necessity");

  CHECK_THROWS_AS(lower_class_sequences(p, xi, 2 * p.h(), Direction::Zero, 10), InvalidArgument);
  CHECK_THROWS_AS(lower_class_sequences(p, xi, 3.0, Direction::Zero, 10, SequenceVariant::Necessity),
                  InvalidArgument);
}

TEST_CASE("dyadic index") {
  CHECK(k_index_from_ratio(5.0, 1.0).k == 2);
  CHECK(k_index_from_ratio(1.0, 1.0).k == 0);
  const auto neg = k_index_from_ratio(0.5, 1.0);
  CHECK(neg.k == -1);
  CHECK(neg.negative_ratio);
  CHECK(k_index_from_ratio(8.0, 2.0).n_k == doctest::Approx(std::exp(2.0 / 2.0)));
}
