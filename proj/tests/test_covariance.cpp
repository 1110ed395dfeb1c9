#include <doctest.h>

#include <array>
#include <cmath>
#include <thread>
#include <vector>

#include "gfbm/covariance.hpp"
#include "gfbm/errors.hpp"
#include "oracles.hpp"

using namespace gfbm;

namespace {
const std::array<double, 5> kLattice{0.2, 0.4, 0.6, 0.8, 1.0};
}

TEST_CASE("Brownian motion covariance is min(s, t)") {
  const CovarianceOracle bm(derive_indices(0.0, 0.0, true));
  CHECK(bm(ProcessTag::X, 0.3, 0.7) == doctest::Approx(0.3).epsilon(1e-12));
  for (double s : kLattice)
    for (double t : kLattice) {
      CHECK(std::abs(bm(ProcessTag::X, s, t) - std::min(s, t)) <= 1e-10);
      CHECK(bm(ProcessTag::Y, s, t) == 0.0);
    }
  CHECK(increment_variance(bm, ProcessTag::X, 0.25, 1.0) == doctest::Approx(0.75).epsilon(1e-10));
}

TEST_CASE("Z diagonal matches the Beta identity") {
  for (double a : {0.1, 0.2, 0.3})
    for (double g : {0.05, 0.1, 0.2}) {
      const auto p = derive_indices(a, g);
      const CovarianceOracle o(p);
      const double b = oracle::beta_fn(2 * a + 1, 1 - 2 * g);
      for (double t : {0.5, 1.0, 2.0})
        CHECK(o(ProcessTag::Z, t, t) == doctest::Approx(std::pow(t, 2 * p.h()) * b).epsilon(1e-10));
    }
  // the worked example: B(1.4, 0.8) ~ 0.9375
  CHECK(oracle::beta_fn(1.4, 0.8) == doctest::Approx(0.9375).epsilon(2e-3));
}

TEST_CASE("self-similarity of all three covariances") {
  const auto p = derive_indices(0.2, 0.1);
  const CovarianceOracle o(p);
  for (auto tag : {ProcessTag::X, ProcessTag::Y, ProcessTag::Z})
    for (double c : {0.5, 2.0, 10.0})
      for (double s : {0.2, 0.6})
        for (double t : {0.4, 1.0}) {
          const double base = o(tag, s, t);
          CHECK(o(tag, c * s, c * t) == doctest::Approx(std::pow(c, 2 * p.h()) * base).epsilon(1e-9));
        }
}

TEST_CASE("FBM normalisation and cross-check") {
  CHECK(fbm_normalization(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  for (double h : {0.3, 0.6, 0.75, 0.9}) CHECK(fbm_normalization(h) == doctest::Approx(oracle::fbm_c(h)).epsilon(1e-10));
  CHECK(fbm_cov(0.5, 0.3, 0.8) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(fbm_cov(0.7, 0.0, 0.8) == 0.0);

  const CovarianceOracle o(derive_indices(0.25, 0.0, true));
  for (double s : kLattice)
    for (double t : kLattice) CHECK(std::abs(o(ProcessTag::X, s, t) - fbm_cov(0.75, s, t)) <= 1e-9);
}

TEST_CASE("covariance at extreme time ratios") {
  // geometric grids put about 47 decades between their first and last points
  const auto p = derive_indices(0.2, 0.1);
  for (double T : {1e20, 1e47}) {
    const double y = cov_y_integral(p, 1.0, T);
    const double z = cov_z_integral(p, 1.0, T);
    CHECK(std::isfinite(y));
    CHECK(y > 0.0);
    CHECK(z > 0.0);
  }
  // Z at T >> 1 behaves like T^alpha int_0^1 (1-u)^alpha u^{-2 gamma} du
  const double lead = std::pow(1e47, 0.2) * oracle::beta_fn(1.2, 0.8);
  CHECK(cov_z_integral(p, 1.0, 1e47) == doctest::Approx(lead).epsilon(1e-9));
}

TEST_CASE("X splits into Y plus Z and vanishes at the origin") {
  const CovarianceOracle o(derive_indices(-0.2, 0.15));
  for (double s : {0.1, 0.5})
    for (double t : {0.3, 2.0})
      CHECK(o(ProcessTag::X, s, t) ==
            doctest::Approx(o(ProcessTag::Y, s, t) + o(ProcessTag::Z, s, t)).epsilon(1e-14));
  CHECK(o(ProcessTag::X, 0.0, 1.0) == 0.0);
  CHECK_THROWS_AS(increment_variance(o, ProcessTag::X, 0.5, 0.5), DegenerateInterval);
}

TEST_CASE("oracle cache is shared between copies and threads") {
  const CovarianceOracle o(derive_indices(0.2, 0.1));
  const CovarianceOracle copy = o;
  const double v = o(ProcessTag::X, 0.3, 0.9);
  CHECK(copy.cache_size() >= 1);
  std::vector<std::thread> pool;
  std::vector<double> seen(4);
  for (int i = 0; i < 4; ++i) pool.emplace_back([&, i] { seen[i] = copy(ProcessTag::X, 0.9, 0.3); });
  for (auto& th : pool) th.join();
  for (double x : seen) CHECK(x == v);
}

TEST_CASE("band norms") {
  const CovarianceOracle bm(derive_indices(0.0, 0.0, true));
  for (auto [v, s] : {std::pair{0.5, 0.3}, {0.5, 0.9}, {1.0, 2.5}}) {
    const auto n = band_norms(bm, v, s);
    CHECK(n.inner == doctest::Approx(std::min(s, v)).epsilon(1e-9));
    CHECK(std::abs(n.outer - std::max(s - v, 0.0)) <= 1e-9);
  }
  const CovarianceOracle o(derive_indices(0.2, 0.1));
  const auto n = band_norms(o, 0.7, 0.4);
  CHECK(n.inner + n.outer == doctest::Approx(o(ProcessTag::X, 0.4, 0.4)).epsilon(1e-8));

  const std::vector<double> vs{0.5, 1.0, 2.0};
  CHECK(fit_band_outer_bound(o, vs).consistent());
  const CovarianceOracle small_beta(derive_indices(-0.2, 0.1));
  CHECK(fit_band_inner_bound(small_beta, vs).consistent());
}

TEST_CASE("increment bounds have positive fitted constants") {
  const CovarianceOracle o(derive_indices(0.2, 0.1));
  for (auto tag : {ProcessTag::X, ProcessTag::Z}) {
    const auto r = fit_increment_bounds(o, tag);
    CHECK(r.consistent());
    CHECK(r.fitted_c_low > 0.0);
  }
  PairSweep near;
  near.max_ratio = 2.0;
  const auto y = fit_increment_bounds(o, ProcessTag::Y, near);
  CHECK(y.consistent());
  CHECK(y.fitted_c_low > 0.0);
}

TEST_CASE("Lamperti autocovariance") {
  const CovarianceOracle bm(derive_indices(0.0, 0.0, true));
  CHECK(lamperti_autocov(bm, 0.0) == doctest::Approx(1.0));
  CHECK(lamperti_autocov(bm, 2.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
  const std::vector<double> ts{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(fit_lamperti_decay(bm, ts).slope == doctest::Approx(-0.5).epsilon(1e-8));

  const auto p = derive_indices(0.2, 0.1);
  const CovarianceOracle o(p);
  CHECK(lamperti_autocov(o, 0.0) == doctest::Approx(o(ProcessTag::X, 1.0, 1.0)));
  CHECK(-fit_lamperti_decay(o, ts).slope >= 0.8 * p.kappa5());
}
