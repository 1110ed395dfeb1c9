#include <doctest.h>

#include <cmath>

#include "gfbm/core.hpp"
#include "gfbm/errors.hpp"

using namespace gfbm;

TEST_CASE("derived indices for the running example") {
  const auto p = derive_indices(0.2, 0.1);
  CHECK(p.h() == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p.beta() == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(p.kappa5() == doctest::Approx(0.4).epsilon(1e-15));
  CHECK_FALSE(p.is_brownian());
}

TEST_CASE("Brownian limit needs the fbm flag") {
  const auto bm = derive_indices(0.0, 0.0, true);
  CHECK(bm.h() == 0.5);
  CHECK(bm.beta() == 0.5);
  CHECK(bm.is_brownian());
  CHECK_THROWS_AS(derive_indices(0.0, 0.0), RangeError);
}

TEST_CASE("range errors name the offending parameter") {
  try {
    derive_indices(0.2, 0.6);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.parameter() == "gamma");
  }
  try {
    derive_indices(0.55, 0.1);
    FAIL("expected RangeError");
  } catch (const RangeError& e) {
    CHECK(e.parameter() == "alpha");
  }
  CHECK_THROWS_AS(derive_indices(-0.45, 0.1), RangeError);
  CHECK_THROWS_AS(derive_indices(0.7, 0.1), RangeError);
  CHECK_THROWS_AS(derive_indices(NAN, 0.1), RangeError);
  CHECK_NOTHROW(derive_indices(-0.25, 0.2));
}

TEST_CASE("kernel values") {
  const auto bm = derive_indices(0.0, 0.0, true);
  CHECK(kernel_eval(bm, 1.0, 0.5) == 1.0);
  CHECK(kernel_eval(bm, 1.0, -1.0) == 0.0);
  CHECK(kernel_eval(bm, 1.0, 2.0) == 0.0);

  const auto p = derive_indices(0.2, 0.1);
  for (double x : {-3.0, -1.0, -0.01}) CHECK(kernel_eval(p, 0.0, x) == 0.0);
  CHECK(kernel_eval(p, 1.0, 0.5) == doctest::Approx(std::pow(0.5, 0.2) * std::pow(0.5, -0.1)));
  CHECK(kernel_eval(p, 1.0, -1.0) == doctest::Approx(std::pow(2.0, 0.2) - 1.0));
  CHECK_THROWS_AS(kernel_eval(p, 1.0, 0.0), SingularPoint);
}

TEST_CASE("power difference keeps precision far from the origin") {
  // (1 + x)^a - x^a ~ a x^{a-1} for large x
  const double a = 0.3, x = 1e12;
  const double approx = a * std::pow(x, a - 1) * (1 + (a - 1) / (2 * x));
  CHECK(power_difference(a, 1.0, x) == doctest::Approx(approx).epsilon(1e-12));
  CHECK(power_difference(a, 2.0, 3.0) == doctest::Approx(std::pow(5.0, a) - std::pow(3.0, a)).epsilon(1e-14));
  CHECK(power_difference(0.0, 2.0, 3.0) == 0.0);
  // s / x overflows here
  CHECK(power_difference(0.2, 1e47, 1e-300) == doctest::Approx(std::pow(1e47, 0.2)).epsilon(1e-14));
  CHECK(std::isfinite(power_difference(-0.3, 1e10, 1e-300)));
}

TEST_CASE("process tags round-trip") {
  for (auto t : {ProcessTag::X, ProcessTag::Y, ProcessTag::Z}) CHECK(process_tag_from_string(to_string(t)) == t);
  CHECK_THROWS_AS(process_tag_from_string("W"), InvalidArgument);
}
