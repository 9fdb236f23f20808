#include <cmath>
#include <random>

#include "doctest.h"
#include "psd/numeric.hpp"
#include "psd/params.hpp"

using namespace psd;

namespace {

// Scales straight from the formulas, in long double.
struct RefScales {
  long double X, Delta, eps, H;
};

RefScales reference(long double X, long double g) {
  const long double L = std::log(X);
  const long double eps = std::pow(X, (37.0L - 38.0L * g) / 26.0L) * std::pow(L, 10.0L);
  return {X, std::pow(X, -12.0L / 13.0L) * L, eps, L * L / eps};
}

bool close(double a, long double b, double rel) {
  return std::abs(static_cast<long double>(a) - b) <= rel * std::abs(b);
}

}  // namespace

TEST_CASE("gamma exponent domain") {
  CHECK_THROWS_AS(GammaExponent(1.0), ConfigError);
  CHECK_THROWS_AS(GammaExponent(0.0), ConfigError);
  CHECK_THROWS_AS(GammaExponent(std::nan("")), ConfigError);
  CHECK(GammaExponent(0.98).theorem_range());
  CHECK_FALSE(GammaExponent(0.9).theorem_range());
  CHECK_FALSE(GammaExponent(37.0 / 38.0).theorem_range());
}

TEST_CASE("q0 = 29 at gamma 0.98") {
  const RunParameters p = derive_parameters(29, GammaExponent(0.98), 0.5, 0.5);
  const RefScales r = reference(std::exp(13.0L / 6.0L * std::log(29.0L)), 0.98L);
  CHECK(p.X() == doctest::Approx(1474.0).epsilon(1e-3));
  CHECK(p.Delta() == doctest::Approx(8.71e-3).epsilon(5e-3));
  CHECK(close(p.X(), r.X, 1e-12));
  CHECK(close(p.Delta(), r.Delta, 1e-12));
  CHECK(close(p.epsilon(), r.eps, 1e-12));
  CHECK(close(p.H(), r.H, 1e-12));
  CHECK(p.epsilon_eff() == 0.5);
  CHECK(p.H_eff() == doctest::Approx(std::pow(std::log(p.X()), 2) / 0.5).epsilon(1e-14));
  CHECK(p.kernel_order() == 7);
}

TEST_CASE("stored fields reproduce the formulas on a q0 grid") {
  for (double g : {0.974, 0.98, 0.99, 0.999}) {
    for (std::uint64_t q0 : {3u, 5u, 12u, 29u, 70u, 169u, 408u, 985u, 2378u}) {
      const RunParameters p = derive_parameters(q0, GammaExponent(g), 0.5, 1e-3);
      const RefScales r = reference(std::exp(13.0L / 6.0L * std::log(static_cast<long double>(q0))),
                                    static_cast<long double>(g));
      CHECK(close(p.X(), r.X, 1e-12));
      CHECK(close(p.Delta(), r.Delta, 1e-12));
      CHECK(close(p.epsilon(), r.eps, 1e-12));
      CHECK(close(p.H(), r.H, 1e-12));
      CHECK(p.Delta() < p.H_eff());
    }
  }
}

TEST_CASE("q0 = 2 at gamma 0.99") {
  const double X = std::exp(13.0 / 6.0 * std::log(2.0));
  const Scales s = scales_for_x(x_from_q0(2), GammaExponent(0.99));
  CHECK(s.X == doctest::Approx(X).epsilon(1e-15));
  CHECK(s.Delta == doctest::Approx(std::pow(X, -12.0 / 13.0) * std::log(X)).epsilon(1e-14));
  // Delta >= H at the theorem-scale epsilon: rejected.
  CHECK(s.Delta >= s.H);
  CHECK_THROWS_AS(derive_parameters(2, GammaExponent(0.99), 0.5), HypothesisError);
  const RunParameters p = derive_parameters(2, GammaExponent(0.99), 0.5, 0.01);
  CHECK(p.Delta() < p.H_eff());
  CHECK_THROWS_AS(derive_parameters(2, GammaExponent(0.99), 0.5, 1e6), HypothesisError);
}

TEST_CASE("derive_parameters rejects bad input") {
  CHECK_THROWS_AS(derive_parameters(1, GammaExponent(0.98), 0.5), ConfigError);
  CHECK_THROWS_AS(derive_parameters(29, GammaExponent(0.98), 0.0), ConfigError);
  CHECK_THROWS_AS(derive_parameters(29, GammaExponent(0.98), 1.0), ConfigError);
  CHECK_THROWS_AS(derive_parameters(29, GammaExponent(0.98), 0.5, -1.0), ConfigError);
}

TEST_CASE("monotonicity in q0") {
  // X increases and Delta decreases. Epsilon follows the sign of
  // d log(eps)/d log X = (37 - 38 gamma)/26 + 10/log X, which is positive at
  // every reachable X for gamma close to 1; H moves the other way.
  for (double g : {0.98, 0.99}) {
    const GammaExponent ge(g);
    Scales prev = scales_for_x(x_from_q0(3), ge);
    for (std::uint64_t q0 = 4; q0 < 5000; q0 += 7) {
      const Scales p = scales_for_x(x_from_q0(q0), ge);
      CHECK(p.X > prev.X);
      CHECK(p.Delta < prev.Delta);
      const double slope = (37.0 - 38.0 * g) / 26.0 + 10.0 / std::log(p.X);
      REQUIRE(slope > 0.0);
      CHECK(p.epsilon > prev.epsilon);
      CHECK(p.H < prev.H);
      prev = p;
    }
  }
  // The slope turns negative only once log X exceeds 260 / (38 gamma - 37),
  // far beyond double range at gamma = 0.98.
  CHECK(260.0 / (38.0 * 0.98 - 37.0) > 709.0);
}

TEST_CASE("validate_coefficients examples") {
  const double r2 = std::sqrt(2.0);
  const CoefficientReport a = validate_coefficients({1.0, r2, -2.0, 0.0});
  CHECK(a.pass);
  CHECK(a.already_canonical);
  CHECK(a.ratio_looks_irrational);

  const CoefficientReport b = validate_coefficients({1.0, 2.0, 3.0, 0.0});
  CHECK_FALSE(b.pass);
  CHECK_FALSE(b.mixed_signs);
  REQUIRE_FALSE(b.failures.empty());
  CHECK(b.failures.front().find("same sign") != std::string::npos);

  const CoefficientReport c = validate_coefficients({-1.0, -r2, 2.0, 0.5});
  CHECK(c.pass);
  CHECK(c.negated);
  CHECK(c.canonical.lambda1 == 1.0);
  CHECK(c.canonical.lambda2 == r2);
  CHECK(c.canonical.lambda3 == -2.0);
  CHECK(c.canonical.eta == -0.5);

  CHECK_FALSE(validate_coefficients({0.0, 1.0, -1.0, 0.0}).pass);
  Coefficients no_assert{1.0, r2, -2.0, 0.0};
  no_assert.irrationality_asserted = false;
  CHECK_FALSE(validate_coefficients(no_assert).pass);
}

TEST_CASE("canonical form: two positive, one negative, input untouched") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 500; ++i) {
    const Coefficients c{u(rng), u(rng), u(rng), u(rng)};
    const Coefficients copy = c;
    const CoefficientReport r = validate_coefficients(c);
    CHECK(c.lambda1 == copy.lambda1);
    if (!r.mixed_signs) continue;
    CHECK(r.canonical.lambda1 > 0.0);
    CHECK(r.canonical.lambda2 > 0.0);
    CHECK(r.canonical.lambda3 < 0.0);
    // Same multiset of |lambda|, and the form changes at most by a global sign.
    const auto orig = c.lambdas();
    const double s = r.negated ? -1.0 : 1.0;
    for (int j = 0; j < 3; ++j) {
      CHECK(r.canonical.lambdas()[j] == s * orig[r.permutation[j]]);
    }
    CHECK(r.canonical.eta == s * c.eta);
  }
}

TEST_CASE("validation is invariant under negation") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    const Coefficients c{u(rng), u(rng), u(rng), u(rng)};
    const Coefficients n{-c.lambda1, -c.lambda2, -c.lambda3, -c.eta};
    const CoefficientReport a = validate_coefficients(c);
    const CoefficientReport b = validate_coefficients(n);
    CHECK(a.pass == b.pass);
    CHECK(a.failures == b.failures);
    if (a.mixed_signs) {
      CHECK(a.canonical.lambdas() == b.canonical.lambdas());
      CHECK(a.canonical.eta == b.canonical.eta);
    }
  }
}

TEST_CASE("feasible_box_check") {
  CHECK(feasible_box_check({1.0, 1.0, -2.0, 0.0}, 0.5, 100.0, 1.0));
  CHECK_FALSE(feasible_box_check({1.0, 1.0, -1.0, 10.0}, 0.5, 1.0, 0.5));
  // Interval oracle: the form ranges over an open-closed box, so it is
  // feasible iff (lo_end, hi_end) meets (-eps, eps).
  const double r2 = std::sqrt(2.0);
  for (double l0 : {0.5, 0.8, 0.9, 0.95}) {
    const double X = 1000.0;
    const double lo = (1.0 + r2) * l0 * X - 2.0 * X;
    const double hi = (1.0 + r2) * X - 2.0 * l0 * X;
    const bool expect = lo < 1.0 && hi > -1.0;
    CHECK(feasible_box_check({1.0, r2, -2.0, 0.0}, l0, X, 1.0) == expect);
  }
  // Shifting eta beyond the range makes the box infeasible.
  CHECK_FALSE(feasible_box_check({1.0, r2, -2.0, 1e4}, 0.5, 1000.0, 1.0));
}
