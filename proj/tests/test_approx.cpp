#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "psd/approx.hpp"
#include "psd/numeric.hpp"

using namespace psd;

namespace {

// Classical recurrence on hand-computed partial quotients.
std::vector<Rational> from_quotients(const std::vector<std::int64_t>& a) {
  std::vector<Rational> out;
  std::int64_t p0 = 1, q0 = 0, p1 = a[0], q1 = 1;
  out.push_back({p1, q1});
  for (std::size_t i = 1; i < a.size(); ++i) {
    const std::int64_t p2 = a[i] * p1 + p0, q2 = a[i] * q1 + q0;
    out.push_back({p2, q2});
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return out;
}

// min over q <= Q of |q x - round(q x)|, in long double.
long double best_defect(double x, std::int64_t Q) {
  long double best = 1e300L;
  for (std::int64_t q = 1; q <= Q; ++q) {
    const long double v = static_cast<long double>(q) * x;
    best = std::min(best, std::abs(v - std::nearbyint(v)));
  }
  return best;
}

RunParameters sqrt2_params(std::uint64_t q0, double eps) {
  return derive_parameters(q0, GammaExponent(0.98), 0.5, eps);
}

const Coefficients kSqrt2{std::sqrt(2.0), 1.0, -2.0, 0.0};

}  // namespace

TEST_CASE("make_rational normalizes") {
  CHECK(make_rational(6, -4) == Rational{-3, 2});
  CHECK(make_rational(0, 7) == Rational{0, 1});
  CHECK_THROWS_AS(make_rational(1, 0), std::invalid_argument);
}

TEST_CASE("continued fraction examples") {
  const ConvergentSeq s = continued_fraction(std::sqrt(2.0), 6);
  CHECK(s.partial_quotients == std::vector<std::int64_t>{1, 2, 2, 2, 2, 2});
  CHECK(s.convergents == from_quotients({1, 2, 2, 2, 2, 2}));
  CHECK(s.convergents[5] == Rational{99, 70});

  const ConvergentSeq h = continued_fraction(0.5, 10);
  CHECK(h.rational_at_precision);
  CHECK(h.convergents.back() == Rational{1, 2});

  const ConvergentSeq pi = continued_fraction(kPi, 4);
  CHECK(pi.convergents == std::vector<Rational>{{3, 1}, {22, 7}, {333, 106}, {355, 113}});
}

TEST_CASE("convergent law on random reals") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const double x = u(rng);
    const ConvergentSeq s = continued_fraction(x, 40);
    REQUIRE_FALSE(s.convergents.empty());
    CHECK((s.rational_at_precision || s.precision_exhausted || s.convergents.size() == 40));
    CHECK(s.convergents == from_quotients(s.partial_quotients));
    for (std::size_t j = 0; j < s.convergents.size(); ++j) {
      const Rational& r = s.convergents[j];
      CHECK(std::gcd(std::abs(r.a), r.q) == 1);
      // |x - a/q| < 1/q^2, i.e. |q x - a| < 1/q.
      CHECK(approximation_defect(x, r) * r.q < 1.0);
      if (j + 1 < s.convergents.size()) {
        if (j >= 1) CHECK(s.convergents[j + 1].q > r.q);
        const auto next = static_cast<long double>(s.convergents[j + 1].q);
        if (!s.rational_at_precision || j + 2 < s.convergents.size()) {
          CHECK(approximation_defect(x, r) * next <= 1.0 + 1e-6);
        }
      }
    }
  }
}

TEST_CASE("dirichlet examples") {
  CHECK(dirichlet_approx(std::sqrt(2.0), 25) == Rational{17, 12});
  CHECK(std::abs(std::sqrt(2.0) - 17.0 / 12.0) < 1.0 / (12.0 * 25.0));
  CHECK(dirichlet_approx(0.25, 10) == Rational{1, 4});
  for (double x : {0.3, -2.7, 5.5001, 1e6 + 0.49}) {
    const Rational r = dirichlet_approx(x, 1);
    CHECK(r.q == 1);
    CHECK(std::abs(x - static_cast<double>(r.a)) <= 0.5);
  }
}

TEST_CASE("dirichlet against exhaustive search") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::uniform_int_distribution<std::int64_t> uq(1, 500);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    const std::int64_t Q = uq(rng);
    const Rational r = dirichlet_approx(x, Q);
    CHECK(r.q >= 1);
    CHECK(r.q <= Q);
    CHECK(approximation_defect(x, r) < 1.0 / static_cast<double>(Q));
    CHECK(static_cast<long double>(approximation_defect(x, r)) <=
          best_defect(x, Q) * (1.0L + 1e-9L) + 1e-15L);
  }
}

TEST_CASE("classify_denominator") {
  const double X = 8192.0;
  CHECK(classify_denominator(12, X) == DenominatorClass::estimable);
  CHECK(classify_denominator(2, X) == DenominatorClass::estimable);
  CHECK(classify_denominator(4096, X) == DenominatorClass::estimable);
  CHECK(classify_denominator(1, X) == DenominatorClass::below);
  CHECK(classify_denominator(4097, X) == DenominatorClass::above);
  CHECK(classify_denominator(1000000, X) == DenominatorClass::above);
}

TEST_CASE("anchor fraction") {
  CHECK(anchor_fraction(kSqrt2, 29) == Rational{41, 29});
  CHECK(anchor_fraction(kSqrt2, 70) == Rational{99, 70});
  CHECK(anchor_fraction(kSqrt2, 169) == Rational{239, 169});
  CHECK_THROWS_AS(anchor_fraction(kSqrt2, 31), HypothesisError);
}

TEST_CASE("dichotomy along t grids") {
  for (std::uint64_t q0 : {29u, 70u, 169u}) {
    const RunParameters P = sqrt2_params(q0, 1.0);
    const Rational a0 = anchor_fraction(kSqrt2, static_cast<std::int64_t>(q0));
    const auto reps = dichotomy_scan(kSqrt2, a0, P, P.Delta(), P.H_eff(), 500);
    REQUIRE(reps.size() == 500);
    const double lo = std::pow(P.X(), 1.0 / 13.0);
    for (const auto& r : reps) {
      CHECK(r.outcome != DichotomyCase::unexplained);
      CHECK(r.r1.q <= static_cast<std::int64_t>(q0 * q0));
      CHECK(r.r2.q <= static_cast<std::int64_t>(q0 * q0));
      CHECK(r.a1_bound > 0.0);
      if (r.outcome == DichotomyCase::estimable) {
        CHECK((r.r1.q >= lo || r.r2.q >= lo));
      }
      // lambda_i Delta < 1/q0^2 fails here, so a_i = 0 cannot occur.
      CHECK_FALSE(r.zero_possible1);
      CHECK(r.r1.a != 0);
      CHECK(r.r2.a != 0);
    }
  }
}

TEST_CASE("a small denominator for lambda1 t escalates to lambda2 t") {
  const RunParameters P = sqrt2_params(29, 1.0);
  const Rational a0 = anchor_fraction(kSqrt2, 29);
  // lambda1 t = 2, denominator 1 < X^{1/13}.
  const double t = 2.0 / kSqrt2.lambda1;
  const DichotomyReport r = dichotomy_probe(kSqrt2, a0, P, t);
  CHECK(r.r1 == Rational{2, 1});
  CHECK(r.class1 == DenominatorClass::below);
  CHECK(r.r2 == dirichlet_approx(t, 29 * 29));
  if (r.class2 != DenominatorClass::below) {
    CHECK(r.outcome == DichotomyCase::estimable);
  } else {
    CHECK(r.outcome != DichotomyCase::unexplained);
  }
}

TEST_CASE("band check") {
  const RunParameters P = sqrt2_params(29, 1.0);
  const Rational a0 = anchor_fraction(kSqrt2, 29);
  CHECK_THROWS_AS(dichotomy_probe(kSqrt2, a0, P, 0.5 * P.Delta()), std::invalid_argument);
  CHECK_THROWS_AS(dichotomy_probe(kSqrt2, a0, P, 2.0 * P.H_eff()), std::invalid_argument);
  CHECK_NOTHROW(dichotomy_probe(kSqrt2, a0, P, -P.Delta()));
}

TEST_CASE("both-small branch is resolved by the inequality chain") {
  // q0 = 5 (anchor 7/5), X = 5^{13/6}, window starts at X^{1/13} = 1.31.
  // At t = 12: lambda2 t = 12 and lambda1 t = 16.97, both approximated
  // with denominator 1 under Q = 25.
  const RunParameters P = sqrt2_params(5, 0.5);
  const Rational a0 = anchor_fraction(kSqrt2, 5);
  CHECK(a0 == Rational{7, 5});
  const DichotomyReport r = dichotomy_probe(kSqrt2, a0, P, 12.0);
  CHECK(r.r1 == Rational{17, 1});
  CHECK(r.r2 == Rational{12, 1});
  CHECK(r.class1 == DenominatorClass::below);
  CHECK(r.class2 == DenominatorClass::below);
  const bool chain = r.outcome == DichotomyCase::both_small_premise_fails ||
                     r.outcome == DichotomyCase::both_small_contradiction;
  CHECK(chain);
  CHECK_FALSE(r.explanation.empty());
  // |a2| q1 = 12 against q0 / log X = 5 / 3.49.
  CHECK(r.a2q1 == 12.0);
  CHECK(r.a2q1_threshold == doctest::Approx(5.0 / std::log(P.X())));
  CHECK(r.outcome == DichotomyCase::both_small_premise_fails);
  MESSAGE(r.explanation);

  // Over a full grid at this tiny X every report still carries a case.
  for (const auto& s : dichotomy_scan(kSqrt2, a0, P, P.Delta(), P.H_eff(), 2000)) {
    CHECK(s.outcome != DichotomyCase::unexplained);
    if (s.outcome == DichotomyCase::both_small_premise_fails) {
      CHECK_FALSE(s.a2q1_holds);
    }
    if (s.outcome == DichotomyCase::both_small_contradiction) {
      CHECK(s.a2q1_holds);
      CHECK(s.distance > s.lower_threshold);
    }
  }
}
