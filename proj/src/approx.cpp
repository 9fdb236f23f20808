#include "psd/approx.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "psd/numeric.hpp"

namespace psd {

namespace {

// Convergent numerators/denominators must stay exactly representable as
// doubles for the FMA defect check.
constexpr std::int64_t kMaxExact = std::int64_t{1} << 53;

bool within_convergent_law(double x, const Rational& r) {
  const double d = approximation_defect(x, r);
  return d * static_cast<double>(r.q) < 1.0;
}

}  // namespace

Rational make_rational(std::int64_t a, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("zero denominator");
  if (q < 0) {
    a = -a;
    q = -q;
  }
  const std::int64_t g = std::gcd(a < 0 ? -a : a, q);
  return {a / g, q / g};
}

double approximation_defect(double x, const Rational& r) {
  return std::abs(std::fma(static_cast<double>(r.q), x, -static_cast<double>(r.a)));
}

ConvergentSeq continued_fraction(double x, int max_terms) {
  if (!std::isfinite(x)) throw std::invalid_argument("continued_fraction: x not finite");
  if (max_terms < 1) throw std::invalid_argument("continued_fraction: max_terms < 1");

  ConvergentSeq cf;
  cf.x = x;
  // x is the dyadic rational num / den; Euclid on it is exact, so the
  // quotients never drift the way a floating remainder does.
  int e = 0;
  const double m = std::frexp(x, &e);
  if (e < -70) {
    // |x| < 2^-70: the first quotient after 0 exceeds kMaxExact anyway.
    cf.partial_quotients.push_back(x < 0.0 ? -1 : 0);
    cf.convergents.push_back({x < 0.0 ? -1 : 0, 1});
    cf.precision_exhausted = true;
    return cf;
  }
  const int shift = std::max(0, 53 - e);
  __int128 num = static_cast<__int128>(std::ldexp(m, 53)) * (shift == 0 ? (__int128{1} << (e - 53)) : 1);
  __int128 den = __int128{1} << shift;
  if (shift == 0 && e > 53 + 60) {
    cf.precision_exhausted = true;
    return cf;
  }

  __int128 p_prev = 1, p_prev2 = 0;
  __int128 q_prev = 0, q_prev2 = 1;
  for (int i = 0; i < max_terms; ++i) {
    __int128 term = num / den;
    __int128 rem = num % den;
    if (rem < 0) {
      term -= 1;
      rem += den;
    }
    if (term > kMaxExact || term < -kMaxExact) {
      cf.precision_exhausted = true;
      break;
    }
    const __int128 p = term * p_prev + p_prev2;
    const __int128 q = term * q_prev + q_prev2;
    if (q > kMaxExact || p > kMaxExact || p < -kMaxExact) {
      cf.precision_exhausted = true;
      break;
    }
    const Rational conv{static_cast<std::int64_t>(p), static_cast<std::int64_t>(q)};
    if (!within_convergent_law(x, conv)) {
      cf.precision_exhausted = true;
      break;
    }
    cf.partial_quotients.push_back(static_cast<std::int64_t>(term));
    cf.convergents.push_back(conv);
    p_prev2 = p_prev;
    p_prev = p;
    q_prev2 = q_prev;
    q_prev = q;

    if (static_cast<long double>(rem) < 1e-12L * static_cast<long double>(den)) {
      cf.rational_at_precision = true;
      break;
    }
    num = den;
    den = rem;
  }
  return cf;
}

Rational dirichlet_approx(double x, std::int64_t Q) {
  if (Q < 1) throw std::invalid_argument("dirichlet_approx: Q < 1");
  const ConvergentSeq cf = continued_fraction(x, 200);
  const auto feasible = [&](const Rational& r) {
    return r.q <= Q && approximation_defect(x, r) * static_cast<double>(Q) < 1.0;
  };

  std::size_t n = 0;
  for (std::size_t i = 0; i < cf.convergents.size(); ++i) {
    if (cf.convergents[i].q <= Q) n = i;
  }
  const Rational best = cf.convergents[n];
  if (feasible(best)) return best;

  // Intermediate fractions (p_{n-1} + j p_n)/(q_{n-1} + j q_n), q <= Q.
  if (n > 0) {
    const Rational lo = cf.convergents[n - 1];
    Rational pick{};
    double pick_defect = INFINITY;
    for (std::int64_t j = 1; lo.q + j * best.q <= Q; ++j) {
      const Rational cand = make_rational(lo.a + j * best.a, lo.q + j * best.q);
      const double d = approximation_defect(x, cand);
      if (feasible(cand) && d < pick_defect) {
        pick = cand;
        pick_defect = d;
      }
    }
    if (pick_defect < INFINITY) return pick;
  }
  throw NumericError("dirichlet_approx: no verified approximation for x = " +
                     format_double(x) + ", Q = " + std::to_string(Q));
}

const char* to_string(DenominatorClass c) {
  switch (c) {
    case DenominatorClass::below: return "below";
    case DenominatorClass::estimable: return "estimable";
    case DenominatorClass::above: return "above";
  }
  return "?";
}

DenominatorClass classify_denominator(std::int64_t q, double X) {
  if (!(X > 1.0)) throw std::invalid_argument("classify_denominator: X <= 1");
  // Slack absorbs the rounding of X^{12/13} when X = q0^{13/6} exactly.
  constexpr double kSlack = 1e-12;
  const double L = std::log(X);
  const double lower = std::exp(L / 13.0);
  const double upper = std::exp(12.0 * L / 13.0);
  const auto qd = static_cast<double>(q);
  if (qd < lower * (1.0 - kSlack)) return DenominatorClass::below;
  if (qd > upper * (1.0 + kSlack)) return DenominatorClass::above;
  return DenominatorClass::estimable;
}

const char* to_string(DichotomyCase c) {
  switch (c) {
    case DichotomyCase::estimable: return "estimable";
    case DichotomyCase::zero_numerator: return "zero_numerator";
    case DichotomyCase::both_small_premise_fails: return "both_small_premise_fails";
    case DichotomyCase::both_small_contradiction: return "both_small_contradiction";
    case DichotomyCase::unexplained: return "unexplained";
  }
  return "?";
}

DichotomyReport dichotomy_probe(const Coefficients& c, const Rational& a0q0,
                                const RunParameters& params, double t) {
  const double at = std::abs(t);
  if (!(at >= params.Delta() && at <= params.H_eff())) {
    throw std::invalid_argument("dichotomy_probe: |t| = " + format_double(at) +
                                " outside [Delta, H] = [" +
                                format_double(params.Delta()) + ", " +
                                format_double(params.H_eff()) + "]");
  }
  if (!(c.lambda1 > 0.0 && c.lambda2 > 0.0)) {
    throw std::invalid_argument("dichotomy_probe: coefficients not canonical");
  }

  const std::int64_t q0 = a0q0.q;
  const std::int64_t Q = q0 * q0;
  const double q0sq = static_cast<double>(Q);
  const double X = params.X();
  const double L = std::log(X);

  DichotomyReport rep;
  rep.t = t;
  rep.r1 = dirichlet_approx(c.lambda1 * t, Q);
  rep.r2 = dirichlet_approx(c.lambda2 * t, Q);
  rep.class1 = classify_denominator(rep.r1.q, X);
  rep.class2 = classify_denominator(rep.r2.q, X);
  rep.a1_bound = 1.0 / q0sq + static_cast<double>(rep.r1.q) * c.lambda1 * at;
  rep.a2_bound = 1.0 / q0sq + static_cast<double>(rep.r2.q) * c.lambda2 * at;
  rep.zero_possible1 = c.lambda1 * params.Delta() < 1.0 / q0sq;
  rep.zero_possible2 = c.lambda2 * params.Delta() < 1.0 / q0sq;
  rep.a2q1_threshold = static_cast<double>(q0) / L;
  rep.lower_threshold = L / q0sq;

  if (rep.r1.a == 0 || rep.r2.a == 0) {
    const bool possible = (rep.r1.a == 0 && rep.zero_possible1) ||
                          (rep.r2.a == 0 && rep.zero_possible2);
    rep.outcome = possible ? DichotomyCase::zero_numerator : DichotomyCase::unexplained;
    rep.explanation = possible ? "a_i = 0 with lambda_i Delta < 1/q0^2 (lambda_i log X < 1)"
                               : "a_i = 0 although lambda_i Delta >= 1/q0^2";
    return rep;
  }

  if (rep.class1 != DenominatorClass::below || rep.class2 != DenominatorClass::below) {
    rep.outcome = DichotomyCase::estimable;
    rep.explanation = rep.class1 != DenominatorClass::below ? "q1 in window" : "q2 in window";
    return rep;
  }

  const std::int64_t abs_a2 = rep.r2.a < 0 ? -rep.r2.a : rep.r2.a;
  const __int128 den = static_cast<__int128>(abs_a2) * rep.r1.q;
  rep.a2q1 = static_cast<double>(den);
  rep.a2q1_holds = rep.a2q1 < rep.a2q1_threshold;

  // a1 q2 / (a2 q1), with the sign of a2 moved into the numerator.
  const __int128 num = static_cast<__int128>(rep.r1.a) * rep.r2.q * (rep.r2.a < 0 ? -1 : 1);
  const __int128 diff = static_cast<__int128>(a0q0.a) * den - num * q0;
  const double absdiff = static_cast<double>(diff < 0 ? -diff : diff);
  rep.distance = absdiff / (static_cast<double>(den) * static_cast<double>(q0));
  rep.lower_bound_holds = rep.distance > rep.lower_threshold;
  const double approx_ratio = static_cast<double>(num) / static_cast<double>(den);
  rep.ratio_error_scaled = std::abs(c.lambda1 / c.lambda2 - approx_ratio) * q0sq;

  if (!rep.a2q1_holds) {
    rep.outcome = DichotomyCase::both_small_premise_fails;
    rep.explanation = "|a2| q1 >= q0/log X: premise of the contradiction fails at this scale";
  } else if (rep.lower_bound_holds) {
    rep.outcome = DichotomyCase::both_small_contradiction;
    rep.explanation = "|a0/q0 - a1q2/(a2q1)| > log X/q0^2 contradicts the O(1/q0^2) closeness";
  } else {
    rep.outcome = DichotomyCase::unexplained;
    rep.explanation = "|a2| q1 < q0/log X but the lower bound on the distance fails";
  }
  return rep;
}

std::vector<DichotomyReport> dichotomy_scan(const Coefficients& c,
                                            const Rational& a0q0,
                                            const RunParameters& params,
                                            double lo, double hi,
                                            std::size_t n) {
  std::vector<DichotomyReport> out(n);
  const double step = n > 1 ? (hi - lo) / static_cast<double>(n - 1) : 0.0;
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (i + 1 == n && n > 1) ? hi : lo + step * static_cast<double>(i);
    try {
      out[i] = dichotomy_probe(c, a0q0, params, t);
    } catch (...) {
#pragma omp critical(psd_dichotomy_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

Rational anchor_fraction(const Coefficients& c, std::int64_t q0) {
  const double ratio = c.lambda1 / c.lambda2;
  const ConvergentSeq cf = continued_fraction(ratio, 200);
  for (const Rational& r : cf.convergents) {
    if (r.q == q0) return r;
  }
  const Rational guess = make_rational(
      static_cast<std::int64_t>(std::llround(ratio * static_cast<double>(q0))), q0);
  if (guess.q != q0 || !within_convergent_law(ratio, guess)) {
    throw HypothesisError("q0 = " + std::to_string(q0) +
                          " admits no a0 with |lambda1/lambda2 - a0/q0| < 1/q0^2, (a0,q0) = 1");
  }
  return guess;
}

}  // namespace psd
