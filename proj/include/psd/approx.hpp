#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psd/params.hpp"

namespace psd {

struct Rational {
  std::int64_t a = 0;
  std::int64_t q = 1;

  double value() const { return static_cast<double>(a) / static_cast<double>(q); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

// Reduces to lowest terms with q > 0. Throws std::invalid_argument on q == 0.
Rational make_rational(std::int64_t a, std::int64_t q);

struct ConvergentSeq {
  double x = 0.0;
  std::vector<std::int64_t> partial_quotients;
  std::vector<Rational> convergents;
  // The remainder vanished (below 1e-12): x is rational at double precision
  // and the last convergent equals it.
  bool rational_at_precision = false;
  // Expansion stopped because the next convergent could no longer be
  // verified against x in double precision.
  bool precision_exhausted = false;
};

// Standard continued-fraction expansion. Each emitted convergent is checked
// against |x - a/q| < 1/q^2 before it is accepted.
ConvergentSeq continued_fraction(double x, int max_terms);

// |q x - a|, evaluated with a fused multiply-add.
double approximation_defect(double x, const Rational& r);

// a/q with q <= Q and |x - a/q| < 1/(qQ). The result minimizes |q x - a|
// over all q <= Q (largest convergent denominator not exceeding Q).
// Throws NumericError if no candidate verifies.
Rational dirichlet_approx(double x, std::int64_t Q);

enum class DenominatorClass { below, estimable, above };
const char* to_string(DenominatorClass c);

// q against the closed window [X^{1/13}, X^{12/13}].
DenominatorClass classify_denominator(std::int64_t q, double X);

enum class DichotomyCase {
  // At least one of q1, q2 lies in the estimable window.
  estimable,
  // a1 or a2 vanished; only possible when lambda_i Delta < 1/q0^2.
  zero_numerator,
  // Both denominators small, and |a2| q1 >= q0/log X: the premise the proof
  // derives from the size of H does not hold at this X.
  both_small_premise_fails,
  // Both small, |a2| q1 < q0/log X, so |a0/q0 - a1q2/(a2q1)| > log X/q0^2.
  // Compatibility with the O(1/q0^2) closeness would need an implicit
  // constant above log X - 1; ratio_error_scaled records it.
  both_small_contradiction,
  // Anything not predicted by the argument above.
  unexplained,
};
const char* to_string(DichotomyCase c);

struct DichotomyReport {
  double t = 0.0;
  Rational r1;
  Rational r2;
  DenominatorClass class1 = DenominatorClass::below;
  DenominatorClass class2 = DenominatorClass::below;
  DichotomyCase outcome = DichotomyCase::unexplained;

  // |a_i| < 1/q0^2 + q_i lambda_i |t|
  double a1_bound = 0.0;
  double a2_bound = 0.0;
  // lambda_i Delta against 1/q0^2 (a_i = 0 needs the former to be smaller).
  bool zero_possible1 = false;
  bool zero_possible2 = false;

  double a2q1 = 0.0;
  double a2q1_threshold = 0.0;  // q0 / log X
  bool a2q1_holds = false;

  double distance = 0.0;         // |a0/q0 - a1 q2/(a2 q1)|
  double lower_threshold = 0.0;  // log X / q0^2
  bool lower_bound_holds = false;
  // |lambda1/lambda2 - a1 q2/(a2 q1)| * q0^2
  double ratio_error_scaled = 0.0;

  std::string explanation;
};

// Expects canonical coefficients (lambda1, lambda2 > 0) and a0/q0 a
// convergent of lambda1/lambda2. Throws std::invalid_argument when |t| lies
// outside [Delta, H_eff].
DichotomyReport dichotomy_probe(const Coefficients& c, const Rational& a0q0,
                                const RunParameters& params, double t);

// Probes n equally spaced t in [lo, hi] (n == 1 probes lo).
std::vector<DichotomyReport> dichotomy_scan(const Coefficients& c,
                                            const Rational& a0q0,
                                            const RunParameters& params,
                                            double lo, double hi,
                                            std::size_t n);

// The convergent of lambda1/lambda2 with denominator q0, if there is one.
// Otherwise a0 = round(q0 lambda1/lambda2), provided it still satisfies
// |lambda1/lambda2 - a0/q0| < 1/q0^2; throws HypothesisError if not.
Rational anchor_fraction(const Coefficients& c, std::int64_t q0);

}  // namespace psd
