#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "psd/approx.hpp"
#include "psd/numeric.hpp"
#include "psd/params.hpp"
#include "psd/primes.hpp"

namespace psd {

struct SumResult {
  Complex value;
  std::size_t term_count = 0;
  double compensation_residual = 0.0;
};

// A trigonometric polynomial sum_j weight[j] e(alpha freq[j]) with integer,
// ascending frequencies.
struct TermSet {
  std::vector<std::uint64_t> freq;
  std::vector<double> weight;

  std::size_t size() const { return freq.size(); }
  double abs_weight_sum() const;
  double square_weight_sum() const;
};

// p^{1-gamma} log p over the PS primes of the set.
TermSet s_terms(const PSPrimeSet& set);
// gamma log p over all primes in (lambda0 X, X].
TermSet sigma_terms(const RunParameters& params, const PrimeTable& table);
// p^{1-gamma} (psi(-(p+1)^gamma) - psi(-p^gamma)) log p over all primes in
// (lambda0 X, X].
TermSet omega_terms(const RunParameters& params, const PrimeTable& table);
// p^{1-gamma} ((p+1)^gamma - p^gamma) log p over all primes in (lambda0 X, X].
TermSet sigma_exact_terms(const RunParameters& params, const PrimeTable& table);
// log p over all primes p <= X.
TermSet psi_terms(double X, const PrimeTable& table);

// Chunked compensated evaluation, chunks spread over OpenMP threads and
// combined in a fixed order (bitwise independent of the thread count).
// Throws NumericError when |alpha| * max freq exceeds 2^52.
SumResult evaluate(const TermSet& terms, double alpha);
// Single compensated pass in ascending order. Reference implementation.
SumResult evaluate_serial(const TermSet& terms, double alpha);
// Plain uncompensated summation; `reversed` walks the terms backwards.
Complex evaluate_naive(const TermSet& terms, double alpha, bool reversed = false);
// evaluate_serial at each alpha, points distributed over threads.
std::vector<Complex> evaluate_grid(const TermSet& terms, std::span<const double> alphas);

// The named sums at a given instance.
SumResult sum_S(double alpha, const RunParameters& params, const PSPrimeSet& set);
SumResult sum_Sigma(double alpha, const RunParameters& params, const PrimeTable& table);
SumResult sum_Omega(double alpha, const RunParameters& params, const PrimeTable& table);
SumResult sum_Psi(double alpha, double X, const PrimeTable& table);

// gamma int_{lambda0 X}^{X} e(alpha y) dy in closed form.
Complex integral_I(double alpha, const RunParameters& params);
Complex integral_I(double alpha, double gamma, double lambda0, double X);

struct DecompositionResidual {
  Complex S;
  Complex sigma_exact;  // weight p^{1-gamma}((p+1)^gamma - p^gamma) log p
  Complex omega;
  Complex sigma;
  double identity_residual = 0.0;  // |S - sigma_exact - omega|
  double sigma_gap = 0.0;          // |sigma_exact - sigma|
};

DecompositionResidual decomposition_residual(double alpha, const RunParameters& params,
                                             const PrimeTable& table);

enum class L2Kind { S, I };

struct L2Result {
  double value = 0.0;
  // Sum of squared weights (orthogonality), only for the unit interval.
  std::optional<double> exact;
  std::size_t panels = 0;
};

// int_{-Delta}^{Delta} |F(lambda alpha)|^2 d alpha for F = S or I.
// Composite Simpson with at least 8 panels per unit of |lambda| X Delta,
// doubled until successive values agree to 1e-6 relative (cap 2^22 panels,
// NumericError beyond).
L2Result l2_integral(L2Kind kind, double lambda, const RunParameters& params,
                     const PSPrimeSet& set);
// int_0^1 |S(alpha)|^2 d alpha together with the exact weight-square sum.
L2Result l2_integral_unit(const PSPrimeSet& set);

struct MinorArcReport {
  double alpha = 0.0;
  Rational fraction;
  DenominatorClass window = DenominatorClass::below;
  // |alpha - a/q| <= 1/q^2
  bool approximation_ok = false;
  double sigma_abs = 0.0;
  double sigma_ratio = 0.0;  // / (X^{25/26} log^4 X)
  double s_abs = 0.0;
  double s_ratio = 0.0;      // / (X^{(37-12 gamma)/26} log^5 X)
  double psi_abs = 0.0;
  double psi_ratio = 0.0;    // / ((X q^{-1/2} + X^{4/5} + X^{1/2} q^{1/2}) log^4 X)
};

// Evaluates at alpha (default a/q). Throws std::invalid_argument when
// gcd(a, q) != 1 or q < 1.
MinorArcReport minor_arc_check(std::int64_t a, std::int64_t q, const RunParameters& params,
                               const PrimeTable& table, const PSPrimeSet& set,
                               std::optional<double> alpha = {});

// Interpolating evaluator for repeated evaluation of a TermSet at arbitrary
// alpha. The sum is 1-periodic; after pulling out e(alpha c) for a central
// frequency c the remaining polynomial has bandwidth B and is sampled at
// M >= 256 (B + 1) points, then read back by 4-point Lagrange interpolation.
class PeriodicSumTable {
 public:
  explicit PeriodicSumTable(const TermSet& terms);

  Complex operator()(double alpha) const;
  std::size_t samples() const { return samples_.size(); }
  std::uint64_t center() const { return center_; }

 private:
  std::uint64_t center_ = 0;
  std::vector<Complex> samples_;
  double scale_ = 0.0;
  std::size_t mask_ = 0;
};

}  // namespace psd
