#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "psd/expsums.hpp"
#include "psd/kernel.hpp"
#include "psd/numeric.hpp"
#include "psd/params.hpp"
#include "psd/primes.hpp"

namespace psd {

struct TripleRecord {
  std::uint64_t p1 = 0;
  std::uint64_t p2 = 0;
  std::uint64_t p3 = 0;
  double form_value = 0.0;  // lambda1 p1 + lambda2 p2 + lambda3 p3 + eta
  double weight = 0.0;      // theta(form_value) log p1 log p2 log p3
  // (max p)^{(37-38 gamma)/26} (log max p)^10
  double theorem_threshold = 0.0;
  bool below_theorem_threshold = false;
};

struct GammaDirect {
  // sum theta(form) prod p_i^{1-gamma} log p_i, the quantity recovered by
  // integrating Theta(t) S(lambda1 t) S(lambda2 t) S(lambda3 t) e(eta t).
  double value = 0.0;
  // sum theta(form) prod log p_i, the count weighted by logarithms only.
  double value_log = 0.0;
  std::uint64_t triples_found = 0;
  bool empty_set = false;
};

// Meet-in-the-middle: lambda3 p3 sorted once, a binary-searched window per
// (p1, p2). Parallel over p1, per-p1 partials reduced in index order.
GammaDirect big_gamma_direct(const Coefficients& c, const SmoothingKernel& kernel,
                             const PSPrimeSet& set, double eps_search);
// O(n^3) triple loop. Reference implementation.
GammaDirect big_gamma_brute(const Coefficients& c, const SmoothingKernel& kernel,
                            const PSPrimeSet& set, double eps_search);

struct TripleSearch {
  std::vector<TripleRecord> records;
  std::uint64_t candidates = 0;  // triples inside the window (before truncation)
  bool all_verified = false;
  std::vector<std::string> verification_failures;
  // Theorem-scale epsilon at this X and whether it exceeds 1, in which case
  // the theorem's inequality holds for every triple of the box.
  double theorem_epsilon = 0.0;
  bool theorem_epsilon_vacuous = false;
  bool all_below_theorem_threshold = false;
};

// Up to max_results triples with |form| < eps_search, sorted by |form|
// (ties by p1, p2, p3). Every record is re-verified from scratch: trial
// division primality, PS indicator and the form recomputed in long double.
TripleSearch find_triples(const RunParameters& params, const Coefficients& c,
                          const SmoothingKernel& kernel, const PSPrimeSet& set,
                          double eps_search, std::size_t max_results);

// Quadrature step: 1/8 of the period of the fastest phase max|lambda_i| X t.
double quadrature_step(const RunParameters& params, const Coefficients& c);

struct PieceResult {
  Complex value;
  std::size_t nodes = 0;
};

// int_{|t|<Delta} Theta S S S e(eta t) dt, both halves evaluated with exact
// sums. Step halved until successive values agree to 1e-9 of int |F|.
PieceResult gamma1(const RunParameters& params, const Coefficients& c,
                   const SmoothingKernel& kernel, const PSPrimeSet& set);

struct Gamma2Sweep {
  Complex gamma2;
  std::size_t nodes = 0;
  // T_k = int_Delta^H |S(lambda_k t)|^2 dt
  std::array<double, 3> T = {0.0, 0.0, 0.0};
  // sup over the grid of min(|S(lambda1 t)|, |S(lambda2 t)|)
  double sup_min = 0.0;
  // Majorant chain, each level bounding the previous one:
  //   m1 = 2 int |Theta S1 S2 S3|
  //   m2 = 2 (7 eps/4) int min(|S1|,|S2|) (|S1 S3| + |S2 S3|)
  //   m3 = 2 (7 eps/4) int min(|S1|,|S2|) (|S1|^2 + |S2|^2 + |S3|^2)
  //   m4 = 2 (7 eps/4) sup min(|S1|,|S2|) (T1 + T2 + T3)
  std::array<double, 4> majorant = {0.0, 0.0, 0.0, 0.0};
  // sup_min / (X^{(37-12 gamma)/26} log^5 X)
  double sup_min_ratio = 0.0;
  // T_k / (H X^{2-gamma} log^2 X)
  std::array<double, 3> T_ratio = {0.0, 0.0, 0.0};
  // m4 / (eps X^2 / log X)
  double majorant_ratio = 0.0;
};

// One sweep over Delta <= t <= H_eff (log-split segments, uniform Simpson
// inside each) producing Gamma_2 and its majorant chain. The sums are read
// from PeriodicSumTable; F(-t) = conj F(t) gives Gamma_2 = 2 Re int_Delta^H F.
Gamma2Sweep gamma2_sweep(const RunParameters& params, const Coefficients& c,
                         const SmoothingKernel& kernel, const PSPrimeSet& set);
Gamma2Sweep gamma2_majorant(const RunParameters& params, const Coefficients& c,
                            const SmoothingKernel& kernel, const PSPrimeSet& set);

// Upper end of the truncated tail range: the point where the kernel decay
// bound has dropped by 1e3 from its value at H_eff, i.e.
// H_eff 10^{3/(k+1)}, capped at kGamma3MaxNodes quadrature steps past H_eff.
inline constexpr double kGamma3MaxNodes = 67108864.0;  // 2^26
double gamma3_cutoff(const RunParameters& params, const Coefficients& c,
                     const SmoothingKernel& kernel);

struct Gamma3Truncated {
  Complex value;
  std::size_t nodes = 0;
  double T = 0.0;
  // Bound on the neglected part |t| > T (tail_bound_rigorous moved to T).
  double remainder_bound = 0.0;
};

// int_{H <= |t| <= T} Theta S S S e(eta t) dt with T = gamma3_cutoff.
Gamma3Truncated gamma3_truncated(const RunParameters& params, const Coefficients& c,
                                 const SmoothingKernel& kernel, const PSPrimeSet& set);

// piece 1, 2 or 3; throws std::invalid_argument otherwise.
Complex gamma_piece(int piece, const RunParameters& params, const Coefficients& c,
                    const SmoothingKernel& kernel, const PSPrimeSet& set);

// int_{|t|<Delta} Theta(t) I(lambda1 t) I(lambda2 t) I(lambda3 t) e(eta t) dt.
double integral_J(const RunParameters& params, const Coefficients& c,
                  const SmoothingKernel& kernel);

struct BoxIntegral {
  double value = 0.0;
  bool feasible = false;
  double ratio = 0.0;       // B / (eps X^2)
  double mass_bound = 0.0;  // 2 eps gamma^3 ((1-lambda0) X)^2 / |lambda3|
};

// gamma^3 int_{(lambda0 X, X]^3} theta(lambda.y + eta) dy, evaluated by
// inclusion-exclusion over the eight box corners with the third
// antiderivative of theta. Zero (feasible = false) on an infeasible box.
BoxIntegral box_integral_B(const RunParameters& params, const Coefficients& c,
                           const SmoothingKernel& kernel);
// Same integral as a composite Simpson rule in y1 of the inner double
// integral (in closed form through the second antiderivative).
double box_integral_B_quadrature(const RunParameters& params, const Coefficients& c,
                                 const SmoothingKernel& kernel, std::size_t intervals);

struct PhiBound {
  double value = 0.0;
  double ratio = 0.0;  // value / (eps / Delta^2)
  double tail = 0.0;   // analytic part beyond the quadrature range
};

// 2 int_Delta^inf |Theta(t)| prod min(gamma (1-lambda0) X, 1/(pi |lambda_i| t)) dt,
// which bounds |J - B|.
PhiBound phi_bound(const RunParameters& params, const SmoothingKernel& kernel,
                   const Coefficients& c);

struct TailBound {
  double value = 0.0;  // X^{3-3 gamma}/k (4k/(pi eps H))^k
  double base = 0.0;   // 4k/(pi eps H)
  int k = 0;
  bool at_most_one = false;
};

// Closed form in log space.
TailBound tail_bound_formula(double X, double gamma, double epsilon, double H, int k);
// With epsilon and k from the kernel and H = H_eff.
TailBound tail_bound_gamma3(const RunParameters& params, const SmoothingKernel& kernel);
// 2 (sum w)^3 / (pi k) (4k/(pi eps H))^k, a bound on |Gamma_3| that uses
// |S| <= sum of the weights.
double tail_bound_rigorous(const RunParameters& params, const SmoothingKernel& kernel,
                           const PSPrimeSet& set);
// The same bound for the range |t| > T.
double tail_bound_rigorous_from(double T, const SmoothingKernel& kernel, const PSPrimeSet& set);

struct DecompositionResult {
  GammaDirect direct;
  Complex gamma1;
  Complex gamma2;
  Complex gamma3;
  double J = 0.0;
  BoxIntegral B;
  PhiBound phi;
  TailBound tail;
  double tail_rigorous = 0.0;
  double gamma3_cutoff = 0.0;
  double gamma3_remainder = 0.0;
  std::optional<Gamma2Sweep> sweep;
  // |gamma1 + gamma2 + gamma3 - direct| / direct, when all pieces ran.
  std::optional<double> closure_error;
  std::array<bool, 3> pieces = {true, true, true};
};

// Runs the requested pieces plus J, B, Phi and the tail bounds.
DecompositionResult decompose(const RunParameters& params, const Coefficients& c,
                              const SmoothingKernel& kernel, const PSPrimeSet& set,
                              std::array<bool, 3> pieces = {true, true, true});

}  // namespace psd
