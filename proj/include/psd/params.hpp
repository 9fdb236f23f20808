#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace psd {

// Exponent gamma of the Piatetski-Shapiro set, strictly inside (0, 1).
class GammaExponent {
 public:
  // Throws ConfigError outside the open interval (0, 1).
  explicit GammaExponent(double value);

  double value() const { return value_; }
  // 37/38 < gamma < 1, the range in which the main theorem is stated.
  bool theorem_range() const;

  friend bool operator==(const GammaExponent&, const GammaExponent&) = default;

 private:
  double value_;
};

struct Coefficients {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double lambda3 = -1.0;
  double eta = 0.0;
  // The ratio lambda1/lambda2 being irrational cannot be checked on a
  // machine; it is carried as a user assertion.
  bool irrationality_asserted = true;

  std::array<double, 3> lambdas() const { return {lambda1, lambda2, lambda3}; }
};

struct CoefficientReport {
  bool all_nonzero = false;
  bool mixed_signs = false;
  bool irrationality_asserted = false;
  // Continued fraction of lambda1/lambda2 did not terminate at a small
  // denominator (a weak machine-side sanity check for the assertion).
  bool ratio_looks_irrational = false;
  bool pass = false;
  std::vector<std::string> failures;

  // Sign normalization lambda1 > 0, lambda2 > 0, lambda3 < 0. Only
  // meaningful when all_nonzero && mixed_signs.
  Coefficients canonical;
  bool negated = false;
  // canonical.lambda_{i+1} = +/- original lambda_{permutation[i]+1}
  std::array<int, 3> permutation = {0, 1, 2};
  bool already_canonical = false;
};

CoefficientReport validate_coefficients(const Coefficients& c);

// The raw scale formulas for a given X with no admissibility checks.
struct Scales {
  double X = 0.0;
  double Delta = 0.0;    // X^{-12/13} log X
  double epsilon = 0.0;  // X^{(37-38 gamma)/26} log^10 X
  double H = 0.0;        // log^2 X / epsilon
};

Scales scales_for_x(double X, const GammaExponent& gamma);
// X = q0^{13/6}, computed as exp((13/6) log q0).
double x_from_q0(std::uint64_t q0);

class RunParameters {
 public:
  std::optional<std::uint64_t> q0() const { return q0_; }
  const GammaExponent& gamma() const { return gamma_; }
  double lambda0() const { return lambda0_; }
  double X() const { return X_; }
  double Delta() const { return Delta_; }
  // Theorem-scale epsilon and H.
  double epsilon() const { return epsilon_; }
  double H() const { return H_; }
  std::optional<double> epsilon_user() const { return epsilon_user_; }
  // The epsilon actually used for searches and the kernel: the user override
  // when present, otherwise the theorem-scale value. H_eff = log^2 X / epsilon_eff.
  double epsilon_eff() const { return epsilon_user_.value_or(epsilon_); }
  double H_eff() const;
  double log_x() const;
  // floor(log X), the smoothness order used for the tail estimates.
  int kernel_order() const;

  // Validates lambda0, epsilon_user and Delta < H_eff.
  static RunParameters make_checked(std::optional<std::uint64_t> q0,
                                    const GammaExponent& gamma, double lambda0,
                                    const Scales& s,
                                    std::optional<double> epsilon_user);

 private:
  RunParameters(std::optional<std::uint64_t> q0, GammaExponent gamma,
                double lambda0, const Scales& s,
                std::optional<double> epsilon_user);

  std::optional<std::uint64_t> q0_;
  GammaExponent gamma_;
  double lambda0_;
  double X_;
  double Delta_;
  double epsilon_;
  double H_;
  std::optional<double> epsilon_user_;
};

// Throws ConfigError for q0 < 2 or lambda0 outside (0,1), HypothesisError
// when Delta >= H_eff (instance too small for the chosen epsilon).
RunParameters derive_parameters(std::uint64_t q0, const GammaExponent& gamma,
                                double lambda0,
                                std::optional<double> epsilon_user = {});

// Same, at a directly chosen X instead of one tied to a convergent
// denominator.
RunParameters derive_parameters_from_x(double X, const GammaExponent& gamma,
                                       double lambda0,
                                       std::optional<double> epsilon_user = {});

// Is {y in (lambda0 X, X]^3 : |lambda.y + eta| < epsilon} nonempty?
bool feasible_box_check(const Coefficients& c, double lambda0, double X,
                        double epsilon);

}  // namespace psd
