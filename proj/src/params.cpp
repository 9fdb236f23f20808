#include "psd/params.hpp"

#include <cmath>
#include <sstream>

#include "psd/approx.hpp"
#include "psd/numeric.hpp"

namespace psd {

GammaExponent::GammaExponent(double value) : value_(value) {
  if (!(value > 0.0 && value < 1.0)) {
    std::ostringstream os;
    os << "gamma = " << format_double(value)
       << " is outside (0,1); the theorem needs 37/38 < gamma < 1";
    throw ConfigError(os.str());
  }
}

bool GammaExponent::theorem_range() const {
  return value_ > 37.0 / 38.0 && value_ < 1.0;
}

CoefficientReport validate_coefficients(const Coefficients& c) {
  CoefficientReport r;
  const auto l = c.lambdas();
  r.all_nonzero = l[0] != 0.0 && l[1] != 0.0 && l[2] != 0.0;
  if (!r.all_nonzero) r.failures.push_back("some lambda_i is zero");

  int positives = 0;
  for (double v : l) positives += v > 0.0 ? 1 : 0;
  r.mixed_signs = r.all_nonzero && positives != 0 && positives != 3;
  if (r.all_nonzero && !r.mixed_signs) r.failures.push_back("all same sign");

  r.irrationality_asserted = c.irrationality_asserted;
  if (!c.irrationality_asserted) {
    r.failures.push_back("lambda1/lambda2 irrationality not asserted");
  }

  if (l[0] != 0.0 && l[1] != 0.0) {
    const ConvergentSeq cf = continued_fraction(l[0] / l[1], 64);
    const Rational last = cf.convergents.back();
    r.ratio_looks_irrational = !(cf.rational_at_precision && last.q < 1000000);
    if (!r.ratio_looks_irrational) {
      r.failures.push_back("lambda1/lambda2 is rational at double precision (" +
                           std::to_string(last.a) + "/" +
                           std::to_string(last.q) + ")");
    }
  }

  r.pass = r.failures.empty();

  if (r.mixed_signs) {
    // Two lambdas share a sign; make that sign positive, then move the odd
    // one out to the third slot.
    r.negated = positives == 1;
    const double s = r.negated ? -1.0 : 1.0;
    int out = 0;
    std::array<int, 3> perm{};
    for (int i = 0; i < 3; ++i) {
      if (s * l[i] > 0.0) perm[out++] = i;
    }
    for (int i = 0; i < 3; ++i) {
      if (s * l[i] < 0.0) perm[out++] = i;
    }
    r.permutation = perm;
    r.canonical = c;
    r.canonical.lambda1 = s * l[perm[0]];
    r.canonical.lambda2 = s * l[perm[1]];
    r.canonical.lambda3 = s * l[perm[2]];
    r.canonical.eta = s * c.eta;
    r.already_canonical = !r.negated && perm == std::array<int, 3>{0, 1, 2};
  }
  return r;
}

double x_from_q0(std::uint64_t q0) {
  return std::exp((13.0 / 6.0) * std::log(static_cast<double>(q0)));
}

Scales scales_for_x(double X, const GammaExponent& gamma) {
  Scales s;
  s.X = X;
  const double L = std::log(X);
  s.Delta = std::exp(-(12.0 / 13.0) * L) * L;
  s.epsilon = std::exp((37.0 - 38.0 * gamma.value()) / 26.0 * L) * std::pow(L, 10);
  s.H = L * L / s.epsilon;
  return s;
}

RunParameters::RunParameters(std::optional<std::uint64_t> q0,
                             GammaExponent gamma, double lambda0,
                             const Scales& s,
                             std::optional<double> epsilon_user)
    : q0_(q0),
      gamma_(gamma),
      lambda0_(lambda0),
      X_(s.X),
      Delta_(s.Delta),
      epsilon_(s.epsilon),
      H_(s.H),
      epsilon_user_(epsilon_user) {}

double RunParameters::log_x() const { return std::log(X_); }

double RunParameters::H_eff() const {
  if (!epsilon_user_) return H_;
  const double L = log_x();
  return L * L / *epsilon_user_;
}

int RunParameters::kernel_order() const {
  return static_cast<int>(std::floor(log_x()));
}

RunParameters RunParameters::make_checked(std::optional<std::uint64_t> q0,
                                          const GammaExponent& gamma,
                                          double lambda0, const Scales& s,
                                          std::optional<double> epsilon_user) {
  if (!(lambda0 > 0.0 && lambda0 < 1.0)) {
    throw ConfigError("lambda0 = " + format_double(lambda0) +
                      " must lie in (0,1)");
  }
  if (epsilon_user && !(*epsilon_user > 0.0)) {
    throw ConfigError("epsilon_user must be positive");
  }
  RunParameters p(q0, gamma, lambda0, s, epsilon_user);
  if (!(p.Delta() < p.H_eff())) {
    throw HypothesisError("Delta = " + format_double(p.Delta()) +
                          " >= H = " + format_double(p.H_eff()) +
                          "; instance too small for this epsilon");
  }
  return p;
}

RunParameters derive_parameters(std::uint64_t q0, const GammaExponent& gamma,
                                double lambda0,
                                std::optional<double> epsilon_user) {
  if (q0 < 2) throw ConfigError("q0 must be at least 2");
  return RunParameters::make_checked(q0, gamma, lambda0,
                                     scales_for_x(x_from_q0(q0), gamma),
                                     epsilon_user);
}

RunParameters derive_parameters_from_x(double X, const GammaExponent& gamma,
                                       double lambda0,
                                       std::optional<double> epsilon_user) {
  if (!(X > 2.0) || !std::isfinite(X)) {
    throw ConfigError("X must be a finite real above 2");
  }
  return RunParameters::make_checked(std::nullopt, gamma, lambda0,
                                     scales_for_x(X, gamma), epsilon_user);
}

bool feasible_box_check(const Coefficients& c, double lambda0, double X,
                        double epsilon) {
  double lo = c.eta;
  double hi = c.eta;
  for (double l : c.lambdas()) {
    const double u = l * lambda0 * X;
    const double v = l * X;
    lo += std::min(u, v);
    hi += std::max(u, v);
  }
  return lo < epsilon && hi > -epsilon;
}

}  // namespace psd
