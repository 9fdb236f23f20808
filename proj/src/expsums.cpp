#include "psd/expsums.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace psd {

namespace {

constexpr std::size_t kChunk = 2048;
constexpr double kPhaseLimit = 4503599627370496.0;  // 2^52
constexpr std::size_t kMaxPanels = std::size_t{1} << 22;

void check_phase_precision(const TermSet& terms, double alpha) {
  if (terms.freq.empty()) return;
  if (std::abs(alpha) * static_cast<double>(terms.freq.back()) > kPhaseLimit) {
    throw NumericError("alpha * X = " +
                       format_double(std::abs(alpha) * static_cast<double>(terms.freq.back())) +
                       " exceeds 2^52; phase precision exhausted");
  }
}

void check_table(const RunParameters& params, const PrimeTable& table) {
  if (static_cast<double>(table.limit) < std::floor(params.X())) {
    throw std::invalid_argument("prime table limit " + std::to_string(table.limit) +
                                " below X = " + format_double(params.X()));
  }
}

void check_set(const RunParameters& params, const PSPrimeSet& set) {
  const double X = params.X();
  const double tol = 1e-9 * X;
  if (!(set.gamma == params.gamma()) ||
      std::abs(set.lo - params.lambda0() * X) > tol || std::abs(set.hi - X) > tol) {
    throw std::invalid_argument("PS prime set (" + format_double(set.lo) + ", " +
                                format_double(set.hi) + "] gamma " +
                                format_double(set.gamma.value()) +
                                " does not match the run parameters");
  }
}

CompensatedComplexSum accumulate(const TermSet& terms, double alpha, std::size_t begin,
                                 std::size_t end) {
  CompensatedComplexSum acc;
  for (std::size_t j = begin; j < end; ++j) {
    acc.add(terms.weight[j] * phase_of_product(alpha, static_cast<double>(terms.freq[j])));
  }
  return acc;
}

struct PowerPairs {
  std::vector<long double> lower;
  std::vector<long double> upper;
};

PowerPairs power_pairs(std::span<const std::uint64_t> primes, double gamma) {
  PowerPairs pp;
  pp.lower.resize(primes.size());
  pp.upper.resize(primes.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < primes.size(); ++i) {
    pp.lower[i] = guarded_power(primes[i], gamma);
    pp.upper[i] = guarded_power(primes[i] + 1, gamma);
  }
  return pp;
}

template <typename WeightFn>
TermSet prime_terms(const RunParameters& params, const PrimeTable& table, WeightFn fn) {
  check_table(params, table);
  const auto primes = table.range(params.lambda0() * params.X(), params.X());
  const double gamma = params.gamma().value();
  const PowerPairs pp = power_pairs(primes, gamma);
  TermSet t;
  t.freq.assign(primes.begin(), primes.end());
  t.weight.resize(primes.size());
  for (std::size_t i = 0; i < primes.size(); ++i) {
    const auto p = static_cast<double>(primes[i]);
    t.weight[i] = fn(p, gamma, pp.lower[i], pp.upper[i]);
  }
  return t;
}

template <typename F>
double simpson(F&& values_at, double lo, double hi, std::size_t n) {
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> alphas(n + 1);
  for (std::size_t i = 0; i <= n; ++i) alphas[i] = lo + h * static_cast<double>(i);
  alphas[n] = hi;
  const std::vector<double> vals = values_at(alphas);
  CompensatedSum acc;
  for (std::size_t i = 0; i <= n; ++i) acc.add(simpson_weight(i, n) * vals[i]);
  return acc.value() * h / 3.0;
}

template <typename F>
L2Result simpson_doubling(F&& values_at, double lo, double hi, std::size_t n0) {
  std::size_t n = std::max<std::size_t>(16, n0 + (n0 % 2));
  double prev = simpson(values_at, lo, hi, n);
  while (true) {
    n *= 2;
    if (n > kMaxPanels) {
      throw NumericError("l2 quadrature did not converge within 2^22 panels");
    }
    const double cur = simpson(values_at, lo, hi, n);
    if (std::abs(cur - prev) <= 1e-6 * std::abs(cur)) return {cur, std::nullopt, n};
    prev = cur;
  }
}

}  // namespace

double TermSet::abs_weight_sum() const {
  CompensatedSum acc;
  for (double w : weight) acc.add(std::abs(w));
  return acc.value();
}

double TermSet::square_weight_sum() const {
  CompensatedSum acc;
  for (double w : weight) acc.add(w * w);
  return acc.value();
}

TermSet s_terms(const PSPrimeSet& set) {
  TermSet t;
  t.freq.reserve(set.size());
  t.weight.reserve(set.size());
  for (const auto& e : set.entries) {
    t.freq.push_back(e.p);
    t.weight.push_back(e.weight_w * e.weight_log);
  }
  return t;
}

TermSet sigma_terms(const RunParameters& params, const PrimeTable& table) {
  return prime_terms(params, table, [](double p, double gamma, long double, long double) {
    return gamma * std::log(p);
  });
}

TermSet omega_terms(const RunParameters& params, const PrimeTable& table) {
  return prime_terms(params, table,
                     [](double p, double gamma, long double u, long double v) {
                       const auto saw = static_cast<double>(sawtooth(-v) - sawtooth(-u));
                       return std::pow(p, 1.0 - gamma) * saw * std::log(p);
                     });
}

TermSet sigma_exact_terms(const RunParameters& params, const PrimeTable& table) {
  return prime_terms(params, table,
                     [](double p, double gamma, long double u, long double v) {
                       return std::pow(p, 1.0 - gamma) * static_cast<double>(v - u) *
                              std::log(p);
                     });
}

TermSet psi_terms(double X, const PrimeTable& table) {
  TermSet t;
  if (X < 2.0) return t;
  if (static_cast<double>(table.limit) < std::floor(X)) {
    throw std::invalid_argument("prime table limit below X = " + format_double(X));
  }
  const auto primes = table.range(0.0, X);
  t.freq.assign(primes.begin(), primes.end());
  t.weight.reserve(primes.size());
  for (auto p : primes) t.weight.push_back(std::log(static_cast<double>(p)));
  return t;
}

SumResult evaluate(const TermSet& terms, double alpha) {
  check_phase_precision(terms, alpha);
  const std::size_t n = terms.size();
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<CompensatedComplexSum> partial(chunks);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    partial[c] = accumulate(terms, alpha, c * kChunk, std::min(n, (c + 1) * kChunk));
  }
  CompensatedComplexSum total;
  for (const auto& p : partial) total.add(p);
  return {total.value(), n, total.residual()};
}

SumResult evaluate_serial(const TermSet& terms, double alpha) {
  check_phase_precision(terms, alpha);
  const CompensatedComplexSum acc = accumulate(terms, alpha, 0, terms.size());
  return {acc.value(), terms.size(), acc.residual()};
}

Complex evaluate_naive(const TermSet& terms, double alpha, bool reversed) {
  Complex acc{0.0, 0.0};
  const std::size_t n = terms.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = reversed ? n - 1 - k : k;
    acc += terms.weight[j] * phase_of_product(alpha, static_cast<double>(terms.freq[j]));
  }
  return acc;
}

std::vector<Complex> evaluate_grid(const TermSet& terms, std::span<const double> alphas) {
  for (double a : {alphas.empty() ? 0.0 : *std::max_element(alphas.begin(), alphas.end()),
                   alphas.empty() ? 0.0 : *std::min_element(alphas.begin(), alphas.end())}) {
    check_phase_precision(terms, a);
  }
  std::vector<Complex> out(alphas.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    out[i] = accumulate(terms, alphas[i], 0, terms.size()).value();
  }
  return out;
}

SumResult sum_S(double alpha, const RunParameters& params, const PSPrimeSet& set) {
  check_set(params, set);
  return evaluate(s_terms(set), alpha);
}

SumResult sum_Sigma(double alpha, const RunParameters& params, const PrimeTable& table) {
  return evaluate(sigma_terms(params, table), alpha);
}

SumResult sum_Omega(double alpha, const RunParameters& params, const PrimeTable& table) {
  return evaluate(omega_terms(params, table), alpha);
}

SumResult sum_Psi(double alpha, double X, const PrimeTable& table) {
  return evaluate(psi_terms(X, table), alpha);
}

Complex integral_I(double alpha, double gamma, double lambda0, double X) {
  const double lo = lambda0 * X;
  const double len = X - lo;
  if (alpha == 0.0) return {gamma * len, 0.0};
  const double mid = 0.5 * (lo + X);
  const double amp = sin_2pi(0.5 * alpha * len) / (kPi * alpha);
  return gamma * amp * phase_of_product(alpha, mid);
}

Complex integral_I(double alpha, const RunParameters& params) {
  return integral_I(alpha, params.gamma().value(), params.lambda0(), params.X());
}

DecompositionResidual decomposition_residual(double alpha, const RunParameters& params,
                                             const PrimeTable& table) {
  check_table(params, table);
  const PSPrimeSet set =
      ps_primes_in(params.lambda0() * params.X(), params.X(), params.gamma(), table);
  DecompositionResidual r;
  r.S = evaluate(s_terms(set), alpha).value;
  r.sigma_exact = evaluate(sigma_exact_terms(params, table), alpha).value;
  r.omega = evaluate(omega_terms(params, table), alpha).value;
  r.sigma = evaluate(sigma_terms(params, table), alpha).value;
  r.identity_residual = std::abs(r.S - r.sigma_exact - r.omega);
  r.sigma_gap = std::abs(r.sigma_exact - r.sigma);
  return r;
}

L2Result l2_integral(L2Kind kind, double lambda, const RunParameters& params,
                     const PSPrimeSet& set) {
  if (lambda == 0.0) throw std::invalid_argument("l2_integral: lambda = 0");
  const double D = params.Delta();
  const auto n0 = static_cast<std::size_t>(
      std::ceil(8.0 * std::abs(lambda) * params.X() * D)) * 2;
  if (kind == L2Kind::I) {
    return simpson_doubling(
        [&](const std::vector<double>& alphas) {
          std::vector<double> v(alphas.size());
          for (std::size_t i = 0; i < alphas.size(); ++i) {
            v[i] = std::norm(integral_I(lambda * alphas[i], params));
          }
          return v;
        },
        -D, D, n0);
  }
  check_set(params, set);
  const TermSet terms = s_terms(set);
  return simpson_doubling(
      [&](const std::vector<double>& alphas) {
        std::vector<double> scaled(alphas.size());
        for (std::size_t i = 0; i < alphas.size(); ++i) scaled[i] = lambda * alphas[i];
        const auto vals = evaluate_grid(terms, scaled);
        std::vector<double> v(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) v[i] = std::norm(vals[i]);
        return v;
      },
      -D, D, n0);
}

L2Result l2_integral_unit(const PSPrimeSet& set) {
  const TermSet terms = s_terms(set);
  if (terms.size() == 0) return {0.0, 0.0, 0};
  const std::uint64_t spread = terms.freq.back() - terms.freq.front() + 1;
  L2Result r = simpson_doubling(
      [&](const std::vector<double>& alphas) {
        const auto vals = evaluate_grid(terms, alphas);
        std::vector<double> v(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) v[i] = std::norm(vals[i]);
        return v;
      },
      0.0, 1.0, 8 * static_cast<std::size_t>(spread));
  r.exact = terms.square_weight_sum();
  return r;
}

MinorArcReport minor_arc_check(std::int64_t a, std::int64_t q, const RunParameters& params,
                               const PrimeTable& table, const PSPrimeSet& set,
                               std::optional<double> alpha) {
  if (q < 1) throw std::invalid_argument("minor_arc_check: q < 1");
  if (std::gcd(a < 0 ? -a : a, q) != 1) {
    throw std::invalid_argument("minor_arc_check: gcd(a, q) != 1");
  }
  MinorArcReport r;
  r.fraction = {a, q};
  r.alpha = alpha.value_or(static_cast<double>(a) / static_cast<double>(q));
  r.approximation_ok = approximation_defect(r.alpha, r.fraction) * static_cast<double>(q) <= 1.0;
  const double X = params.X();
  const double L = std::log(X);
  const double gamma = params.gamma().value();
  r.window = classify_denominator(q, X);

  r.sigma_abs = std::abs(sum_Sigma(r.alpha, params, table).value);
  r.sigma_ratio = r.sigma_abs / (std::pow(X, 25.0 / 26.0) * std::pow(L, 4));
  r.s_abs = std::abs(sum_S(r.alpha, params, set).value);
  r.s_ratio = r.s_abs / (std::pow(X, (37.0 - 12.0 * gamma) / 26.0) * std::pow(L, 5));
  r.psi_abs = std::abs(sum_Psi(r.alpha, X, table).value);
  const auto qd = static_cast<double>(q);
  const double shape = (X / std::sqrt(qd) + std::pow(X, 0.8) + std::sqrt(X * qd)) * std::pow(L, 4);
  r.psi_ratio = r.psi_abs / shape;
  return r;
}

PeriodicSumTable::PeriodicSumTable(const TermSet& terms) {
  if (terms.size() == 0) {
    samples_.assign(1024, Complex{});
    mask_ = 1023;
    scale_ = 1024.0;
    return;
  }
  const std::uint64_t lo = terms.freq.front();
  const std::uint64_t hi = terms.freq.back();
  center_ = lo + (hi - lo) / 2;
  const std::uint64_t band = std::max(hi - center_, center_ - lo);
  std::size_t m = 1024;
  while (m < 256 * (band + 1)) m *= 2;
  samples_.assign(m, Complex{});
  mask_ = m - 1;
  scale_ = static_cast<double>(m);

  // samples_[i] = sum_j w_j e(i (f_j - c) / m): one inverse DFT of the
  // coefficient vector.
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto off = static_cast<std::int64_t>(terms.freq[j]) - static_cast<std::int64_t>(center_);
    samples_[static_cast<std::size_t>(off) & mask_] += terms.weight[j];
  }
  auto* data = reinterpret_cast<fftw_complex*>(samples_.data());
  fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(m), data, data, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (plan == nullptr) throw NumericError("PeriodicSumTable: FFT plan failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

Complex PeriodicSumTable::operator()(double alpha) const {
  const double ar = alpha - std::floor(alpha);
  const double u = ar * scale_;
  const double fl = std::floor(u);
  const double s = u - fl;
  const auto j = static_cast<std::size_t>(fl);
  const Complex& gm = samples_[(j - 1) & mask_];
  const Complex& g0 = samples_[j & mask_];
  const Complex& g1 = samples_[(j + 1) & mask_];
  const Complex& g2 = samples_[(j + 2) & mask_];
  const double wm = -s * (s - 1.0) * (s - 2.0) / 6.0;
  const double w0 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  const double w1 = -(s + 1.0) * s * (s - 2.0) / 2.0;
  const double w2 = (s + 1.0) * s * (s - 1.0) / 6.0;
  const Complex g = wm * gm + w0 * g0 + w1 * g1 + w2 * g2;
  return g * phase_of_product(ar, static_cast<double>(center_));
}

}  // namespace psd
