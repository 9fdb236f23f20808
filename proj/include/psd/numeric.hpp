#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace psd {

using Complex = std::complex<double>;

// e(t) = exp(2 pi i t) as a complex number.
using PhaseValue = Complex;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Error hierarchy. The CLI maps each kind onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input, unknown keys, out-of-domain values (exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A mathematical hypothesis of the problem instance does not hold (exit 3).
class HypothesisError : public Error {
 public:
  using Error::Error;
};

// Quadrature refinement cap hit, precision exhausted (exit 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

// Cache I/O, header or checksum problems.
class IoError : public Error {
 public:
  using Error::Error;
};

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }
  double residual() const { return comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

class CompensatedComplexSum {
 public:
  void add(Complex z) {
    re_.add(z.real());
    im_.add(z.imag());
  }
  void add(const CompensatedComplexSum& other) {
    re_.add(other.re_);
    im_.add(other.im_);
  }
  Complex value() const { return {re_.value(), im_.value()}; }
  // Largest magnitude of the two compensation terms.
  double residual() const {
    return std::max(std::abs(re_.residual()), std::abs(im_.residual()));
  }

 private:
  CompensatedSum re_;
  CompensatedSum im_;
};

// psi(t) = {t} - 1/2 with {t} = t - floor(t) in [0,1), also for negative t.
double sawtooth(double t);
long double sawtooth(long double t);

// e(t) with t reduced mod 1 before the trig call.
PhaseValue unit_phase(double t);

// Fractional part of alpha * n, computed with an FMA-recovered product so
// that the reduction keeps full double precision even when |alpha * n| is
// large. Result lies in [-1/2, 1/2].
double reduced_product(double alpha, double n);

// e(alpha * n) using reduced_product.
inline PhaseValue phase_of_product(double alpha, double n) {
  return unit_phase(reduced_product(alpha, n));
}

// sin(2 pi t) with mod-1 reduction.
double sin_2pi(double t);

// Composite Simpson weights: 1,4,2,4,...,4,1 (times h/3). `intervals` must be
// even.
inline double simpson_weight(std::size_t i, std::size_t intervals) {
  if (i == 0 || i == intervals) return 1.0;
  return (i % 2 == 1) ? 4.0 : 2.0;
}

// 64-bit FNV-1a over a byte range, continuing from `seed`.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 0xcbf29ce484222325ULL);

// "%.17g" in the C locale.
std::string format_double(double x);

}  // namespace psd
