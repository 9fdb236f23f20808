#include "psd/numeric.hpp"

#include <cmath>
#include <cstdio>

namespace psd {

double sawtooth(double t) { return (t - std::floor(t)) - 0.5; }

long double sawtooth(long double t) { return (t - std::floor(t)) - 0.5L; }

PhaseValue unit_phase(double t) {
  const double r = t - std::nearbyint(t);
  const double arg = kTwoPi * r;
  return {std::cos(arg), std::sin(arg)};
}

double reduced_product(double alpha, double n) {
  const double hi = alpha * n;
  const double lo = std::fma(alpha, n, -hi);
  const double r = (hi - std::nearbyint(hi)) + lo;
  return r - std::nearbyint(r);
}

double sin_2pi(double t) {
  const double r = t - std::nearbyint(t);
  return std::sin(kTwoPi * r);
}

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace psd
