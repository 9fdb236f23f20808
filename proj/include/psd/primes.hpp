#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "psd/params.hpp"

namespace psd {

struct PrimeTable {
  std::uint64_t limit = 0;
  std::vector<std::uint64_t> primes;

  bool contains(std::uint64_t n) const;
  // Primes in (lo, hi] as a subspan.
  std::span<const std::uint64_t> range(double lo, double hi) const;
};

inline constexpr std::uint64_t kMaxSieveLimit = std::uint64_t{1} << 40;
inline constexpr std::size_t kSieveSegment = std::size_t{1} << 20;

// Segmented sieve, segments distributed over OpenMP threads and merged in
// order. Throws std::invalid_argument outside [2, 2^40].
PrimeTable sieve_primes(std::uint64_t limit);
// Plain single-array sieve of Eratosthenes. Reference implementation.
PrimeTable sieve_primes_serial(std::uint64_t limit);

// n^e with an integer-boundary guard: when the double result lies within
// 1e-9 of an integer the power is recomputed in extended precision. All
// floor decisions in this library go through this function.
long double guarded_power(std::uint64_t n, double exponent);

// [-p^gamma] - [-(p+1)^gamma]; 1 iff p = [m^{1/gamma}] for some integer m.
int ps_indicator(std::uint64_t p, const GammaExponent& gamma);

struct PSEntry {
  std::uint64_t p = 0;
  double weight_w = 0.0;    // p^{1-gamma}
  double weight_log = 0.0;  // log p
};

struct PSPrimeSet {
  GammaExponent gamma{0.5};
  double lo = 0.0;
  double hi = 0.0;
  std::vector<PSEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::vector<std::uint64_t> values() const;
};

PSEntry make_entry(std::uint64_t p, const GammaExponent& gamma);

// Primes p in (lo, hi] with ps_indicator(p) = 1. Throws std::invalid_argument
// when floor(hi) exceeds the table limit.
PSPrimeSet ps_primes_in(double lo, double hi, const GammaExponent& gamma,
                        const PrimeTable& table);

// Enumerates [n^{1/gamma}] for n = 1 .. ceil((limit+1)^gamma) and keeps the
// prime values <= limit. Uses its own serial sieve and never calls
// ps_indicator.
PSPrimeSet ps_enumerate_oracle(std::uint64_t limit, const GammaExponent& gamma);

// Sub-range (lo, hi] of an existing set.
PSPrimeSet restrict_range(const PSPrimeSet& set, double lo, double hi);

// Binary cache, little-endian:
//   "PSP1" | gamma (IEEE-754 bits, u64) | limit (u64) | count (u64) |
//   count x p (u64) | FNV-1a 64 of everything before it (u64)
// Only prefix sets (lo < 2) are cached; limit is floor(hi).
void cache_store(const PSPrimeSet& set, const std::filesystem::path& path);
// Throws IoError on I/O, magic, truncation or checksum problems, and on a
// gamma mismatch when `expected_gamma` is given.
PSPrimeSet cache_load(const std::filesystem::path& path,
                      std::optional<GammaExponent> expected_gamma = {});

}  // namespace psd
