#include "psd/primes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "psd/numeric.hpp"

namespace psd {

namespace {

std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

void check_limit(std::uint64_t limit) {
  if (limit < 2 || limit > kMaxSieveLimit) {
    throw std::invalid_argument("sieve limit " + std::to_string(limit) +
                                " outside [2, 2^40]");
  }
}

long double guarded_power_impl(std::uint64_t n, long double exponent) {
  const double d = std::pow(static_cast<double>(n), static_cast<double>(exponent));
  if (std::abs(d - std::nearbyint(d)) < 1e-9) {
    return std::pow(static_cast<long double>(n), exponent);
  }
  return d;
}

void put_u64(std::vector<unsigned char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

constexpr char kMagic[4] = {'P', 'S', 'P', '1'};
constexpr std::size_t kHeaderBytes = 4 + 3 * 8;

}  // namespace

bool PrimeTable::contains(std::uint64_t n) const {
  return std::binary_search(primes.begin(), primes.end(), n);
}

std::span<const std::uint64_t> PrimeTable::range(double lo, double hi) const {
  if (!(hi > lo) || hi < 2.0) return {};
  const std::uint64_t first = lo < 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(lo)) + 1;
  const auto last = static_cast<std::uint64_t>(std::floor(hi));
  auto b = std::lower_bound(primes.begin(), primes.end(), first);
  auto e = std::upper_bound(primes.begin(), primes.end(), last);
  if (e <= b) return {};
  return {&*b, static_cast<std::size_t>(e - b)};
}

PrimeTable sieve_primes_serial(std::uint64_t limit) {
  check_limit(limit);
  std::vector<char> composite(limit + 1, 0);
  PrimeTable t;
  t.limit = limit;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    t.primes.push_back(i);
    for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = 1;
  }
  return t;
}

PrimeTable sieve_primes(std::uint64_t limit) {
  check_limit(limit);
  const std::uint64_t root = isqrt(limit);
  const std::vector<std::uint64_t> base =
      root >= 2 ? sieve_primes_serial(root).primes : std::vector<std::uint64_t>{};

  const std::uint64_t segments = limit / kSieveSegment + 1;
  std::vector<std::vector<std::uint64_t>> parts(segments);

#pragma omp parallel
  {
    std::vector<char> composite(kSieveSegment);
#pragma omp for schedule(dynamic)
    for (std::uint64_t s = 0; s < segments; ++s) {
      const std::uint64_t low = s * kSieveSegment;
      const std::uint64_t high = std::min(low + kSieveSegment - 1, limit);
      const std::size_t len = high - low + 1;
      std::fill(composite.begin(), composite.begin() + len, 0);
      for (std::uint64_t p : base) {
        if (p * p > high) break;
        std::uint64_t start = std::max(p * p, (low + p - 1) / p * p);
        for (std::uint64_t j = start; j <= high; j += p) composite[j - low] = 1;
      }
      auto& out = parts[s];
      for (std::uint64_t n = std::max<std::uint64_t>(low, 2); n <= high; ++n) {
        if (!composite[n - low]) out.push_back(n);
      }
    }
  }

  PrimeTable t;
  t.limit = limit;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  t.primes.reserve(total);
  for (const auto& p : parts) t.primes.insert(t.primes.end(), p.begin(), p.end());
  return t;
}

long double guarded_power(std::uint64_t n, double exponent) {
  return guarded_power_impl(n, exponent);
}

int ps_indicator(std::uint64_t p, const GammaExponent& gamma) {
  const long double u = guarded_power(p, gamma.value());
  const long double v = guarded_power(p + 1, gamma.value());
  return static_cast<int>(std::floor(-u) - std::floor(-v));
}

std::vector<std::uint64_t> PSPrimeSet::values() const {
  std::vector<std::uint64_t> v;
  v.reserve(entries.size());
  for (const auto& e : entries) v.push_back(e.p);
  return v;
}

PSEntry make_entry(std::uint64_t p, const GammaExponent& gamma) {
  const auto x = static_cast<double>(p);
  return {p, std::pow(x, 1.0 - gamma.value()), std::log(x)};
}

PSPrimeSet ps_primes_in(double lo, double hi, const GammaExponent& gamma,
                        const PrimeTable& table) {
  if (std::floor(hi) > static_cast<double>(table.limit)) {
    throw std::invalid_argument("ps_primes_in: hi = " + format_double(hi) +
                                " exceeds table limit " + std::to_string(table.limit));
  }
  PSPrimeSet set;
  set.gamma = gamma;
  set.lo = lo;
  set.hi = hi;
  const auto primes = table.range(lo, hi);
  std::vector<char> keep(primes.size());
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < primes.size(); ++i) {
    keep[i] = static_cast<char>(ps_indicator(primes[i], gamma) == 1);
  }
  for (std::size_t i = 0; i < primes.size(); ++i) {
    if (keep[i]) set.entries.push_back(make_entry(primes[i], gamma));
  }
  return set;
}

PSPrimeSet ps_enumerate_oracle(std::uint64_t limit, const GammaExponent& gamma) {
  if (limit < 2) throw std::invalid_argument("ps_enumerate_oracle: limit < 2");
  const PrimeTable table = sieve_primes_serial(limit);
  const long double inv = 1.0L / static_cast<long double>(gamma.value());
  const auto n_max = static_cast<std::uint64_t>(
      std::ceil(std::pow(static_cast<long double>(limit + 1),
                         static_cast<long double>(gamma.value()))));

  PSPrimeSet set;
  set.gamma = gamma;
  set.lo = 0.0;
  set.hi = static_cast<double>(limit);
  std::uint64_t last = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    const auto m = static_cast<std::uint64_t>(std::floor(guarded_power_impl(n, inv)));
    if (m > limit) break;
    if (m == last || m < 2) continue;
    last = m;
    if (table.contains(m)) set.entries.push_back(make_entry(m, gamma));
  }
  return set;
}

PSPrimeSet restrict_range(const PSPrimeSet& set, double lo, double hi) {
  PSPrimeSet out;
  out.gamma = set.gamma;
  out.lo = lo;
  out.hi = hi;
  for (const auto& e : set.entries) {
    const auto p = static_cast<double>(e.p);
    if (p > lo && p <= hi) out.entries.push_back(e);
  }
  return out;
}

void cache_store(const PSPrimeSet& set, const std::filesystem::path& path) {
  if (set.lo >= 2.0) {
    throw std::invalid_argument("cache_store: only prefix sets (lo < 2) are cached");
  }
  std::vector<unsigned char> buf(std::begin(kMagic), std::end(kMagic));
  put_u64(buf, std::bit_cast<std::uint64_t>(set.gamma.value()));
  put_u64(buf, static_cast<std::uint64_t>(std::floor(set.hi)));
  put_u64(buf, set.entries.size());
  for (const auto& e : set.entries) put_u64(buf, e.p);
  put_u64(buf, fnv1a64(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

PSPrimeSet cache_load(const std::filesystem::path& path,
                      std::optional<GammaExponent> expected_gamma) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < kHeaderBytes + 8 || std::memcmp(buf.data(), kMagic, 4) != 0) {
    throw IoError("bad header in " + path.string());
  }
  const std::uint64_t count = get_u64(buf.data() + 20);
  if (count > (buf.size() - kHeaderBytes - 8) / 8 ||
      buf.size() != kHeaderBytes + 8 * count + 8) {
    throw IoError("checksum mismatch in " + path.string() + " (truncated or padded)");
  }
  const std::size_t body = buf.size() - 8;
  if (fnv1a64(buf.data(), body) != get_u64(buf.data() + body)) {
    throw IoError("checksum mismatch in " + path.string());
  }

  const double g = std::bit_cast<double>(get_u64(buf.data() + 4));
  if (expected_gamma && expected_gamma->value() != g) {
    throw IoError("gamma mismatch: cache has " + format_double(g) + ", requested " +
                  format_double(expected_gamma->value()));
  }
  PSPrimeSet set;
  set.gamma = GammaExponent(g);
  set.lo = 0.0;
  set.hi = static_cast<double>(get_u64(buf.data() + 12));
  set.entries.reserve(count);
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t p = get_u64(buf.data() + kHeaderBytes + 8 * i);
    if (p <= prev || static_cast<double>(p) > set.hi) {
      throw IoError("corrupt prime sequence in " + path.string());
    }
    prev = p;
    set.entries.push_back(make_entry(p, set.gamma));
  }
  return set;
}

}  // namespace psd
