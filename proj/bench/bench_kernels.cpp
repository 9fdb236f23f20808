// Serial reference vs OpenMP kernels: wall time and agreement.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "psd/expsums.hpp"
#include "psd/gammadecomp.hpp"
#include "psd/kernel.hpp"
#include "psd/primes.hpp"

using namespace psd;

template <typename F>
static double time_it(F&& f, int reps = 3) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

static void report(const char* name, double serial, double parallel, double diff) {
  std::printf("%-22s serial %9.4f s  omp %9.4f s  speedup %5.2f  max diff %.3g\n", name, serial,
              parallel, serial / parallel, diff);
}

int main(int argc, char** argv) {
  const std::uint64_t limit = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000000;
  std::printf("threads %d, limit %llu\n", omp_get_max_threads(),
              static_cast<unsigned long long>(limit));

  PrimeTable a, b;
  const double ts = time_it([&] { a = sieve_primes_serial(limit); });
  const double tp = time_it([&] { b = sieve_primes(limit); });
  report("sieve", ts, tp, a.primes == b.primes ? 0.0 : 1.0);

  const GammaExponent g(0.9);
  const PSPrimeSet set = ps_primes_in(0.0, static_cast<double>(limit), g, b);
  const TermSet terms = s_terms(set);
  const double alpha = std::sqrt(2.0) / 3.0;
  SumResult rs, rp;
  const double es = time_it([&] { rs = evaluate_serial(terms, alpha); }, 5);
  const double ep = time_it([&] { rp = evaluate(terms, alpha); }, 5);
  report("exp sum", es, ep, std::abs(rs.value - rp.value));

  const PSPrimeSet small = restrict_range(set, 0.0, 4000.0);
  const Coefficients c{1.0, std::sqrt(2.0), -2.0, 0.0};
  const SmoothingKernel K = make_kernel(0.5, 8);
  GammaDirect gb, gm;
  const double gs = time_it([&] { gb = big_gamma_brute(c, K, small, 0.5); }, 1);
  const double gp = time_it([&] { gm = big_gamma_direct(c, K, small, 0.5); }, 1);
  report("gamma brute/mitm", gs, gp, std::abs(gb.value - gm.value));
  std::printf("  %zu primes, %llu triples\n", small.size(),
              static_cast<unsigned long long>(gm.triples_found));
  return 0;
}
