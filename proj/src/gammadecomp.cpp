#include "psd/gammadecomp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace psd {

namespace {

constexpr double kRefineTol = 1e-9;
constexpr std::size_t kMaxRefine = std::size_t{1} << 24;
constexpr std::size_t kBlock = 4096;

struct Third {
  double v;
  std::uint32_t idx;
};

struct Prepared {
  std::vector<double> w;    // p^{1-gamma} log p
  std::vector<double> lg;   // log p
  std::vector<double> lp;   // lambda1 p
  std::vector<double> mp;   // lambda2 p
  std::vector<Third> third; // lambda3 p, sorted
};

Prepared prepare(const Coefficients& c, const PSPrimeSet& set) {
  Prepared p;
  const std::size_t n = set.size();
  p.w.resize(n);
  p.lg.resize(n);
  p.lp.resize(n);
  p.mp.resize(n);
  p.third.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = set.entries[i];
    const auto x = static_cast<double>(e.p);
    p.w[i] = e.weight_w * e.weight_log;
    p.lg[i] = e.weight_log;
    p.lp[i] = c.lambda1 * x;
    p.mp[i] = c.lambda2 * x;
    p.third[i] = {c.lambda3 * x, static_cast<std::uint32_t>(i)};
  }
  std::sort(p.third.begin(), p.third.end(), [](const Third& a, const Third& b) {
    return a.v < b.v || (a.v == b.v && a.idx < b.idx);
  });
  return p;
}

// Indices [first, last) of sorted third values v with |s + v| < eps. Float
// addition of a fixed s is monotone in v, so both predicates partition.
std::pair<std::size_t, std::size_t> window(const std::vector<Third>& third, double s,
                                           double eps) {
  const auto b = std::partition_point(third.begin(), third.end(),
                                      [&](const Third& t) { return s + t.v <= -eps; });
  const auto e = std::partition_point(b, third.end(),
                                      [&](const Third& t) { return s + t.v < eps; });
  return {static_cast<std::size_t>(b - third.begin()),
          static_cast<std::size_t>(e - third.begin())};
}

void check_kernel(const SmoothingKernel& kernel, double eps_search) {
  if (std::abs(kernel.epsilon() - eps_search) > 1e-12 * eps_search) {
    throw std::invalid_argument("kernel epsilon " + format_double(kernel.epsilon()) +
                                " differs from eps_search " + format_double(eps_search));
  }
}

bool is_prime_trial(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2) {
    if (n % d == 0) return false;
  }
  return true;
}

// p = [m^{1/gamma}] for the one candidate m = ceil(p^gamma), in long double.
bool is_ps_value(std::uint64_t p, double gamma) {
  const long double g = gamma;
  const long double m = std::ceil(std::pow(static_cast<long double>(p), g));
  for (long double mm : {m - 1.0L, m, m + 1.0L}) {
    if (mm < 1.0L) continue;
    const long double v = std::floor(std::pow(mm, 1.0L / g));
    if (v == static_cast<long double>(p)) return true;
  }
  return false;
}

double theorem_threshold(std::uint64_t max_p, double gamma) {
  const double l = std::log(static_cast<double>(max_p));
  return std::exp((37.0 - 38.0 * gamma) / 26.0 * l + 10.0 * std::log(l));
}

// Accumulators of one sweep block.
struct SweepAcc {
  CompensatedComplexSum F;
  CompensatedSum m1, m2, m3;
  std::array<CompensatedSum, 3> T;
  double sup_min = 0.0;
};

struct Block {
  double lo, hi, h;
  std::size_t n, i0, i1;  // segment intervals, node range [i0, i1)
};

std::vector<Block> log_split_blocks(double lo, double hi, double h_max) {
  std::vector<Block> blocks;
  double a = lo;
  while (a < hi) {
    const double b = std::min(2.0 * a, hi);
    auto n = static_cast<std::size_t>(std::ceil((b - a) / h_max));
    n = std::max<std::size_t>(2, n + (n % 2));
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i0 = 0; i0 < n; i0 += kBlock) {
      const std::size_t i1 = std::min(n, i0 + kBlock);
      blocks.push_back({a, b, h, n, i0, i1 == n ? n + 1 : i1});
    }
    a = b;
  }
  return blocks;
}

// Positive-t half of int Theta S(l1 t) S(l2 t) S(l3 t) e(eta t) over [lo, hi].
std::vector<SweepAcc> sweep_range(double lo, double hi, double h_max, const Coefficients& c,
                                  const SmoothingKernel& kernel, const PeriodicSumTable& S,
                                  std::size_t* nodes) {
  const std::vector<Block> blocks = log_split_blocks(lo, hi, h_max);
  std::vector<SweepAcc> acc(blocks.size());
  std::size_t total = 0;
  for (const auto& b : blocks) total += b.i1 - b.i0;
  if (nodes) *nodes = total;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    SweepAcc& a = acc[bi];
    for (std::size_t i = b.i0; i < b.i1; ++i) {
      const double t = i == b.n ? b.hi : b.lo + static_cast<double>(i) * b.h;
      const double wq = simpson_weight(i, b.n) * b.h / 3.0;
      const Complex s1 = S(c.lambda1 * t);
      const Complex s2 = S(c.lambda2 * t);
      const Complex s3 = S(c.lambda3 * t);
      const double th = kernel.transform(t);
      Complex f = th * (s1 * s2 * s3);
      if (c.eta != 0.0) f *= phase_of_product(c.eta, t);
      a.F.add(wq * f);
      const double a1 = std::abs(s1);
      const double a2 = std::abs(s2);
      const double a3 = std::abs(s3);
      const double mn = std::min(a1, a2);
      a.m1.add(wq * std::abs(th) * a1 * a2 * a3);
      a.m2.add(wq * mn * (a1 * a3 + a2 * a3));
      a.m3.add(wq * mn * (a1 * a1 + a2 * a2 + a3 * a3));
      a.T[0].add(wq * a1 * a1);
      a.T[1].add(wq * a2 * a2);
      a.T[2].add(wq * a3 * a3);
      a.sup_min = std::max(a.sup_min, mn);
    }
  }
  return acc;
}

SweepAcc combine(const std::vector<SweepAcc>& parts) {
  SweepAcc total;
  for (const auto& p : parts) {
    total.F.add(p.F);
    total.m1.add(p.m1);
    total.m2.add(p.m2);
    total.m3.add(p.m3);
    for (int k = 0; k < 3; ++k) total.T[k].add(p.T[k]);
    total.sup_min = std::max(total.sup_min, p.sup_min);
  }
  return total;
}

// Composite Simpson over [lo, hi] of f evaluated at a whole grid, n halved
// steps until the change is below kRefineTol times int |f|.
template <typename GridFn>
std::pair<Complex, std::size_t> refine_simpson(GridFn&& f, double lo, double hi,
                                               std::size_t n0) {
  std::size_t n = std::max<std::size_t>(16, n0 + (n0 % 2));
  auto run = [&](std::size_t m) {
    const double h = (hi - lo) / static_cast<double>(m);
    std::vector<double> t(m + 1);
    for (std::size_t i = 0; i <= m; ++i) t[i] = lo + h * static_cast<double>(i);
    t[m] = hi;
    const std::vector<Complex> v = f(t);
    CompensatedComplexSum acc;
    CompensatedSum mag;
    for (std::size_t i = 0; i <= m; ++i) {
      const double w = simpson_weight(i, m) * h / 3.0;
      acc.add(w * v[i]);
      mag.add(w * std::abs(v[i]));
    }
    return std::pair{acc.value(), mag.value()};
  };
  auto [prev, mag] = run(n);
  while (true) {
    n *= 2;
    if (n > kMaxRefine) throw NumericError("quadrature did not converge within 2^24 nodes");
    const auto [cur, cur_mag] = run(n);
    if (std::abs(cur - prev) <= kRefineTol * std::max(cur_mag, 1e-300)) return {cur, n + 1};
    prev = cur;
  }
}

double max_abs_lambda(const Coefficients& c) {
  return std::max({std::abs(c.lambda1), std::abs(c.lambda2), std::abs(c.lambda3)});
}

}  // namespace

GammaDirect big_gamma_direct(const Coefficients& c, const SmoothingKernel& kernel,
                             const PSPrimeSet& set, double eps_search) {
  check_kernel(kernel, eps_search);
  GammaDirect r;
  if (set.empty()) {
    r.empty_set = true;
    return r;
  }
  const Prepared p = prepare(c, set);
  const std::size_t n = set.size();
  std::vector<CompensatedSum> part_w(n), part_l(n);
  std::vector<std::uint64_t> part_n(n, 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = (p.lp[i] + p.mp[j]) + c.eta;
      const auto [b, e] = window(p.third, s, eps_search);
      for (std::size_t q = b; q < e; ++q) {
        const std::uint32_t k = p.third[q].idx;
        const double th = kernel.theta(s + p.third[q].v);
        part_w[i].add(th * (p.w[i] * p.w[j] * p.w[k]));
        part_l[i].add(th * (p.lg[i] * p.lg[j] * p.lg[k]));
        ++part_n[i];
      }
    }
  }
  CompensatedSum tw, tl;
  for (std::size_t i = 0; i < n; ++i) {
    tw.add(part_w[i]);
    tl.add(part_l[i]);
    r.triples_found += part_n[i];
  }
  r.value = tw.value();
  r.value_log = tl.value();
  return r;
}

GammaDirect big_gamma_brute(const Coefficients& c, const SmoothingKernel& kernel,
                            const PSPrimeSet& set, double eps_search) {
  check_kernel(kernel, eps_search);
  GammaDirect r;
  if (set.empty()) {
    r.empty_set = true;
    return r;
  }
  const Prepared p = prepare(c, set);
  const std::size_t n = set.size();
  CompensatedSum tw, tl;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double s = (p.lp[i] + p.mp[j]) + c.eta;
      for (std::size_t k = 0; k < n; ++k) {
        const double form = s + c.lambda3 * static_cast<double>(set.entries[k].p);
        if (!(std::abs(form) < eps_search)) continue;
        const double th = kernel.theta(form);
        tw.add(th * (p.w[i] * p.w[j] * p.w[k]));
        tl.add(th * (p.lg[i] * p.lg[j] * p.lg[k]));
        ++r.triples_found;
      }
    }
  }
  r.value = tw.value();
  r.value_log = tl.value();
  return r;
}

TripleSearch find_triples(const RunParameters& params, const Coefficients& c,
                          const SmoothingKernel& kernel, const PSPrimeSet& set,
                          double eps_search, std::size_t max_results) {
  check_kernel(kernel, eps_search);
  TripleSearch out;
  out.theorem_epsilon = params.epsilon();
  out.theorem_epsilon_vacuous = params.epsilon() > 1.0;
  if (set.size() < 3 || max_results == 0) {
    out.all_verified = true;
    out.all_below_theorem_threshold = true;
    return out;
  }
  const Prepared p = prepare(c, set);
  const std::size_t n = set.size();
  const auto key_less = [](const TripleRecord& a, const TripleRecord& b) {
    const double fa = std::abs(a.form_value);
    const double fb = std::abs(b.form_value);
    if (fa != fb) return fa < fb;
    if (a.p1 != b.p1) return a.p1 < b.p1;
    if (a.p2 != b.p2) return a.p2 < b.p2;
    return a.p3 < b.p3;
  };
  std::vector<std::vector<TripleRecord>> parts(n);
  std::vector<std::uint64_t> counts(n, 0);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < n; ++i) {
    auto& keep = parts[i];
    for (std::size_t j = 0; j < n; ++j) {
      const double s = (p.lp[i] + p.mp[j]) + c.eta;
      const auto [b, e] = window(p.third, s, eps_search);
      counts[i] += e - b;
      // The max_results entries nearest to the centre of the window suffice.
      std::size_t lo = b, hi = e;
      if (e - b > max_results) {
        const auto mid = static_cast<std::size_t>(
            std::partition_point(p.third.begin() + static_cast<std::ptrdiff_t>(b),
                                 p.third.begin() + static_cast<std::ptrdiff_t>(e),
                                 [&](const Third& t) { return s + t.v < 0.0; }) -
            p.third.begin());
        lo = mid > b + max_results ? mid - max_results : b;
        hi = std::min(e, mid + max_results);
      }
      for (std::size_t q = lo; q < hi; ++q) {
        const std::uint32_t k = p.third[q].idx;
        TripleRecord rec;
        rec.p1 = set.entries[i].p;
        rec.p2 = set.entries[j].p;
        rec.p3 = set.entries[k].p;
        rec.form_value = s + p.third[q].v;
        rec.weight = kernel.theta(rec.form_value) * (p.lg[i] * p.lg[j] * p.lg[k]);
        keep.push_back(rec);
      }
      if (keep.size() > 4 * max_results) {
        std::nth_element(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(max_results),
                         keep.end(), key_less);
        keep.resize(max_results);
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.candidates += counts[i];
    out.records.insert(out.records.end(), parts[i].begin(), parts[i].end());
  }
  std::sort(out.records.begin(), out.records.end(), key_less);
  if (out.records.size() > max_results) out.records.resize(max_results);

  const double gamma = params.gamma().value();
  out.all_verified = true;
  out.all_below_theorem_threshold = true;
  for (auto& rec : out.records) {
    const std::string tag = "(" + std::to_string(rec.p1) + "," + std::to_string(rec.p2) +
                            "," + std::to_string(rec.p3) + ")";
    for (std::uint64_t q : {rec.p1, rec.p2, rec.p3}) {
      if (!is_prime_trial(q)) out.verification_failures.push_back(tag + ": not prime");
      if (!is_ps_value(q, gamma)) out.verification_failures.push_back(tag + ": not PS");
    }
    const long double form = static_cast<long double>(c.lambda1) * rec.p1 +
                             static_cast<long double>(c.lambda2) * rec.p2 +
                             static_cast<long double>(c.lambda3) * rec.p3 +
                             static_cast<long double>(c.eta);
    if (!(std::abs(form) < eps_search)) {
      out.verification_failures.push_back(tag + ": form outside window");
    }
    rec.theorem_threshold = theorem_threshold(std::max({rec.p1, rec.p2, rec.p3}), gamma);
    rec.below_theorem_threshold = std::abs(form) < rec.theorem_threshold;
    if (!rec.below_theorem_threshold) out.all_below_theorem_threshold = false;
  }
  out.all_verified = out.verification_failures.empty();
  return out;
}

double quadrature_step(const RunParameters& params, const Coefficients& c) {
  return 1.0 / (8.0 * max_abs_lambda(c) * params.X());
}

PieceResult gamma1(const RunParameters& params, const Coefficients& c,
                   const SmoothingKernel& kernel, const PSPrimeSet& set) {
  const TermSet terms = s_terms(set);
  const double D = params.Delta();
  const double h = quadrature_step(params, c);
  auto f = [&](const std::vector<double>& t) {
    std::vector<double> a1(t.size()), a2(t.size()), a3(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      a1[i] = c.lambda1 * t[i];
      a2[i] = c.lambda2 * t[i];
      a3[i] = c.lambda3 * t[i];
    }
    const auto s1 = evaluate_grid(terms, a1);
    const auto s2 = evaluate_grid(terms, a2);
    const auto s3 = evaluate_grid(terms, a3);
    std::vector<Complex> v(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      v[i] = kernel.transform(t[i]) * (s1[i] * s2[i] * s3[i]);
      if (c.eta != 0.0) v[i] *= phase_of_product(c.eta, t[i]);
    }
    return v;
  };
  const auto [value, nodes] =
      refine_simpson(f, -D, D, static_cast<std::size_t>(std::ceil(2.0 * D / h)));
  return {value, nodes};
}

Gamma2Sweep gamma2_sweep(const RunParameters& params, const Coefficients& c,
                         const SmoothingKernel& kernel, const PSPrimeSet& set) {
  Gamma2Sweep r;
  const double D = params.Delta();
  const double H = params.H_eff();
  const PeriodicSumTable table(s_terms(set));
  const SweepAcc a =
      combine(sweep_range(D, H, quadrature_step(params, c), c, kernel, table, &r.nodes));

  const double eps = kernel.epsilon();
  const double cap = 2.0 * 7.0 * eps / 4.0;
  r.gamma2 = {2.0 * a.F.value().real(), 0.0};
  for (int k = 0; k < 3; ++k) r.T[k] = a.T[k].value();
  r.sup_min = a.sup_min;
  r.majorant[0] = 2.0 * a.m1.value();
  r.majorant[1] = cap * a.m2.value();
  r.majorant[2] = cap * a.m3.value();
  r.majorant[3] = cap * a.sup_min * (r.T[0] + r.T[1] + r.T[2]);

  const double X = params.X();
  const double L = std::log(X);
  const double g = params.gamma().value();
  r.sup_min_ratio = r.sup_min / (std::pow(X, (37.0 - 12.0 * g) / 26.0) * std::pow(L, 5));
  for (int k = 0; k < 3; ++k) r.T_ratio[k] = r.T[k] / (H * std::pow(X, 2.0 - g) * L * L);
  r.majorant_ratio = r.majorant[3] / (eps * X * X / L);
  return r;
}

Gamma2Sweep gamma2_majorant(const RunParameters& params, const Coefficients& c,
                            const SmoothingKernel& kernel, const PSPrimeSet& set) {
  return gamma2_sweep(params, c, kernel, set);
}

double gamma3_cutoff(const RunParameters& params, const Coefficients& c,
                     const SmoothingKernel& kernel) {
  const double H = params.H_eff();
  const double T = H * std::pow(10.0, 3.0 / (kernel.k() + 1.0));
  return std::min(T, H + kGamma3MaxNodes * quadrature_step(params, c));
}

Gamma3Truncated gamma3_truncated(const RunParameters& params, const Coefficients& c,
                                 const SmoothingKernel& kernel, const PSPrimeSet& set) {
  const double H = params.H_eff();
  Gamma3Truncated r;
  r.T = gamma3_cutoff(params, c, kernel);
  r.remainder_bound = tail_bound_rigorous_from(r.T, kernel, set);
  const PeriodicSumTable table(s_terms(set));
  const SweepAcc a = combine(sweep_range(H, r.T, quadrature_step(params, c), c, kernel, table,
                                         &r.nodes));
  r.value = {2.0 * a.F.value().real(), 0.0};
  return r;
}

Complex gamma_piece(int piece, const RunParameters& params, const Coefficients& c,
                    const SmoothingKernel& kernel, const PSPrimeSet& set) {
  switch (piece) {
    case 1:
      return gamma1(params, c, kernel, set).value;
    case 2:
      return gamma2_sweep(params, c, kernel, set).gamma2;
    case 3:
      return gamma3_truncated(params, c, kernel, set).value;
    default:
      throw std::invalid_argument("gamma_piece: piece must be 1, 2 or 3");
  }
}

double integral_J(const RunParameters& params, const Coefficients& c,
                  const SmoothingKernel& kernel) {
  const double D = params.Delta();
  const double h = quadrature_step(params, c);
  auto f = [&](const std::vector<double>& t) {
    std::vector<Complex> v(t.size());
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < t.size(); ++i) {
      Complex z = kernel.transform(t[i]) * integral_I(c.lambda1 * t[i], params) *
                  integral_I(c.lambda2 * t[i], params) * integral_I(c.lambda3 * t[i], params);
      if (c.eta != 0.0) z *= phase_of_product(c.eta, t[i]);
      v[i] = z;
    }
    return v;
  };
  return refine_simpson(f, -D, D, static_cast<std::size_t>(std::ceil(2.0 * D / h)))
      .first.real();
}

BoxIntegral box_integral_B(const RunParameters& params, const Coefficients& c,
                           const SmoothingKernel& kernel) {
  BoxIntegral r;
  const double X = params.X();
  const double lo = params.lambda0() * X;
  const double g = params.gamma().value();
  const double eps = kernel.epsilon();
  r.mass_bound = 2.0 * eps * g * g * g * (X - lo) * (X - lo) / std::abs(c.lambda3);
  r.feasible = feasible_box_check(c, params.lambda0(), X, eps);
  if (!r.feasible) return r;
  const double ends[2] = {X, lo};
  CompensatedSum acc;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double u = c.eta + c.lambda1 * ends[i] + c.lambda2 * ends[j] + c.lambda3 * ends[k];
        const double sign = ((i + j + k) % 2 == 0) ? 1.0 : -1.0;
        acc.add(sign * kernel.third_antiderivative(u));
      }
    }
  }
  r.value = g * g * g * acc.value() / (c.lambda1 * c.lambda2 * c.lambda3);
  r.ratio = r.value / (eps * X * X);
  return r;
}

double box_integral_B_quadrature(const RunParameters& params, const Coefficients& c,
                                 const SmoothingKernel& kernel, std::size_t intervals) {
  if (intervals < 2) throw std::invalid_argument("box_integral_B_quadrature: intervals < 2");
  intervals += intervals % 2;
  const double X = params.X();
  const double lo = params.lambda0() * X;
  const double g = params.gamma().value();
  const double ends[2] = {X, lo};
  const double h = (X - lo) / static_cast<double>(intervals);
  std::vector<double> part(intervals + 1);
#pragma omp parallel for schedule(static)
  for (std::size_t n = 0; n <= intervals; ++n) {
    const double y1 = n == intervals ? X : lo + h * static_cast<double>(n);
    double s = 0.0;
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        const double u = c.eta + c.lambda1 * y1 + c.lambda2 * ends[j] + c.lambda3 * ends[k];
        s += (((j + k) % 2 == 0) ? 1.0 : -1.0) * kernel.second_antiderivative(u);
      }
    }
    part[n] = simpson_weight(n, intervals) * s;
  }
  CompensatedSum acc;
  for (double v : part) acc.add(v);
  return g * g * g * acc.value() * h / 3.0 / (c.lambda2 * c.lambda3);
}

PhiBound phi_bound(const RunParameters& params, const SmoothingKernel& kernel,
                   const Coefficients& c) {
  const double D = params.Delta();
  const double eps = kernel.epsilon();
  const double cap = params.gamma().value() * (1.0 - params.lambda0()) * params.X();
  const auto lam = c.lambdas();
  const double T = std::max(4.0 * D, 64.0 / eps);
  const double h_max = 1.0 / (64.0 * eps);

  auto f = [&](double t) {
    double prod = std::abs(kernel.transform(t));
    for (double l : lam) prod *= std::min(cap, 1.0 / (kPi * std::abs(l) * t));
    return prod;
  };
  CompensatedSum acc;
  double a = D;
  while (a < T) {
    const double b = std::min(2.0 * a, T);
    auto n = static_cast<std::size_t>(std::ceil((b - a) / std::min(h_max, (b - a) / 64.0)));
    n += n % 2;
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = i == n ? b : a + h * static_cast<double>(i);
      acc.add(simpson_weight(i, n) * h / 3.0 * f(t));
    }
    a = b;
  }
  PhiBound r;
  const double lam_prod = std::abs(lam[0] * lam[1] * lam[2]);
  r.tail = 1.0 / (std::pow(kPi, 4) * lam_prod * 3.0 * T * T * T);
  r.value = 2.0 * (acc.value() + r.tail);
  r.ratio = r.value / (eps / (D * D));
  return r;
}

TailBound tail_bound_formula(double X, double gamma, double epsilon, double H, int k) {
  if (k < 1) throw std::invalid_argument("tail_bound_formula: k < 1");
  TailBound r;
  r.k = k;
  r.base = 4.0 * k / (kPi * epsilon * H);
  const double log_v = (3.0 - 3.0 * gamma) * std::log(X) - std::log(static_cast<double>(k)) +
                       k * std::log(r.base);
  r.value = std::exp(log_v);
  r.at_most_one = log_v <= 0.0;
  return r;
}

TailBound tail_bound_gamma3(const RunParameters& params, const SmoothingKernel& kernel) {
  return tail_bound_formula(params.X(), params.gamma().value(), kernel.epsilon(),
                            params.H_eff(), kernel.k());
}

double tail_bound_rigorous_from(double T, const SmoothingKernel& kernel, const PSPrimeSet& set) {
  const double W = s_terms(set).abs_weight_sum();
  const int k = kernel.k();
  if (W == 0.0) return 0.0;
  const double base = 4.0 * k / (kPi * kernel.epsilon() * T);
  return std::exp(std::log(2.0) + 3.0 * std::log(W) - std::log(kPi * k) + k * std::log(base));
}

double tail_bound_rigorous(const RunParameters& params, const SmoothingKernel& kernel,
                           const PSPrimeSet& set) {
  return tail_bound_rigorous_from(params.H_eff(), kernel, set);
}

DecompositionResult decompose(const RunParameters& params, const Coefficients& c,
                              const SmoothingKernel& kernel, const PSPrimeSet& set,
                              std::array<bool, 3> pieces) {
  DecompositionResult r;
  r.pieces = pieces;
  r.direct = big_gamma_direct(c, kernel, set, kernel.epsilon());
  if (pieces[0]) r.gamma1 = gamma1(params, c, kernel, set).value;
  if (pieces[1]) {
    r.sweep = gamma2_sweep(params, c, kernel, set);
    r.gamma2 = r.sweep->gamma2;
  }
  r.gamma3_cutoff = gamma3_cutoff(params, c, kernel);
  if (pieces[2]) {
    const Gamma3Truncated g3 = gamma3_truncated(params, c, kernel, set);
    r.gamma3 = g3.value;
    r.gamma3_remainder = g3.remainder_bound;
  }
  r.J = integral_J(params, c, kernel);
  r.B = box_integral_B(params, c, kernel);
  r.phi = phi_bound(params, kernel, c);
  r.tail = tail_bound_gamma3(params, kernel);
  r.tail_rigorous = tail_bound_rigorous(params, kernel, set);
  if (pieces[0] && pieces[1] && pieces[2] && r.direct.value != 0.0) {
    const Complex sum = r.gamma1 + r.gamma2 + r.gamma3;
    r.closure_error = std::abs(sum - r.direct.value) / std::abs(r.direct.value);
  }
  return r;
}

}  // namespace psd
