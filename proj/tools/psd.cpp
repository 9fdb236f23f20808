// psd: command-line front end for the library.
#include <omp.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "psd/approx.hpp"
#include "psd/config.hpp"
#include "psd/expsums.hpp"
#include "psd/gammadecomp.hpp"
#include "psd/kernel.hpp"
#include "psd/numeric.hpp"
#include "psd/pipeline.hpp"
#include "psd/primes.hpp"

using namespace psd;

namespace {

struct Grid {
  double lo = 0.0, hi = 0.0;
  std::size_t n = 0;
};

Grid parse_grid(const std::string& s, const char* what) {
  Grid g;
  char tail = 0;
  unsigned long long n = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%llu%c", &g.lo, &g.hi, &n, &tail) != 3 || n == 0 ||
      !(g.hi >= g.lo)) {
    throw ConfigError(std::string(what) + ": expected lo:hi:n with lo <= hi, n >= 1");
  }
  g.n = static_cast<std::size_t>(n);
  return g;
}

std::vector<double> grid_points(const Grid& g) {
  std::vector<double> v(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    v[i] = g.n == 1 ? g.lo
                    : g.lo + (g.hi - g.lo) * static_cast<double>(i) / static_cast<double>(g.n - 1);
  }
  if (g.n > 1) v.back() = g.hi;
  return v;
}

std::string row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  return s + '\n';
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Piatetski-Shapiro prime triples: sums, kernels, decomposition and search"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads")->check(CLI::PositiveNumber);

  ConfigOverrides ov;
  std::string config_path;
  auto add_instance_opts = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Instance file (key = value)")->required();
    sub->add_option("--eps-user", ov.epsilon_user, "Override epsilon for kernel and search");
    sub->add_option("--x", ov.x, "Evaluate at this X instead of q0^{13/6}");
    sub->add_flag("--allow-outside-theorem", ov.allow_outside_theorem,
                  "Accept gamma outside 37/38 < gamma < 1");
  };

  // ps-primes
  auto* ps = app.add_subcommand("ps-primes", "List Piatetski-Shapiro primes, one per line");
  double ps_gamma = 0.0;
  std::uint64_t ps_limit = 0;
  std::string ps_range, ps_cache;
  ps->add_option("--gamma", ps_gamma, "Exponent in (0, 1)")->required();
  ps->add_option("--limit", ps_limit, "Upper limit")->required();
  ps->add_option("--range", ps_range, "Restrict output to (lo, hi]");
  ps->add_option("--cache", ps_cache, "Cache file (read if present, else written)");

  // kernel
  auto* kn = app.add_subcommand("kernel", "Smoothing kernel and its transform bounds");
  double kn_eps = 0.0;
  int kn_k = 0;
  std::size_t kn_points = 200;
  std::string kn_theta;
  bool kn_verify = false;
  kn->add_option("--epsilon", kn_eps, "Half-width of the support")->required();
  kn->add_option("--k", kn_k, "Smoothness order")->required();
  kn->add_option("--points", kn_points, "Points of the x,transform,bound table");
  kn->add_option("--emit-theta", kn_theta, "Write y,theta CSV to this file");
  kn->add_flag("--verify", kn_verify, "Check |Theta| against the bound on 1e4 points");

  // sums
  auto* sm = app.add_subcommand("sums", "Evaluate S, Sigma, Omega, I or Psi on an alpha grid");
  std::string sm_kind = "S", sm_grid;
  add_instance_opts(sm);
  sm->add_option("--kind", sm_kind, "S, Sigma, Omega, I or Psi")
      ->check(CLI::IsMember({"S", "Sigma", "Omega", "I", "Psi"}));
  sm->add_option("--alpha-grid", sm_grid, "lo:hi:n")->required();

  // cf
  auto* cf = app.add_subcommand("cf", "Continued fraction and convergents");
  double cf_x = 0.0;
  int cf_terms = 20;
  cf->add_option("--x", cf_x, "Value to expand")->required();
  cf->add_option("--terms", cf_terms, "Maximum number of partial quotients");

  // dichotomy
  auto* dc = app.add_subcommand("dichotomy", "Denominator dichotomy along a t grid");
  std::string dc_grid;
  add_instance_opts(dc);
  dc->add_option("--t-grid", dc_grid, "lo:hi:n (default Delta:H:1000)");
  dc->add_option("--convergent-index", ov.convergent_index,
                 "Use the denominator of this convergent of lambda1/lambda2 as q0");

  // gamma-decomp
  auto* gd = app.add_subcommand("gamma-decomp", "Gamma(X), its pieces, J, B, Phi and bounds");
  std::string gd_triples, gd_pieces = "1,2,3";
  std::size_t gd_max = 1000;
  add_instance_opts(gd);
  gd->add_option("--emit-triples", gd_triples, "Write p1,p2,p3,form_value,weight CSV");
  gd->add_option("--max-triples", gd_max, "Triples kept for --emit-triples");
  gd->add_option("--pieces", gd_pieces, "Subset of 1,2,3");

  // run
  auto* rn = app.add_subcommand("run", "Run pipeline stages into a run directory");
  std::string rn_stages = "primes,kernel,sums,dichotomy,decomp,triples", rn_out = "run";
  std::size_t rn_max = 1000;
  add_instance_opts(rn);
  rn->add_option("--stages", rn_stages, "Comma-separated stage list");
  rn->add_option("--out", rn_out, "Run directory");
  rn->add_option("--max-triples", rn_max, "Triples kept by the triples stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (*ps) {
      const GammaExponent g(ps_gamma);
      PSPrimeSet set;
      if (!ps_cache.empty() && std::filesystem::exists(ps_cache)) {
        set = cache_load(ps_cache, g);
        if (set.hi < static_cast<double>(ps_limit)) {
          throw IoError("cache " + ps_cache + " only reaches " + format_double(set.hi));
        }
      } else {
        set = ps_primes_in(0.0, static_cast<double>(ps_limit), g, sieve_primes(ps_limit));
        if (!ps_cache.empty()) cache_store(set, ps_cache);
      }
      double lo = 0.0, hi = static_cast<double>(ps_limit);
      if (!ps_range.empty()) {
        char tail = 0;
        if (std::sscanf(ps_range.c_str(), "%lf:%lf%c", &lo, &hi, &tail) != 2) {
          throw ConfigError("--range: expected lo:hi");
        }
      }
      std::string out;
      for (const auto& e : restrict_range(set, lo, hi).entries) out += std::to_string(e.p) + '\n';
      std::cout << out;
      return 0;
    }

    if (*kn) {
      const SmoothingKernel K = make_kernel(kn_eps, kn_k);
      if (!kn_theta.empty()) {
        std::string s = "y,theta\n";
        for (std::size_t i = 0; i < K.grid().size(); ++i) s += row({K.node(i), K.grid()[i]});
        write_text(kn_theta, s);
      }
      std::string s = "x,transform,bound\n";
      for (double x : log_grid(1e-3 / kn_eps, 1e3 / kn_eps, kn_points)) {
        s += row({x, K.transform(x), K.transform_bound(x)});
      }
      std::cout << s;
      if (kn_verify) {
        const BoundReport r = verify_bounds(K, log_grid(1e-3 / kn_eps, 1e3 / kn_eps, 10000));
        std::cerr << "points " << r.points << ", violations " << r.violations
                  << ", max |Theta|/bound " << format_double(r.max_ratio) << '\n';
        return r.violations == 0 ? 0 : 1;
      }
      return 0;
    }

    if (*cf) {
      const ConvergentSeq seq = continued_fraction(cf_x, cf_terms);
      std::string s = "i,partial_quotient,a,q\n";
      for (std::size_t i = 0; i < seq.convergents.size(); ++i) {
        s += std::to_string(i) + ',' + std::to_string(seq.partial_quotients[i]) + ',' +
             std::to_string(seq.convergents[i].a) + ',' + std::to_string(seq.convergents[i].q) +
             '\n';
      }
      std::cout << s;
      if (seq.rational_at_precision) std::cerr << "rational at double precision\n";
      if (seq.precision_exhausted) std::cerr << "stopped: double precision exhausted\n";
      return 0;
    }

    const Instance inst = parse_config(config_path, ov);
    const RunParameters& P = inst.params;
    const Coefficients& c = inst.canonical();

    if (*sm) {
      const std::vector<double> alphas = grid_points(parse_grid(sm_grid, "--alpha-grid"));
      std::vector<Complex> vals(alphas.size());
      if (sm_kind == "I") {
        for (std::size_t i = 0; i < alphas.size(); ++i) vals[i] = integral_I(alphas[i], P);
      } else {
        const PrimeTable table = sieve_primes(static_cast<std::uint64_t>(std::floor(P.X())));
        TermSet terms;
        if (sm_kind == "S") {
          terms = s_terms(ps_primes_in(P.lambda0() * P.X(), P.X(), P.gamma(), table));
        } else if (sm_kind == "Sigma") {
          terms = sigma_terms(P, table);
        } else if (sm_kind == "Omega") {
          terms = omega_terms(P, table);
        } else {
          terms = psi_terms(P.X(), table);
        }
        vals = evaluate_grid(terms, alphas);
      }
      std::string s = "alpha,re,im,abs\n";
      for (std::size_t i = 0; i < alphas.size(); ++i) {
        s += row({alphas[i], vals[i].real(), vals[i].imag(), std::abs(vals[i])});
      }
      std::cout << s;
      return 0;
    }

    if (*dc) {
      if (!P.q0()) throw ConfigError("dichotomy needs q0 (not --x)");
      const Grid g = dc_grid.empty() ? Grid{P.Delta(), P.H_eff(), 1000}
                                     : parse_grid(dc_grid, "--t-grid");
      const Rational a0q0 = anchor_fraction(c, static_cast<std::int64_t>(*P.q0()));
      std::vector<DichotomyReport> reps;
      try {
        reps = dichotomy_scan(c, a0q0, P, g.lo, g.hi, g.n);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
      std::string s = "t,a1,q1,a2,q2,class1,class2,case\n";
      for (const auto& r : reps) {
        s += format_double(r.t) + ',' + std::to_string(r.r1.a) + ',' + std::to_string(r.r1.q) +
             ',' + std::to_string(r.r2.a) + ',' + std::to_string(r.r2.q) + ',' +
             to_string(r.class1) + ',' + to_string(r.class2) + ',' + to_string(r.outcome) + '\n';
      }
      std::cout << s;
      return 0;
    }

    if (*gd) {
      std::array<bool, 3> pieces = {false, false, false};
      std::stringstream ss(gd_pieces);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (item != "1" && item != "2" && item != "3") {
          throw ConfigError("--pieces: expected a subset of 1,2,3");
        }
        pieces[static_cast<std::size_t>(item[0] - '1')] = true;
      }
      const PrimeData data = load_primes(P, cache_dir(std::filesystem::temp_directory_path() /
                                                      "psd-cache"));
      const SmoothingKernel K = make_kernel(P.epsilon_eff(), P.kernel_order());
      const DecompositionResult r = decompose(P, c, K, data.set, pieces);
      nlohmann::json m;
      m["tool_version"] = kToolVersion;
      m["config"] = inst.echo;
      m["parameters"] = params_json(P);
      m["decomposition"] = decomposition_json(r);
      if (!gd_triples.empty()) {
        const TripleSearch t = find_triples(P, c, K, data.set, P.epsilon_eff(), gd_max);
        m["triples"] = triples_json(t);
        m["triples"]["csv_digest"] = hex64(write_triples_csv(gd_triples, t));
      }
      std::cout << m.dump(2) << '\n';
      return 0;
    }

    if (*rn) {
      PipelineOptions opts;
      opts.run_dir = rn_out;
      opts.max_triples = rn_max;
      const RunManifest m = run_pipeline(inst, resolve_stages(rn_stages), opts);
      std::cout << (opts.run_dir / "manifest.json").string() << '\n';
      return m.complete() ? 0 : 1;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis violation: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
