#include "psd/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "psd/approx.hpp"
#include "psd/expsums.hpp"
#include "psd/numeric.hpp"

namespace psd {

using nlohmann::json;

namespace {

std::string csv_row(std::initializer_list<double> values) {
  std::string s;
  for (double v : values) {
    if (!s.empty()) s += ',';
    s += format_double(v);
  }
  s += '\n';
  return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
  return fnv1a64(text.data(), text.size());
}

std::vector<std::string> resolve_stages(const std::string& list) {
  std::set<std::string> want;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (std::find(kStageOrder.begin(), kStageOrder.end(), item) == kStageOrder.end()) {
      throw ConfigError("unknown stage '" + item + "'");
    }
    want.insert(item);
  }
  if (want.empty()) throw ConfigError("no stages given");
  if (want.count("decomp") || want.count("triples")) want.insert("kernel");
  if (want.count("sums") || want.count("kernel")) want.insert("primes");
  std::vector<std::string> out;
  for (const auto& s : kStageOrder) {
    if (want.count(s)) out.push_back(s);
  }
  return out;
}

std::filesystem::path cache_dir(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("PSD_CACHE_DIR"); env && *env) return env;
  return fallback;
}

std::filesystem::path cache_path(const std::filesystem::path& dir, const GammaExponent& gamma,
                                 std::uint64_t limit) {
  const auto bits = std::bit_cast<std::uint64_t>(gamma.value());
  return dir / ("ps_" + hex64(bits) + "_" + std::to_string(limit) + ".bin");
}

PrimeData load_primes(const RunParameters& params, const std::filesystem::path& cache) {
  const auto limit = static_cast<std::uint64_t>(std::floor(params.X()));
  PrimeData d;
  d.table = sieve_primes(limit);
  d.cache_file = cache_path(cache, params.gamma(), limit);
  PSPrimeSet prefix;
  if (std::filesystem::exists(d.cache_file)) {
    prefix = cache_load(d.cache_file, params.gamma());
    d.cache_hit = true;
  } else {
    prefix = ps_primes_in(0.0, static_cast<double>(limit), params.gamma(), d.table);
    std::filesystem::create_directories(cache);
    cache_store(prefix, d.cache_file);
  }
  d.set = restrict_range(prefix, params.lambda0() * params.X(), params.X());
  return d;
}

void RunManifest::write(const std::filesystem::path& path) const {
  write_text(path, doc.dump(2) + "\n");
}

json params_json(const RunParameters& p) {
  json j;
  if (p.q0()) j["q0"] = *p.q0();
  j["gamma"] = p.gamma().value();
  j["theorem_range"] = p.gamma().theorem_range();
  j["lambda0"] = p.lambda0();
  j["X"] = p.X();
  j["Delta"] = p.Delta();
  j["epsilon"] = p.epsilon();
  j["H"] = p.H();
  j["epsilon_user"] = p.epsilon_user() ? json(*p.epsilon_user()) : json(nullptr);
  j["epsilon_eff"] = p.epsilon_eff();
  j["H_eff"] = p.H_eff();
  j["kernel_order"] = p.kernel_order();
  return j;
}

json decomposition_json(const DecompositionResult& r) {
  json j;
  j["gamma_direct"] = r.direct.value;
  j["gamma_direct_log_weights"] = r.direct.value_log;
  j["triples_in_window"] = r.direct.triples_found;
  j["pieces"] = {r.pieces[0], r.pieces[1], r.pieces[2]};
  j["gamma1"] = complex_json(r.gamma1);
  j["gamma2"] = complex_json(r.gamma2);
  j["gamma3_truncated"] = complex_json(r.gamma3);
  j["gamma3_cutoff"] = r.gamma3_cutoff;
  j["gamma3_remainder_bound"] = r.gamma3_remainder;
  j["J"] = r.J;
  j["B"] = {{"value", r.B.value},
            {"feasible", r.B.feasible},
            {"ratio_to_eps_X2", r.B.ratio},
            {"mass_bound", r.B.mass_bound}};
  j["abs_J_minus_B"] = std::abs(r.J - r.B.value);
  j["phi_bound"] = {{"value", r.phi.value}, {"ratio_to_eps_over_Delta2", r.phi.ratio},
                    {"analytic_tail", r.phi.tail}};
  j["tail_bound"] = {{"value", r.tail.value},
                     {"base", r.tail.base},
                     {"k", r.tail.k},
                     {"at_most_one", r.tail.at_most_one},
                     {"rigorous", r.tail_rigorous}};
  if (r.sweep) {
    const auto& s = *r.sweep;
    j["gamma2_majorant"] = {{"nodes", s.nodes},
                            {"T", s.T},
                            {"T_ratio", s.T_ratio},
                            {"sup_min", s.sup_min},
                            {"sup_min_ratio", s.sup_min_ratio},
                            {"chain", s.majorant},
                            {"chain_ratio", s.majorant_ratio}};
  }
  j["closure_error"] = r.closure_error ? json(*r.closure_error) : json(nullptr);
  return j;
}

json triples_json(const TripleSearch& t) {
  json j;
  j["count"] = t.records.size();
  j["candidates"] = t.candidates;
  j["all_verified"] = t.all_verified;
  j["verification_failures"] = t.verification_failures;
  j["theorem_epsilon"] = t.theorem_epsilon;
  j["theorem_epsilon_vacuous"] = t.theorem_epsilon_vacuous;
  j["all_below_theorem_threshold"] = t.all_below_theorem_threshold;
  if (t.theorem_epsilon_vacuous) {
    j["theorem_check"] =
        "vacuously satisfied: theorem-scale epsilon " + format_double(t.theorem_epsilon) +
        " exceeds 1 at this X, so every triple of the box meets the inequality";
  } else {
    j["theorem_check"] = t.all_below_theorem_threshold ? "satisfied" : "not satisfied";
  }
  return j;
}

std::uint64_t write_triples_csv(const std::filesystem::path& path, const TripleSearch& t) {
  std::string s = "p1,p2,p3,form_value,weight\n";
  for (const auto& r : t.records) {
    s += std::to_string(r.p1) + ',' + std::to_string(r.p2) + ',' + std::to_string(r.p3) + ',' +
         format_double(r.form_value) + ',' + format_double(r.weight) + '\n';
  }
  return write_text(path, s);
}

RunManifest run_pipeline(const Instance& inst, const std::vector<std::string>& stages,
                         const PipelineOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(opts.run_dir);
  const fs::path cache = opts.cache ? *opts.cache : cache_dir(opts.run_dir / "cache");

  RunManifest m;
  m.doc["tool_version"] = kToolVersion;
  m.doc["config"] = inst.echo;
  m.doc["parameters"] = params_json(inst.params);
  const Coefficients& c = inst.canonical();
  m.doc["coefficients"] = {{"lambda1", c.lambda1}, {"lambda2", c.lambda2},
                           {"lambda3", c.lambda3}, {"eta", c.eta},
                           {"negated", inst.report.negated},
                           {"permutation", inst.report.permutation}};
  m.doc["stages"] = stages;
  m.doc["complete"] = false;
  m.doc["wall_seconds"] = json::object();
  m.doc["outputs"] = json::object();
  m.doc["results"] = json::object();

  const RunParameters& P = inst.params;
  std::optional<PrimeData> primes;
  std::optional<SmoothingKernel> kernel;
  auto output = [&](const std::string& name, std::uint64_t digest) {
    m.doc["outputs"][name] = hex64(digest);
  };

  std::string current;
  try {
    for (const auto& stage : stages) {
      current = stage;
      const auto t0 = std::chrono::steady_clock::now();
      json& res = m.doc["results"][stage];

      if (stage == "primes") {
        primes = load_primes(P, cache);
        res = {{"cache_file", primes->cache_file.string()},
               {"cache_hit", primes->cache_hit},
               {"primes_to_X", primes->table.primes.size()},
               {"ps_primes_in_range", primes->set.size()}};
      } else if (stage == "kernel") {
        kernel = make_kernel(P.epsilon_eff(), P.kernel_order());
        std::string theta = "y,theta\n";
        for (std::size_t i = 0; i < kernel->grid().size(); ++i) {
          theta += csv_row({kernel->node(i), kernel->grid()[i]});
        }
        output("kernel_theta.csv", write_text(opts.run_dir / "kernel_theta.csv", theta));
        const double e = kernel->epsilon();
        const auto grid = log_grid(1e-3 / e, 1e3 / e, 1000);
        std::string tr = "x,transform,bound\n";
        for (double x : grid) tr += csv_row({x, kernel->transform(x), kernel->transform_bound(x)});
        output("kernel_transform.csv", write_text(opts.run_dir / "kernel_transform.csv", tr));
        const BoundReport br = verify_bounds(*kernel, log_grid(1e-3 / e, 1e3 / e, 10000));
        res = {{"epsilon", e},
               {"k", kernel->k()},
               {"mass", kernel->mass()},
               {"mass_expected", 7.0 * e / 4.0},
               {"bound_violations", br.violations},
               {"bound_max_ratio", br.max_ratio}};
      } else if (stage == "sums") {
        const TermSet terms = s_terms(primes->set);
        const double D = P.Delta();
        std::string s_csv = "alpha,re,im,abs\n";
        std::string i_csv = "alpha,re,im,abs\n";
        const std::size_t n = 201;
        std::vector<double> alphas(n);
        for (std::size_t i = 0; i < n; ++i) {
          alphas[i] = -D + 2.0 * D * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        const auto sv = evaluate_grid(terms, alphas);
        for (std::size_t i = 0; i < n; ++i) {
          const Complex iv = integral_I(alphas[i], P);
          s_csv += csv_row({alphas[i], sv[i].real(), sv[i].imag(), std::abs(sv[i])});
          i_csv += csv_row({alphas[i], iv.real(), iv.imag(), std::abs(iv)});
        }
        output("sums_S.csv", write_text(opts.run_dir / "sums_S.csv", s_csv));
        output("sums_I.csv", write_text(opts.run_dir / "sums_I.csv", i_csv));

        std::string id_csv = "alpha,identity_residual,sigma_gap,abs_S\n";
        double worst = 0.0;
        for (int i = 1; i <= 8; ++i) {
          const double a = std::sqrt(2.0) * i / 17.0;
          const DecompositionResidual r = decomposition_residual(a, P, primes->table);
          worst = std::max(worst, r.identity_residual);
          id_csv += csv_row({a, r.identity_residual, r.sigma_gap, std::abs(r.S)});
        }
        output("identity.csv", write_text(opts.run_dir / "identity.csv", id_csv));
        json l2 = json::array();
        for (double l : c.lambdas()) {
          const L2Result ls = l2_integral(L2Kind::S, l, P, primes->set);
          const L2Result li = l2_integral(L2Kind::I, l, P, primes->set);
          l2.push_back({{"lambda", l}, {"S", ls.value}, {"I", li.value}});
        }
        res = {{"identity_residual_max", worst}, {"l2_window", l2}};
      } else if (stage == "dichotomy") {
        if (!P.q0()) {
          res = {{"skipped", "no q0: X was set directly"}};
        } else {
          const Rational a0q0 = anchor_fraction(c, static_cast<std::int64_t>(*P.q0()));
          const auto reps =
              dichotomy_scan(c, a0q0, P, P.Delta(), P.H_eff(), opts.dichotomy_samples);
          std::string csv = "t,a1,q1,a2,q2,class1,class2,case\n";
          std::map<std::string, std::size_t> counts;
          for (const auto& r : reps) {
            csv += format_double(r.t) + ',' + std::to_string(r.r1.a) + ',' +
                   std::to_string(r.r1.q) + ',' + std::to_string(r.r2.a) + ',' +
                   std::to_string(r.r2.q) + ',' + to_string(r.class1) + ',' +
                   to_string(r.class2) + ',' + to_string(r.outcome) + '\n';
            ++counts[to_string(r.outcome)];
          }
          output("dichotomy.csv", write_text(opts.run_dir / "dichotomy.csv", csv));
          res = {{"anchor", {a0q0.a, a0q0.q}}, {"samples", reps.size()}, {"cases", counts}};
        }
      } else if (stage == "decomp") {
        const DecompositionResult r = decompose(P, c, *kernel, primes->set, opts.pieces);
        res = decomposition_json(r);
        std::string csv = "quantity,value\n";
        auto row = [&](const char* name, double v) { csv += std::string(name) + ',' + format_double(v) + '\n'; };
        row("gamma_direct", r.direct.value);
        row("gamma1_re", r.gamma1.real());
        row("gamma1_im", r.gamma1.imag());
        row("gamma2_re", r.gamma2.real());
        row("gamma3_re", r.gamma3.real());
        row("gamma3_cutoff", r.gamma3_cutoff);
        row("gamma3_remainder_bound", r.gamma3_remainder);
        row("J", r.J);
        row("B", r.B.value);
        row("phi_bound", r.phi.value);
        row("tail_bound", r.tail.value);
        row("tail_bound_rigorous", r.tail_rigorous);
        output("decomp.csv", write_text(opts.run_dir / "decomp.csv", csv));
      } else if (stage == "triples") {
        const TripleSearch t =
            find_triples(P, c, *kernel, primes->set, P.epsilon_eff(), opts.max_triples);
        res = triples_json(t);
        output("triples.csv", write_triples_csv(opts.run_dir / "triples.csv", t));
      }
      m.doc["wall_seconds"][stage] = seconds_since(t0);
    }
  } catch (const std::exception& e) {
    m.doc["failed_stage"] = current;
    m.doc["error"] = e.what();
    m.write(opts.run_dir / "manifest.json");
    throw;
  }
  m.doc["complete"] = true;
  m.write(opts.run_dir / "manifest.json");
  return m;
}

}  // namespace psd
