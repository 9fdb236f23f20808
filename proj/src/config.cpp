#include "psd/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "psd/approx.hpp"
#include "psd/numeric.hpp"

namespace psd {

namespace {

const std::set<std::string> kKeys = {"q0",      "gamma",   "lambda0", "lambda1",
                                     "lambda2", "lambda3", "eta",     "epsilon_user"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& v, const std::string& where) {
  double out = 0.0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(where + ": not a finite real number: '" + v + "'");
  }
  return out;
}

std::uint64_t parse_uint(const std::string& v, const std::string& where) {
  std::uint64_t out = 0;
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(where + ": not a non-negative integer: '" + v + "'");
  }
  return out;
}

}  // namespace

Instance parse_config_text(const std::string& text, const std::string& source,
                           const ConfigOverrides& overrides) {
  std::map<std::string, std::pair<std::string, int>> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError(where + ": expected 'key = value'");
    if (!kKeys.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (kv.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    kv[key] = {value, lineno};
  }

  auto where = [&](const std::string& key) {
    return source + ":" + std::to_string(kv.at(key).second);
  };
  auto required = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(source + ": required key '" + key + "' missing");
    return it->second.first;
  };
  auto real = [&](const std::string& key) {
    const std::string& v = required(key);
    return parse_real(v, where(key));
  };

  const double gamma_raw = real("gamma");
  std::optional<GammaExponent> gamma;
  try {
    gamma.emplace(gamma_raw);
  } catch (const ConfigError& e) {
    throw ConfigError(where("gamma") + ": " + e.what());
  }
  Coefficients c;
  c.lambda1 = real("lambda1");
  c.lambda2 = real("lambda2");
  c.lambda3 = real("lambda3");
  c.eta = kv.count("eta") ? real("eta") : 0.0;
  const double lambda0 = kv.count("lambda0") ? real("lambda0") : 0.5;
  if (!(lambda0 > 0.0 && lambda0 < 1.0)) {
    throw ConfigError(where("lambda0") + ": lambda0 must lie in (0, 1)");
  }
  std::uint64_t q0 = 0;
  if (kv.count("q0")) {
    q0 = parse_uint(required("q0"), where("q0"));
  } else if (!overrides.x) {
    throw ConfigError(source + ": required key 'q0' missing");
  }
  if (kv.count("q0") && q0 < 2) throw ConfigError(where("q0") + ": q0 must be at least 2");
  if (overrides.convergent_index) {
    const int i = *overrides.convergent_index;
    if (i < 0 || overrides.x) throw ConfigError("--convergent-index: needs i >= 0 and no --x");
    if (!(c.lambda2 != 0.0)) throw ConfigError(source + ": lambda2 must be nonzero");
    const ConvergentSeq seq = continued_fraction(std::abs(c.lambda1 / c.lambda2), i + 1);
    if (static_cast<std::size_t>(i) >= seq.convergents.size()) {
      throw ConfigError("--convergent-index " + std::to_string(i) + ": only " +
                        std::to_string(seq.convergents.size()) + " convergents available");
    }
    q0 = static_cast<std::uint64_t>(seq.convergents[static_cast<std::size_t>(i)].q);
    if (q0 < 2) throw ConfigError("--convergent-index " + std::to_string(i) + ": q0 < 2");
  }
  std::optional<double> eps_user = overrides.epsilon_user;
  if (!eps_user && kv.count("epsilon_user")) eps_user = real("epsilon_user");
  if (eps_user && !(*eps_user > 0.0)) {
    throw ConfigError(source + ": epsilon_user must be positive");
  }

  std::vector<std::string> failures;
  CoefficientReport report = validate_coefficients(c);
  for (const auto& f : report.failures) failures.push_back(f);
  if (!gamma->theorem_range() && !overrides.allow_outside_theorem) {
    failures.push_back("gamma = " + required("gamma") +
                       " outside 37/38 < gamma < 1 (use --allow-outside-theorem)");
  }
  std::optional<RunParameters> params;
  try {
    params = overrides.x ? derive_parameters_from_x(*overrides.x, *gamma, lambda0, eps_user)
                         : derive_parameters(q0, *gamma, lambda0, eps_user);
  } catch (const HypothesisError& e) {
    failures.push_back(e.what());
  }
  if (params && report.pass &&
      !feasible_box_check(report.canonical, lambda0, params->X(), params->epsilon_eff())) {
    failures.push_back("box (lambda0 X, X]^3 contains no point with |form| < epsilon");
  }
  if (!failures.empty()) {
    std::string msg = source + ": hypothesis check failed:";
    for (const auto& f : failures) msg += "\n  - " + f;
    throw HypothesisError(msg);
  }

  Instance inst{{}, c, report, q0, *params};
  for (const auto& [k, v] : kv) inst.echo[k] = v.first;
  return inst;
}

Instance parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string(), overrides);
}

}  // namespace psd
