#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "psd/config.hpp"
#include "psd/numeric.hpp"
#include "psd/pipeline.hpp"

using namespace psd;
namespace fs = std::filesystem;

namespace {

const std::string kSmall =
    "q0 = 29\n"
    "gamma = 0.98\n"
    "lambda0 = 0.5\n"
    "lambda1 = 1.4142135623730951\n"
    "lambda2 = 1\n"
    "lambda3 = -2\n"
    "eta = 0\n"
    "epsilon_user = 0.5\n";

std::string error_of(const std::string& text, const ConfigOverrides& ov = {}) {
  try {
    parse_config_text(text, "t.conf", ov);
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
  s.replace(s.find(from), from.size(), to);
  return s;
}

fs::path fresh_dir(const char* name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("a valid file parses") {
  const Instance inst = parse_config_text(kSmall, "t.conf");
  CHECK(inst.q0 == 29);
  CHECK(inst.params.epsilon_eff() == 0.5);
  CHECK(inst.canonical().lambda1 == std::sqrt(2.0));
  CHECK(inst.echo.at("gamma") == "0.98");
  // Comments and blank lines are ignored; lambda0 and eta have defaults.
  const std::string minimal =
      "# comment\n\nq0 = 29   # trailing\ngamma = 0.98\nlambda1 = 1.4142135623730951\n"
      "lambda2 = 1\nlambda3 = -2\nepsilon_user = 0.5\n";
  const Instance m = parse_config_text(minimal, "m.conf");
  CHECK(m.params.lambda0() == 0.5);
  CHECK(m.coefficients.eta == 0.0);
}

TEST_CASE("syntax and key errors carry source and line") {
  CHECK_THROWS_AS(parse_config_text(kSmall + "garbage\n", "t.conf"), ConfigError);
  CHECK(error_of(kSmall + "garbage\n").find("t.conf:9:") != std::string::npos);
  CHECK(error_of(kSmall + "colour = red\n").find("unknown key 'colour'") != std::string::npos);
  CHECK(error_of(kSmall + "q0 = 70\n").find("t.conf:9: duplicate key 'q0'") != std::string::npos);
  CHECK(error_of(replace(kSmall, "lambda3 = -2\n", "")).find("'lambda3' missing") !=
        std::string::npos);
  CHECK(error_of(replace(kSmall, "gamma = 0.98", "gamma = abc")).find("t.conf:2:") !=
        std::string::npos);
  CHECK(error_of(replace(kSmall, "gamma = 0.98", "gamma = 1.2")).find("t.conf:2:") !=
        std::string::npos);
  CHECK(error_of(replace(kSmall, "q0 = 29", "q0 = -3")).find("t.conf:1:") != std::string::npos);
  CHECK(error_of(replace(kSmall, "q0 = 29", "q0 = 1")).find("at least 2") != std::string::npos);
  CHECK(error_of(replace(kSmall, "lambda0 = 0.5", "lambda0 = 1")).find("(0, 1)") !=
        std::string::npos);
  CHECK(error_of(replace(kSmall, "epsilon_user = 0.5", "epsilon_user = 0")).find("positive") !=
        std::string::npos);
  CHECK_THROWS_AS(parse_config("/nonexistent/psd.conf"), ConfigError);
}

TEST_CASE("hypothesis failures are reported together") {
  // Same signs and gamma outside the theorem range: both listed.
  const std::string bad =
      replace(replace(kSmall, "lambda3 = -2", "lambda3 = 2"), "gamma = 0.98", "gamma = 0.9");
  CHECK_THROWS_AS(parse_config_text(bad, "t.conf"), HypothesisError);
  const std::string msg = error_of(bad);
  CHECK(msg.find("same sign") != std::string::npos);
  CHECK(msg.find("--allow-outside-theorem") != std::string::npos);

  ConfigOverrides ov;
  ov.allow_outside_theorem = true;
  CHECK_NOTHROW(parse_config_text(replace(kSmall, "gamma = 0.98", "gamma = 0.9"), "t.conf", ov));

  // Without epsilon_user the theorem-scale H falls below Delta at q0 = 29.
  CHECK_THROWS_AS(parse_config_text(replace(kSmall, "epsilon_user = 0.5\n", ""), "t.conf"),
                  HypothesisError);
}

TEST_CASE("overrides") {
  ConfigOverrides ov;
  ov.epsilon_user = 0.25;
  CHECK(parse_config_text(kSmall, "t.conf", ov).params.epsilon_eff() == 0.25);

  ConfigOverrides x;
  x.x = 5000.0;
  const Instance ix = parse_config_text(kSmall, "t.conf", x);
  CHECK(ix.params.X() == 5000.0);
  CHECK_FALSE(ix.params.q0().has_value());

  // Convergents of sqrt 2: 1, 3/2, 7/5, 17/12, 41/29, 99/70.
  ConfigOverrides ci;
  ci.convergent_index = 5;
  const Instance i5 = parse_config_text(kSmall, "t.conf", ci);
  CHECK(i5.q0 == 70);
  CHECK(i5.params.q0() == std::optional<std::uint64_t>{70});
  ci.convergent_index = 0;
  CHECK_THROWS_AS(parse_config_text(kSmall, "t.conf", ci), ConfigError);
  ci.convergent_index = -1;
  CHECK_THROWS_AS(parse_config_text(kSmall, "t.conf", ci), ConfigError);
  ci.convergent_index = 3;
  ci.x = 1000.0;
  CHECK_THROWS_AS(parse_config_text(kSmall, "t.conf", ci), ConfigError);
}

TEST_CASE("resolve_stages") {
  CHECK(resolve_stages("primes") == std::vector<std::string>{"primes"});
  CHECK(resolve_stages("triples") == std::vector<std::string>{"primes", "kernel", "triples"});
  CHECK(resolve_stages("decomp,primes") ==
        std::vector<std::string>{"primes", "kernel", "decomp"});
  CHECK(resolve_stages("kernel") == std::vector<std::string>{"primes", "kernel"});
  CHECK(resolve_stages("dichotomy") == std::vector<std::string>{"dichotomy"});
  CHECK(resolve_stages("sums,dichotomy").front() == "primes");
  CHECK_THROWS_AS(resolve_stages("primes,bogus"), ConfigError);
  CHECK_THROWS_AS(resolve_stages(""), ConfigError);
}

TEST_CASE("primes stage writes the cache and a complete manifest") {
  const Instance inst = parse_config_text(kSmall, "t.conf");
  PipelineOptions opts;
  opts.run_dir = fresh_dir("psd_test_run_primes");
  const RunManifest m = run_pipeline(inst, {"primes"}, opts);
  CHECK(m.complete());
  CHECK(fs::exists(opts.run_dir / "manifest.json"));
  const auto& res = m.doc["results"]["primes"];
  CHECK_FALSE(res["cache_hit"].get<bool>());
  CHECK(fs::exists(res["cache_file"].get<std::string>()));
  CHECK(m.doc["outputs"].empty());
  CHECK(m.doc["config"]["q0"] == "29");

  const RunManifest again = run_pipeline(inst, {"primes"}, opts);
  CHECK(again.doc["results"]["primes"]["cache_hit"].get<bool>());
  CHECK(again.doc["results"]["primes"]["ps_primes_in_range"] == res["ps_primes_in_range"]);
  fs::remove_all(opts.run_dir);
}

TEST_CASE("outputs are deterministic") {
  const Instance inst = parse_config_text(kSmall, "t.conf");
  PipelineOptions a, b;
  a.run_dir = fresh_dir("psd_test_run_a");
  b.run_dir = fresh_dir("psd_test_run_b");
  a.dichotomy_samples = b.dichotomy_samples = 200;
  const auto stages = resolve_stages("kernel,dichotomy,triples");
  const RunManifest ma = run_pipeline(inst, stages, a);
  const RunManifest mb = run_pipeline(inst, stages, b);
  REQUIRE(ma.complete());
  CHECK(ma.doc["outputs"] == mb.doc["outputs"]);
  for (const auto& [name, digest] : ma.doc["outputs"].items()) {
    CAPTURE(name);
    const std::string bytes = slurp(a.run_dir / name);
    CHECK(bytes == slurp(b.run_dir / name));
    CHECK(hex64(fnv1a64(bytes.data(), bytes.size())) == digest.get<std::string>());
  }
  fs::remove_all(a.run_dir);
  fs::remove_all(b.run_dir);
}

TEST_CASE("a failing stage leaves an incomplete manifest") {
  // 30 is not a convergent denominator of sqrt 2, so the dichotomy anchor fails.
  const Instance inst = parse_config_text(replace(kSmall, "q0 = 29", "q0 = 30"), "t.conf");
  PipelineOptions opts;
  opts.run_dir = fresh_dir("psd_test_run_fail");
  CHECK_THROWS_AS(run_pipeline(inst, resolve_stages("primes,dichotomy"), opts), HypothesisError);
  std::ifstream in(opts.run_dir / "manifest.json");
  const nlohmann::json doc = nlohmann::json::parse(in);
  CHECK_FALSE(doc["complete"].get<bool>());
  CHECK(doc["failed_stage"] == "dichotomy");
  CHECK_FALSE(doc["error"].get<std::string>().empty());
  CHECK(doc["results"].contains("primes"));
  fs::remove_all(opts.run_dir);
}
