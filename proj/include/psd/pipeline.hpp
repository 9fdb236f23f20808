#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "psd/config.hpp"
#include "psd/gammadecomp.hpp"
#include "psd/kernel.hpp"
#include "psd/primes.hpp"

#include "json.hpp"

namespace psd {

inline constexpr const char* kToolVersion = "0.1.0";

// Stage names in dependency order.
inline const std::vector<std::string> kStageOrder = {"primes", "kernel",    "sums",
                                                     "dichotomy", "decomp", "triples"};

// Splits "a,b,c", rejects unknown names, adds prerequisites and returns the
// stages in dependency order. Throws ConfigError.
std::vector<std::string> resolve_stages(const std::string& list);

// Cache directory: PSD_CACHE_DIR if set, otherwise `fallback`.
std::filesystem::path cache_dir(const std::filesystem::path& fallback);
std::filesystem::path cache_path(const std::filesystem::path& dir, const GammaExponent& gamma,
                                 std::uint64_t limit);

struct PrimeData {
  PrimeTable table;
  PSPrimeSet set;  // PS primes in (lambda0 X, X]
  std::filesystem::path cache_file;
  bool cache_hit = false;
};

// Sieve up to floor(X); the PS prefix set (0, floor X] is read from the cache
// when present, else computed and stored.
PrimeData load_primes(const RunParameters& params, const std::filesystem::path& cache);

class RunManifest {
 public:
  nlohmann::json doc;

  bool complete() const { return doc.value("complete", false); }
  void write(const std::filesystem::path& path) const;
};

struct PipelineOptions {
  std::filesystem::path run_dir = "run";
  std::optional<std::filesystem::path> cache;  // default: run_dir/cache
  std::size_t max_triples = 1000;
  std::size_t dichotomy_samples = 1000;
  std::array<bool, 3> pieces = {true, true, true};
};

// Runs the stages, writing every output plus manifest.json into run_dir.
// A failing stage marks the manifest incomplete, writes it and rethrows.
RunManifest run_pipeline(const Instance& inst, const std::vector<std::string>& stages,
                         const PipelineOptions& opts);

// JSON views shared by the CLI and the pipeline.
nlohmann::json params_json(const RunParameters& p);
nlohmann::json decomposition_json(const DecompositionResult& r);
nlohmann::json triples_json(const TripleSearch& t);

// CSV writers ("%.17g"). Return the FNV-1a 64 digest of the bytes written.
std::uint64_t write_triples_csv(const std::filesystem::path& path, const TripleSearch& t);
std::uint64_t write_text(const std::filesystem::path& path, const std::string& text);
std::string hex64(std::uint64_t v);

}  // namespace psd
