#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "psd/params.hpp"

namespace psd {

// Command-line values that take precedence over the file.
struct ConfigOverrides {
  std::optional<double> epsilon_user;
  // Evaluate at this X instead of q0^{13/6}.
  std::optional<double> x;
  // Replace q0 by the denominator of this convergent of |lambda1/lambda2|.
  std::optional<int> convergent_index;
  // Accept gamma in (0, 1) outside 37/38 < gamma < 1.
  bool allow_outside_theorem = false;
};

struct Instance {
  // Key/value pairs as read, for echoing into manifests.
  std::map<std::string, std::string> echo;
  Coefficients coefficients;  // as given
  CoefficientReport report;
  std::uint64_t q0 = 0;
  RunParameters params;

  // Sign-normalized coefficients used by every computation.
  const Coefficients& canonical() const { return report.canonical; }
};

// key = value lines; '#' starts a comment. Keys: q0, gamma, lambda0 (default
// 0.5), lambda1, lambda2, lambda3, eta (default 0), epsilon_user.
// Syntax errors, unknown or missing keys and out-of-domain values throw
// ConfigError ("<source>:<line>: ..."). All hypothesis checks run and their
// failures are reported together in one HypothesisError.
Instance parse_config_text(const std::string& text, const std::string& source,
                           const ConfigOverrides& overrides = {});
Instance parse_config(const std::filesystem::path& path,
                      const ConfigOverrides& overrides = {});

}  // namespace psd
