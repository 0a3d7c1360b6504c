#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/verify.hpp"

namespace scolab::cli {

struct CheckOutcome {
  std::string name;
  std::string type;
  bool pass = false;
  nlohmann::json detail;
};

struct SuiteResult {
  std::vector<CheckOutcome> checks;
  std::vector<ConcentrationReport> concentration;

  bool pass() const;
  nlohmann::json to_json() const;
  std::string concentration_csv() const;
};

/// Runs the checks listed in a verify config:
///   {"seed": s, "checks": [{"type": "certificate" | "bregman_identity" |
///    "invariants" | "concentration" | "claims", ...}, ...]}
/// Unknown keys raise ConfigError.
SuiteResult run_checks(const nlohmann::json& config, std::optional<std::uint64_t> seed_override,
                       unsigned jobs, std::ostream* log);

}  // namespace scolab::cli
