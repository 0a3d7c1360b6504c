#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/divergence.hpp"
#include "scolab/instance.hpp"

namespace scolab {

/// bregman:  Pr[T-hat <= T/2] against exp(-T n / (40 c)); T equals D whenever
///           no <g_z, x - x*> falls below -2c.
/// gradient: E ||G-hat - G||_2^2 against (2 max_z ||g_z||_2)^2 / n.
/// variance: per-draw variance of T_z against (4c - T) T.
/// rep:      Pr[Rep(S) > 2 L Rad(n) + c sqrt(2 ln(2/delta) / n)] against delta.
enum class ConcentrationMode { Bregman, Gradient, Variance, Rep };

ConcentrationMode parse_mode(std::string_view name);
std::string mode_name(ConcentrationMode mode);

struct ConcentrationOptions {
  double delta = 0.1;          // rep mode
  double eps = 0.0;            // gradient mode: also report Pr[||G-hat - G||^2 > eps^2] when > 0
  std::vector<Vector> points;  // rep mode: net points; a 0.25-net of K when empty
  unsigned jobs = 1;
};

struct ConcentrationReport {
  ConcentrationMode mode{};
  std::size_t n = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  double empirical = 0.0;
  double analytic_bound = 0.0;
  double mc_stderr = 0.0;
  bool pass = false;  // empirical <= analytic_bound + 3 mc_stderr
  nlohmann::json detail = nlohmann::json::object();

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Runs `trials` (>= 100) fresh samples of size n with per-trial seeds derived
/// from (seed, trial). Bregman mode rejects points with D(x, x*) <= 0.
ConcentrationReport verify_concentration(const Instance& inst, const OptimalityCertificate& cert,
                                         const Vector& x, std::size_t n, std::size_t trials,
                                         std::uint64_t seed, ConcentrationMode mode,
                                         const ConcentrationOptions& opts = {});

enum Claim : std::size_t {
  kBregmanLowerBound,    // F-hat gap <= 5 eps, ||G-hat - G||_2 <= eps  =>  D >= F gap - 7 eps
  kEmpiricalBregmanCap,  // same premise  =>  D-hat <= 7 eps
  kTruncatedEmpiricalCap,// Rep <= 2 eps, F-hat gap <= 6 eps  =>  T-hat <= 8 eps
  kTruncatedLowerBound,  // Rep <= 2 eps, F-hat gap <= 5 eps  =>  T >= F gap - 7 eps
  kClaimCount
};

/// Counts of conditional-claim checks whose premise held and of violations.
struct ClaimTally {
  std::array<std::size_t, kClaimCount> checked{};
  std::array<std::size_t, kClaimCount> violations{};
  std::size_t samples = 0;

  static const char* name(std::size_t claim);
  std::size_t total_violations() const;
  void merge(const ClaimTally& other);
  nlohmann::json to_json() const;
  static ClaimTally from_json(const nlohmann::json& j);
  friend bool operator==(const ClaimTally&, const ClaimTally&) = default;
};

/// Evaluates the four conditional claims at every point for one sample.
/// The first two apply to Euclidean balls only. The truncated claims use the
/// net-restricted Rep over `rep_points` and add a slack of 2 L net_radius; when
/// the certificate is common to all outcomes Rep is exactly 0 and no slack is
/// needed. Without rep points or a radius (and no common certificate) the
/// truncated claims are skipped.
void check_conditional_claims(const OptimalityCertificate& cert, const Instance& inst,
                              const Sample& s, std::span<const Vector> points, double eps,
                              std::span<const Vector> rep_points, std::optional<double> net_radius,
                              ClaimTally& tally);

}  // namespace scolab
