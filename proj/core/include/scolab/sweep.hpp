#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scolab/divergence.hpp"
#include "scolab/instance.hpp"
#include "scolab/net.hpp"
#include "scolab/solver.hpp"
#include "scolab/verify.hpp"

namespace scolab {

inline constexpr int kSweepSchemaVersion = 1;

/// ceil(3 d ln(40/eps) / eps + 40 / eps^2) for eps in (0, 1).
std::size_t theorem_sample_bound(int d, double eps);

/// ceil(12 c d / eps ln(3L/eps) + Rad^-1(eps / 2L) + 8 c^2 / eps^2 ln(4/delta)).
std::size_t theorem_sample_bound_general(int d, double eps, double delta, double L, double c,
                                         const NormBall& ball);

/// 95% Wilson score interval.
std::pair<double, double> wilson_interval(std::size_t failures, std::size_t trials);

/// Pool-adjacent-violators fit of a nonincreasing sequence (equal weights).
std::vector<double> isotonic_nonincreasing(const std::vector<double>& values);

enum class NetMode { Auto, None };

struct SweepConfig {
  /// Instance descriptor as accepted by make_instance. "d" (hard family) and
  /// "dim" (quadratic) are filled from the grid; "m": "auto" means 2^ceil(d/4).
  nlohmann::json family;
  std::vector<int> d_grid;
  std::vector<double> eps_grid;
  std::vector<std::size_t> n_grid;  // empty: locate thresholds instead
  std::size_t trials = 200;
  double multiplier = 40.0;
  double target = 0.25;
  std::uint64_t seed = 0;
  std::string output;
  NetMode net_mode = NetMode::Auto;
  Premise premise = Premise::AtMinimizer;
  bool uniform_convergence = false;
  bool check_claims = true;
  double solver_tol = 1e-3;
  std::size_t max_n = 1 << 16;
  unsigned jobs = 1;

  void validate() const;
  /// Everything that affects results; `output` and `jobs` are left out.
  nlohmann::json to_json() const;
  /// Unknown keys raise ConfigError.
  static SweepConfig from_json(const nlohmann::json& j);
};

/// Builds the instance for grid dimension d from the config's descriptor.
InstancePtr instance_for(const nlohmann::json& family, int d);

struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  double pop_excess = 0.0;
  bool failure = false;
  double wall_ms = 0.0;  // kept in memory only; never serialized

  nlohmann::json to_json() const;
  static TrialRecord from_json(const nlohmann::json& j);
  friend bool operator==(const TrialRecord& a, const TrialRecord& b) {
    return a.trial == b.trial && a.seed == b.seed && a.pop_excess == b.pop_excess &&
           a.failure == b.failure;
  }
};

struct CellResult {
  int d = 0;
  double eps = 0.0;
  std::size_t eps_index = 0;
  std::size_t n = 0;
  std::string kind = "erm";  // "erm" or "uniform"
  std::size_t trials = 0;
  std::size_t failures = 0;
  double freq = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<std::size_t> n0_theorem;
  bool skipped = false;
  std::string skip_reason;
  ClaimTally claims;
  std::vector<TrialRecord> records;

  nlohmann::json to_json() const;
  static CellResult from_json(const nlohmann::json& j);
  friend bool operator==(const CellResult&, const CellResult&) = default;
};

struct ThresholdProbe {
  std::size_t n = 0;
  double freq = 0.0;
  double smoothed = 0.0;
  friend bool operator==(const ThresholdProbe&, const ThresholdProbe&) = default;
};

struct ThresholdSearch {
  std::size_t n_star = 0;  // smallest probed n meeting the target (when resolved)
  bool resolved = false;
  std::size_t lo = 0;      // largest probed n known to miss the target
  std::size_t hi = 0;      // smallest probed n meeting it, or max_n when unresolved
  std::vector<ThresholdProbe> probes;  // ascending n

  nlohmann::json to_json() const;
  static ThresholdSearch from_json(const nlohmann::json& j);
  friend bool operator==(const ThresholdSearch&, const ThresholdSearch&) = default;
};

/// Doubling from n = 1 then bisection on the isotonically smoothed frequencies.
ThresholdSearch search_threshold(const std::function<double(std::size_t)>& freq_at, double target,
                                 std::size_t max_n);

/// Per-(d, eps) state shared by every n probed for that cell.
struct CellSetup {
  int d = 0;
  double eps = 0.0;
  std::size_t eps_index = 0;
  InstancePtr inst;
  SolveReport population;
  std::optional<OptimalityCertificate> cert;
  std::optional<Net> net;             // separation eps/6, declared cover radius eps/3
  std::vector<Vector> uc_points;      // points where |F-hat - F| is checked
  std::string skip_reason;            // nonempty: the cell cannot run
};

CellSetup prepare_cell(const SweepConfig& cfg, int d, std::size_t eps_index);

/// One trial per derived seed (master, d, eps index, n, trial); failure when
/// the worst near-ERM has F - F(x*) > multiplier * eps.
CellResult failure_probability(const SweepConfig& cfg, const CellSetup& cell, std::size_t n);

/// Same trials, failure when max over uc_points of |F-hat - F| > eps.
CellResult uniform_deviation_probability(const SweepConfig& cfg, const CellSetup& cell,
                                         std::size_t n);

struct ThresholdResult {
  int d = 0;
  double eps = 0.0;
  double target = 0.0;
  std::optional<std::size_t> n0_theorem;
  ThresholdSearch erm;
  std::optional<ThresholdSearch> uniform;  // success probability >= 3/4

  nlohmann::json to_json() const;
  static ThresholdResult from_json(const nlohmann::json& j);
  friend bool operator==(const ThresholdResult&, const ThresholdResult&) = default;
};

ThresholdSearch sample_threshold(const SweepConfig& cfg, const CellSetup& cell, double target,
                                 std::vector<CellResult>* cells = nullptr);
ThresholdSearch uniform_convergence_threshold(const SweepConfig& cfg, const CellSetup& cell,
                                              std::vector<CellResult>* cells = nullptr);

struct ScalingFit {
  std::string series;  // "erm" or "uniform"
  std::string axis;    // "d" or "inv_eps"
  double fixed = 0.0;  // the eps (axis d) or d (axis inv_eps) held constant
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log-log residuals
  std::size_t points = 0;

  nlohmann::json to_json() const;
  static ScalingFit from_json(const nlohmann::json& j);
  friend bool operator==(const ScalingFit&, const ScalingFit&) = default;
};

/// Least squares of log y on log x; needs at least 3 points.
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
  int schema_version = kSweepSchemaVersion;
  nlohmann::json config;
  std::vector<CellResult> cells;  // sorted by (kind, d, eps index, n)
  std::vector<ThresholdResult> thresholds;
  std::vector<ScalingFit> fits;
  ClaimTally claims;

  bool empty() const { return cells.empty(); }
  nlohmann::json to_json() const;
  static SweepResult from_json(const nlohmann::json& j);
  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Runs the full sweep; a pure function of the config (jobs only changes speed).
SweepResult run_sweep(const SweepConfig& cfg);

}  // namespace scolab
