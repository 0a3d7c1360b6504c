#pragma once

#include <filesystem>
#include <string>

#include "scolab/sweep.hpp"

namespace scolab {

struct ReportFiles {
  std::filesystem::path json;
  std::filesystem::path csv;
  std::filesystem::path svg;
};

/// One row per ERM cell: d,eps,n,trials,failures,freq,ci_lo,ci_hi,n0_theorem.
std::string results_csv(const SweepResult& result);

/// Log-log threshold curves (n* and the uniform-convergence threshold against
/// d, with the theorem's n0 as an overlay) or, for fixed-n sweeps, failure
/// frequency against n.
std::string results_svg(const SweepResult& result);

/// Writes results.json, results.csv and plots.svg into `dir` (created if
/// needed). An empty result is rejected before anything is written.
ReportFiles emit_report(const SweepResult& result, const std::filesystem::path& dir);

/// Regenerates results.csv and plots.svg next to an existing results.json.
ReportFiles regenerate_report(const std::filesystem::path& results_json);

SweepResult read_results(const std::filesystem::path& results_json);

/// Writes `content` to `path` through a temporary file and a rename.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace scolab
