#pragma once

// The four commands as library calls. Each writes its artifacts into `out`
// (created if needed) and returns the process exit status with messages.

#include <filesystem>
#include <string>
#include <vector>

#include "trapmodes/config.hpp"

namespace trapmodes {

struct CommandResult {
  int exit_code = 0;
  std::vector<std::string> notices;
  std::vector<std::string> warnings;
};

/// certificates.json, summary.csv. Exit 2 when some admissible class fails.
CommandResult run_certify(const RunConfig& cfg, const std::filesystem::path& out);

/// modes.csv, candidates.csv, convergence.csv, convergence_summary.csv,
/// field_m<m>.csv, solve.json. Exit 2 when a certified class has no retained mode.
CommandResult run_solve(const RunConfig& cfg, const std::filesystem::path& out);

/// residuals.csv, symmetry_residuals.csv, verify.json. With `coarse` the
/// quadrature tolerance is loosened and failures become warnings.
CommandResult run_verify(const RunConfig& cfg, const std::filesystem::path& out, bool coarse);

/// report.md and q_slices.csv from the artifacts already in `out`. Exit 1
/// without certificates.json.
CommandResult run_report(const std::filesystem::path& out);

/// Shortest round-trip decimal form; "nan", "inf", "-inf" otherwise.
std::string format_number(double v);

}  // namespace trapmodes
