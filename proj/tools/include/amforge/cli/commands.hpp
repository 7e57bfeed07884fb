#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "amforge/cli/config.hpp"
#include "amforge/verify.hpp"

namespace amforge::cli {

/// Exit codes: 0 success, 1 a check failed, 2 invalid input or library error.
constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitError = 2;

struct Chain {
  SolvableSystem base;
  TransformedSystem result;
};

/// Builds the base system, the grid and every step of the chain. Library
/// errors are rethrown with the step's field path prepended.
Chain build_chain(const RunConfig& cfg);

/// Spectrum indices of the wavefunction columns (see RunConfig::levels).
std::vector<int> output_levels(const RunConfig& cfg, const TransformedSystem& t);

/// x, U_original, U_deformed, then one column per level in `levels`.
std::string csv_table(const Chain& chain, const std::vector<int>& levels, bool potential, bool states);

/// Manifest: system, grid, chain with per-step parameter shifts, spectrum
/// with provenance and the CSV column names.
std::string manifest_json(const RunConfig& cfg, const Chain& chain, const std::vector<int>& levels,
                          const std::string& csv_name);

struct SpectrumRow {
  int index;
  double predicted;
  std::string provenance;
  std::optional<double> oracle;
};
std::vector<SpectrumRow> spectrum_rows(const Chain& chain, int k);

int cmd_list_systems(std::ostream& out);
/// Writes <dir>/<name>.csv and <dir>/<name>.json; logs the paths to out.
int cmd_build(const RunConfig& cfg, std::ostream& out);
int cmd_spectrum(const RunConfig& cfg, int k, bool json, std::ostream& out);
/// Runs the suite on the system and the first add step. Text report to out;
/// the JSON report replaces it when json is set.
int cmd_verify(const RunConfig& cfg, bool json, std::ostream& out);
/// what is "potential" or "states".
int cmd_export(const RunConfig& cfg, const std::string& what, std::ostream& out);

SuiteConfig suite_config(const RunConfig& cfg);

}  // namespace amforge::cli
