#pragma once

// Run configuration for the amforge tool. The file is YAML (nested
// key-value text); the schema is
//
//   system:
//     kind: L                 # L, J, Morse, RosenMorse, Eckart, HypDPT, Coulomb
//     g: 2                    # h and mu as the system requires
//   grid:
//     nodes: 1024             # overridden by AMFORGE_GRID_NODES
//   chain:                    # applied in order
//     - op: add
//       family: L1            # seed family
//       type: I               # boundary type, I or II
//       v: 0                  # degree; a list adds several seeds in one block
//       # B: 1                # imaginary part, complex-degree families
//       # n: 2                # level index, Overshoot and Eigenstate
//       enforce_budget: true
//     - op: delete
//       level: 0              # spectrum index at that stage; a list deletes jointly
//       direction: lower      # optional, lower or upper
//   output:
//     dir: out
//     name: run
//     levels: 6               # wavefunction columns: the lowest N levels
//   verify:
//     rng_seed: 20240607
//     energy_offset: 0        # negative control
//     flip_boundary: false    # negative control
//
// Unknown keys are rejected; errors name the offending field path.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amforge/amcore.hpp"

namespace amforge::cli {

struct StepConfig {
  enum class Op { Add, Delete };
  Op op = Op::Add;
  /// Field path of this step, e.g. "chain[1]".
  std::string path;

  SeedFamily family = SeedFamily::L1;
  BoundaryType btype = BoundaryType::I;
  /// v, B or n per seed; more than one entry builds a single block.
  std::vector<double> degrees;
  bool enforce_budget = true;

  std::vector<int> levels;
  std::optional<Direction> direction;
};

struct RunConfig {
  SystemKind kind = SystemKind::L;
  SystemParams params;
  std::vector<StepConfig> chain;
  int nodes = 1024;

  std::string out_dir = ".";
  std::string out_name = "amforge";
  /// Number of lowest levels written as wavefunction columns; empty means
  /// every base level up to n = 3 plus every added level.
  std::optional<int> levels;

  std::uint64_t rng_seed = 20240607;
  double energy_offset = 0.0;
  bool flip_boundary = false;
};

/// Parses YAML text. Throws amforge::Error(Errc::Config) naming the field.
RunConfig parse_config(std::string_view text);
/// Reads and parses a file, then applies AMFORGE_GRID_NODES if set.
RunConfig load_config(const std::string& path);
/// Applies an AMFORGE_GRID_NODES value to cfg.
void apply_grid_nodes_override(RunConfig& cfg, const char* value);

}  // namespace amforge::cli
