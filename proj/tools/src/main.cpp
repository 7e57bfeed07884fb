#include <CLI11.hpp>
#include <iostream>

#include "amforge/cli/commands.hpp"
#include "amforge/error.hpp"

int main(int argc, char** argv) {
  using namespace amforge::cli;
  CLI::App app{"Abraham-Moses transformations of exactly solvable potentials"};
  app.require_subcommand(1);

  app.add_subcommand("list-systems", "List the catalog of solvable systems");

  std::string config;
  auto* build = app.add_subcommand("build", "Build a chain and write CSV grids plus a JSON manifest");
  build->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);

  int k = 4;
  bool json = false;
  auto* spectrum = app.add_subcommand("spectrum", "Predicted levels next to finite-difference eigenvalues");
  spectrum->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--k", k, "Number of lowest levels")->check(CLI::NonNegativeNumber);
  spectrum->add_flag("--json", json, "Emit JSON instead of a table");

  auto* verify = app.add_subcommand("verify", "Run the identity checks on the configured system and seed");
  verify->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  verify->add_flag("--json", json, "Emit the JSON report instead of text");

  std::string what;
  auto* exp = app.add_subcommand("export", "Write one CSV table to stdout");
  exp->add_option("config", config, "Config file")->required()->check(CLI::ExistingFile);
  exp->add_option("--what", what, "potential or states")->required()->check(CLI::IsMember({"potential", "states"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors count as a bad config.
    const int rc = app.exit(e);
    return rc == 0 ? amforge::cli::kExitOk : amforge::cli::kExitError;
  }

  try {
    if (app.got_subcommand("list-systems")) return cmd_list_systems(std::cout);
    const RunConfig cfg = load_config(config);
    if (build->parsed()) return cmd_build(cfg, std::cout);
    if (spectrum->parsed()) return cmd_spectrum(cfg, k, json, std::cout);
    if (verify->parsed()) return cmd_verify(cfg, json, std::cout);
    if (exp->parsed()) return cmd_export(cfg, what, std::cout);
  } catch (const amforge::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
