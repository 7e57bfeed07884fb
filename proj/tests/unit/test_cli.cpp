#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "amforge/cli/commands.hpp"
#include "amforge/cli/config.hpp"
#include "amforge/error.hpp"

using namespace amforge;
using namespace amforge::cli;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Config);
    return e.what();
  }
  FAIL("config accepted: " << text);
  return {};
}

const char* kLPlusL1 = R"(
system: {kind: L, g: 2}
chain:
  - {op: add, family: L1, v: 0}
)";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("parse a full config") {
    const RunConfig cfg = parse_config(R"(
system: {kind: J, g: 2, h: 8.2}
grid: {nodes: 512}
chain:
  - {op: add, family: J1, type: I, v: [0, 1]}
  - {op: delete, level: 0, direction: upper}
output: {dir: out, name: run, levels: 3}
verify: {rng_seed: 5, energy_offset: 0.1, flip_boundary: true}
)");
    CHECK(cfg.kind == SystemKind::J);
    CHECK(cfg.params.h == 8.2);
    CHECK(cfg.nodes == 512);
    REQUIRE(cfg.chain.size() == 2);
    CHECK(cfg.chain[0].degrees == std::vector<double>{0.0, 1.0});
    CHECK(cfg.chain[0].path == "chain[0]");
    CHECK(cfg.chain[1].op == StepConfig::Op::Delete);
    CHECK(cfg.chain[1].direction == Direction::FromUpper);
    CHECK(cfg.levels == 3);
    CHECK(cfg.rng_seed == 5);
    CHECK(cfg.flip_boundary);
  }

  TEST_CASE("config errors name the field") {
    CHECK(config_error("grid: {nodes: 100}").find("system") != std::string::npos);
    CHECK(config_error("system: {kind: Q}").find("system.kind") != std::string::npos);
    CHECK(config_error("system: {kind: L, gg: 2}").find("system.gg") != std::string::npos);
    CHECK(config_error("system: {kind: L}\ngrid: {nodes: 10}").find("grid.nodes") != std::string::npos);
    CHECK(config_error("system: {kind: L}\nchain:\n  - {op: add, family: L1}").find("chain[0]") != std::string::npos);
    CHECK(config_error("system: {kind: L}\nchain:\n  - {op: add, family: L1, v: 0}\n  - {op: delete, level: x}")
              .find("chain[1].level") != std::string::npos);
    CHECK(config_error("system: {kind: L}\nchain:\n  - {op: move}").find("chain[0].op") != std::string::npos);
    CHECK(config_error("system: [").find("malformed") != std::string::npos);
  }

  TEST_CASE("grid node override") {
    RunConfig cfg = parse_config(kLPlusL1);
    apply_grid_nodes_override(cfg, nullptr);
    CHECK(cfg.nodes == 1024);
    apply_grid_nodes_override(cfg, "256");
    CHECK(cfg.nodes == 256);
    CHECK_THROWS_AS(apply_grid_nodes_override(cfg, "12x"), Error);
    CHECK_THROWS_AS(apply_grid_nodes_override(cfg, "8"), Error);
  }

  TEST_CASE("empty chain csv") {
    RunConfig cfg = parse_config("system: {kind: L, g: 2}");
    cfg.nodes = 128;
    const Chain chain = build_chain(cfg);
    const std::string csv = csv_table(chain, {}, true, false);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "x,U_original,U_deformed");
    int rows = 0;
    while (std::getline(ss, line)) {
      const auto cells = split(line);
      REQUIRE(cells.size() == 3);
      CHECK(cells[1] == cells[2]);
      ++rows;
    }
    CHECK(rows == static_cast<int>(chain.result.grid()->size()));
  }

  TEST_CASE("manifest spectrum and columns") {
    const RunConfig cfg = parse_config(kLPlusL1);
    const Chain chain = build_chain(cfg);
    const auto levels = output_levels(cfg, chain.result);
    const auto m = nlohmann::json::parse(manifest_json(cfg, chain, levels, "run.csv"));
    REQUIRE(m["spectrum"].size() >= 4);
    const std::vector<double> want = {-10.0, 0.0, 4.0, 8.0};
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(m["spectrum"][i]["energy"].get<double>() == want[i]);
    CHECK(m["spectrum"][0]["provenance"] == "added:L1(v=0)");
    CHECK(m["chain"][0]["op"] == "add");
    CHECK(m["chain"][0]["shift"].empty());
    CHECK(m["chain"][0]["params_after"]["g"].get<double>() == 2.0);
    CHECK(m["csv"]["columns"][0] == "x");
    CHECK(m["csv"]["columns"].size() == 3 + levels.size());
  }

  TEST_CASE("manifest records parameter shifts") {
    const RunConfig cfg = parse_config("system: {kind: J, g: 2, h: 8.2}\nchain:\n  - {op: add, family: J1, v: 0}");
    const Chain chain = build_chain(cfg);
    const auto m = nlohmann::json::parse(manifest_json(cfg, chain, {}, "run.csv"));
    CHECK(m["chain"][0]["shift"]["h"].get<double>() == doctest::Approx(-2.0));
    CHECK(m["system"]["params"]["h"].get<double>() == 8.2);
  }

  TEST_CASE("budget error names the parameter") {
    const RunConfig cfg = parse_config(R"(
system: {kind: J, g: 2, h: 8.2}
chain:
  - {op: add, family: J1, v: 0}
  - {op: add, family: J1, v: 1}
  - {op: add, family: J1, v: 2}
  - {op: add, family: J1, v: 3}
)");
    try {
      build_chain(cfg);
      FAIL("fourth addition accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BudgetExhausted);
      const std::string w = e.what();
      CHECK(w.find("chain[3]") != std::string::npos);
      CHECK(w.find("h") != std::string::npos);
    }
  }

  TEST_CASE("spectrum rows") {
    const Chain chain = build_chain(parse_config(kLPlusL1));
    CHECK(spectrum_rows(chain, 0).empty());
    const auto rows = spectrum_rows(chain, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].predicted == -10.0);
    REQUIRE(rows[0].oracle);
    CHECK(std::abs(*rows[0].oracle + 10.0) <= 5e-3);
  }

  TEST_CASE("command exit codes") {
    std::ostringstream out;
    CHECK(cmd_list_systems(out) == kExitOk);
    CHECK(out.str().find("Coulomb") != std::string::npos);

    RunConfig cfg = parse_config(kLPlusL1);
    std::ostringstream v;
    CHECK(cmd_verify(cfg, true, v) == kExitOk);
    CHECK(nlohmann::json::parse(v.str()).is_array());

    cfg.energy_offset = 0.1;
    std::ostringstream bad;
    CHECK(cmd_verify(cfg, false, bad) == kExitCheckFailed);
    CHECK(bad.str().find("FAIL") != std::string::npos);

    std::ostringstream e;
    CHECK_THROWS_AS(cmd_export(cfg, "energies", e), Error);
    CHECK_THROWS_AS(cmd_verify(parse_config("system: {kind: L, g: 2}"), false, e), Error);
  }
}
