#include "amforge/cli/config.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "amforge/error.hpp"

namespace amforge::cli {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw Error(Errc::Config, path + ": " + msg);
}

void check_keys(const YAML::Node& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.IsMap()) fail(path, "expected a mapping");
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown key");
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) fail(path, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(path, "cannot parse '" + node.Scalar() + "'");
  }
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

template <class T>
std::vector<T> scalar_or_list(const YAML::Node& node, const std::string& path) {
  std::vector<T> out;
  if (node.IsSequence()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(scalar<T>(node[i], path + "[" + std::to_string(i) + "]"));
    }
    if (out.empty()) fail(path, "empty list");
  } else {
    out.push_back(scalar<T>(node, path));
  }
  return out;
}

template <class F>
auto parse_enum(const YAML::Node& node, const std::string& path, F parse) {
  const auto text = scalar<std::string>(node, path);
  try {
    return parse(text);
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

StepConfig parse_step(const YAML::Node& node, const std::string& path) {
  StepConfig s;
  s.path = path;
  if (!node.IsMap()) fail(path, "expected a mapping");
  if (!node["op"]) fail(join(path, "op"), "missing (add or delete)");
  const auto op = scalar<std::string>(node["op"], join(path, "op"));
  if (op == "add") {
    s.op = StepConfig::Op::Add;
    check_keys(node, path, {"op", "family", "type", "v", "B", "n", "enforce_budget"});
    if (!node["family"]) fail(join(path, "family"), "missing");
    s.family = parse_enum(node["family"], join(path, "family"), parse_seed_family);
    if (node["type"]) s.btype = parse_enum(node["type"], join(path, "type"), parse_boundary_type);
    int given = 0;
    for (const char* key : {"v", "B", "n"}) {
      if (node[key]) {
        s.degrees = scalar_or_list<double>(node[key], join(path, key));
        ++given;
      }
    }
    if (given != 1) fail(path, "exactly one of v, B or n is required");
    if (node["enforce_budget"]) s.enforce_budget = scalar<bool>(node["enforce_budget"], join(path, "enforce_budget"));
  } else if (op == "delete") {
    s.op = StepConfig::Op::Delete;
    check_keys(node, path, {"op", "level", "direction"});
    if (!node["level"]) fail(join(path, "level"), "missing");
    s.levels = scalar_or_list<int>(node["level"], join(path, "level"));
    for (int k : s.levels) {
      if (k < 0) fail(join(path, "level"), "level indices are non-negative");
    }
    if (node["direction"]) {
      const auto d = scalar<std::string>(node["direction"], join(path, "direction"));
      if (d == "lower") {
        s.direction = Direction::FromLower;
      } else if (d == "upper") {
        s.direction = Direction::FromUpper;
      } else {
        fail(join(path, "direction"), "expected lower or upper, got '" + d + "'");
      }
    }
  } else {
    fail(join(path, "op"), "expected add or delete, got '" + op + "'");
  }
  return s;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw Error(Errc::Config, std::string("malformed config: ") + e.what());
  }
  if (!root.IsMap()) throw Error(Errc::Config, "config must be a mapping with at least a system section");
  check_keys(root, "", {"system", "grid", "chain", "output", "verify"});

  RunConfig cfg;
  const YAML::Node sys = root["system"];
  if (!sys) fail("system", "missing");
  check_keys(sys, "system", {"kind", "g", "h", "mu"});
  if (!sys["kind"]) fail("system.kind", "missing");
  cfg.kind = parse_enum(sys["kind"], "system.kind", parse_system_kind);
  if (sys["g"]) cfg.params.g = scalar<double>(sys["g"], "system.g");
  if (sys["h"]) cfg.params.h = scalar<double>(sys["h"], "system.h");
  if (sys["mu"]) cfg.params.mu = scalar<double>(sys["mu"], "system.mu");

  if (const YAML::Node grid = root["grid"]) {
    check_keys(grid, "grid", {"nodes"});
    if (grid["nodes"]) cfg.nodes = scalar<int>(grid["nodes"], "grid.nodes");
    if (cfg.nodes < 64) fail("grid.nodes", "at least 64 nodes are required");
  }

  if (const YAML::Node chain = root["chain"]) {
    if (!chain.IsSequence()) fail("chain", "expected a list of steps");
    for (std::size_t i = 0; i < chain.size(); ++i) {
      cfg.chain.push_back(parse_step(chain[i], "chain[" + std::to_string(i) + "]"));
    }
  }

  if (const YAML::Node out = root["output"]) {
    check_keys(out, "output", {"dir", "name", "levels"});
    if (out["dir"]) cfg.out_dir = scalar<std::string>(out["dir"], "output.dir");
    if (out["name"]) cfg.out_name = scalar<std::string>(out["name"], "output.name");
    if (out["levels"]) {
      cfg.levels = scalar<int>(out["levels"], "output.levels");
      if (*cfg.levels < 0) fail("output.levels", "must be non-negative");
    }
    if (cfg.out_name.empty()) fail("output.name", "must not be empty");
  }

  if (const YAML::Node v = root["verify"]) {
    check_keys(v, "verify", {"rng_seed", "energy_offset", "flip_boundary"});
    if (v["rng_seed"]) cfg.rng_seed = scalar<std::uint64_t>(v["rng_seed"], "verify.rng_seed");
    if (v["energy_offset"]) cfg.energy_offset = scalar<double>(v["energy_offset"], "verify.energy_offset");
    if (v["flip_boundary"]) cfg.flip_boundary = scalar<bool>(v["flip_boundary"], "verify.flip_boundary");
  }
  return cfg;
}

void apply_grid_nodes_override(RunConfig& cfg, const char* value) {
  if (value == nullptr || *value == '\0') return;
  const std::string_view s(value);
  int n = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), n);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw Error(Errc::Config, "AMFORGE_GRID_NODES: cannot parse '" + std::string(s) + "'");
  }
  if (n < 64) throw Error(Errc::Config, "AMFORGE_GRID_NODES: at least 64 nodes are required");
  cfg.nodes = n;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Config, path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  RunConfig cfg = parse_config(ss.str());
  apply_grid_nodes_override(cfg, std::getenv("AMFORGE_GRID_NODES"));
  return cfg;
}

}  // namespace amforge::cli
