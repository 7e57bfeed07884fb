#include "amforge/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "amforge/error.hpp"
#include "amforge/oracle.hpp"

namespace amforge::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr int kOracleNodes = 2000;

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Message without the "code: " prefix that Error adds.
std::string bare(const Error& e) {
  const std::string w = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return w.rfind(prefix, 0) == 0 ? w.substr(prefix.size()) : w;
}

std::string pretty(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.substr(i, 2) == "pi") {
      out += "π";
      ++i;
    } else if (s.substr(i, 3) == "inf") {
      out += "∞";
      i += 2;
    } else if (s[i] == '\'') {
      out += "′";
    } else {
      out += s[i];
    }
  }
  return out;
}

json params_json(const SystemKind kind, const SystemParams& p) {
  json j = json::object();
  const auto& entries = catalog();
  const auto it = std::find_if(entries.begin(), entries.end(), [&](const CatalogEntry& e) { return e.kind == kind; });
  const std::string_view names = it != entries.end() ? it->parameters : "";
  if (names.find('g') != std::string_view::npos) j["g"] = p.g;
  if (names.find('h') != std::string_view::npos) j["h"] = p.h;
  if (names.find("mu") != std::string_view::npos) j["mu"] = p.mu;
  return j;
}

}  // namespace

Chain build_chain(const RunConfig& cfg) {
  SolvableSystem base = [&] {
    try {
      return SolvableSystem::make(cfg.kind, cfg.params);
    } catch (const Error& e) {
      throw Error(e.code(), "system: " + bare(e));
    }
  }();

  std::vector<std::vector<SeedSolution>> seeds(cfg.chain.size());
  std::vector<SeedSolution> all;
  for (std::size_t i = 0; i < cfg.chain.size(); ++i) {
    const StepConfig& s = cfg.chain[i];
    if (s.op != StepConfig::Op::Add) continue;
    for (double d : s.degrees) {
      try {
        seeds[i].push_back(make_seed(base, s.family, s.btype, d));
      } catch (const Error& e) {
        throw Error(e.code(), s.path + ": " + bare(e));
      }
      all.push_back(seeds[i].back());
    }
  }

  TransformedSystem stage(base, make_grid(base, all, cfg.nodes));
  for (std::size_t i = 0; i < cfg.chain.size(); ++i) {
    const StepConfig& s = cfg.chain[i];
    try {
      if (s.op == StepConfig::Op::Add) {
        AddOptions opts;
        opts.enforce_budget = s.enforce_budget;
        stage = seeds[i].size() == 1 ? add_state(stage, seeds[i][0], opts) : add_states_direct(stage, seeds[i], opts);
      } else {
        DeleteOptions opts;
        opts.direction = s.direction;
        stage = s.levels.size() == 1 ? delete_state(stage, s.levels[0], opts)
                                     : delete_states_direct(stage, s.levels, opts);
      }
    } catch (const Error& e) {
      throw Error(e.code(), s.path + ": " + bare(e));
    }
  }
  return {std::move(base), std::move(stage)};
}

std::vector<int> output_levels(const RunConfig& cfg, const TransformedSystem& t) {
  std::vector<int> out;
  if (cfg.levels) {
    const auto lv = t.levels(*cfg.levels);
    for (std::size_t k = 0; k < lv.size(); ++k) out.push_back(static_cast<int>(k));
    return out;
  }
  // base levels n <= 3 and every added level
  const auto lv = t.levels(-1);
  for (std::size_t k = 0; k < lv.size(); ++k) {
    const std::string& p = lv[k].provenance;
    bool keep = p.rfind("added:", 0) == 0;
    if (p.rfind("base:n=", 0) == 0) keep = std::stoi(p.substr(7)) <= 3;
    if (keep) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::string csv_table(const Chain& chain, const std::vector<int>& levels, bool potential, bool states) {
  const TransformedSystem& t = chain.result;
  const auto& xs = t.grid()->x();
  const auto& ud = t.potential_nodes();
  const auto lv = t.levels(levels.empty() ? 0 : levels.back() + 1);
  std::vector<std::vector<double>> cols;
  std::ostringstream os;
  os << "x";
  if (potential) os << ",U_original,U_deformed";
  if (states) {
    for (int k : levels) {
      os << ',' << lv[static_cast<std::size_t>(k)].provenance;
      cols.push_back(t.state(k).values());
    }
  }
  os << '\n';
  for (std::size_t i = 0; i < xs.size(); ++i) {
    os << num(xs[i]);
    if (potential) os << ',' << num(chain.base.potential(xs[i])) << ',' << num(ud[i]);
    for (const auto& c : cols) os << ',' << num(c[i]);
    os << '\n';
  }
  return os.str();
}

std::string manifest_json(const RunConfig& cfg, const Chain& chain, const std::vector<int>& levels,
                          const std::string& csv_name) {
  const TransformedSystem& t = chain.result;
  json m;
  m["system"] = {{"kind", chain.base.name()}, {"label", chain.base.label()},
                 {"params", params_json(cfg.kind, cfg.params)}};
  const Grid& g = *t.grid();
  m["grid"] = {{"nodes", g.size()},
               {"requested_nodes", cfg.nodes},
               {"mapping", std::string(to_string(g.map()))},
               {"panels", g.panels()},
               {"lower", g.lower_edge()},
               {"upper", g.upper_edge()}};

  json steps = json::array();
  std::vector<std::pair<std::string, double>> prev;
  for (const char* p : {"g", "h"}) {
    const double v = p[0] == 'g' ? cfg.params.g : cfg.params.h;
    if (!std::isnan(v)) prev.emplace_back(p, v);
  }
  for (const StepRecord& s : t.steps()) {
    json after = json::object(), shift = json::object();
    for (const auto& [name, value] : s.params_after) {
      after[name] = value;
      for (const auto& [pn, pv] : prev) {
        if (pn == name && value != pv) shift[name] = value - pv;
      }
    }
    prev = s.params_after;
    steps.push_back({{"op", s.op}, {"items", s.items}, {"boundary", s.boundary}, {"params_after", after},
                     {"shift", shift}});
  }
  m["chain"] = steps;

  json spec = json::array();
  const int k = chain.base.n_max() ? -1 : 10;
  for (const Level& l : t.levels(k)) spec.push_back({{"energy", l.energy}, {"provenance", l.provenance}});
  m["spectrum"] = spec;

  json columns = json::array({"x", "U_original", "U_deformed"});
  const auto lv = t.levels(levels.empty() ? 0 : levels.back() + 1);
  for (int i : levels) columns.push_back(lv[static_cast<std::size_t>(i)].provenance);
  m["csv"] = {{"file", csv_name}, {"columns", columns}};
  return m.dump(2) + "\n";
}

std::vector<SpectrumRow> spectrum_rows(const Chain& chain, int k) {
  std::vector<SpectrumRow> rows;
  if (k <= 0) return rows;
  const TransformedSystem& t = chain.result;
  const auto lv = t.levels(k);
  const Domain sup = t.support();
  const SpectralResult r = fd_spectrum([&](double x) { return t.potential(x); }, chain.base.domain(), kOracleNodes,
                                       k, std::pair{sup.lower, sup.upper});
  for (int i = 0; i < k; ++i) {
    SpectrumRow row{i, std::nan(""), "", std::nullopt};
    if (static_cast<std::size_t>(i) < lv.size()) {
      row.predicted = lv[static_cast<std::size_t>(i)].energy;
      row.provenance = lv[static_cast<std::size_t>(i)].provenance;
    }
    if (static_cast<std::size_t>(i) < r.extrapolated.size()) row.oracle = r.extrapolated[static_cast<std::size_t>(i)];
    rows.push_back(row);
  }
  return rows;
}

int cmd_list_systems(std::ostream& out) {
  for (const CatalogEntry& e : catalog()) {
    out << to_string(e.kind) << ": " << pretty(e.range) << ", domain " << pretty(e.domain) << ", n_max "
        << pretty(e.n_max) << ", U(x) = " << e.potential << '\n';
  }
  return kExitOk;
}

int cmd_build(const RunConfig& cfg, std::ostream& out) {
  const Chain chain = build_chain(cfg);
  const auto levels = output_levels(cfg, chain.result);
  namespace fs = std::filesystem;
  const fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(Errc::Config, "output.dir: cannot create '" + cfg.out_dir + "': " + ec.message());
  const std::string csv_name = cfg.out_name + ".csv";
  const fs::path csv = dir / csv_name;
  const fs::path manifest = dir / (cfg.out_name + ".json");
  {
    std::ofstream f(csv, std::ios::binary);
    f << csv_table(chain, levels, true, true);
    if (!f) throw Error(Errc::Config, "output.dir: cannot write " + csv.string());
  }
  {
    std::ofstream f(manifest, std::ios::binary);
    f << manifest_json(cfg, chain, levels, csv_name);
    if (!f) throw Error(Errc::Config, "output.dir: cannot write " + manifest.string());
  }
  out << "wrote " << csv.string() << '\n' << "wrote " << manifest.string() << '\n';
  return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg, int k, bool as_json, std::ostream& out) {
  if (k < 0) throw Error(Errc::Config, "--k must be non-negative");
  const Chain chain = build_chain(cfg);
  const auto rows = spectrum_rows(chain, k);
  if (as_json) {
    json arr = json::array();
    for (const auto& r : rows) {
      json o = {{"index", r.index}, {"predicted", r.predicted}, {"provenance", r.provenance}};
      o["oracle"] = r.oracle ? json(*r.oracle) : json(nullptr);
      o["delta"] = r.oracle ? json(*r.oracle - r.predicted) : json(nullptr);
      arr.push_back(o);
    }
    out << arr.dump(2) << '\n';
    return kExitOk;
  }
  out << std::left << std::setw(4) << "k" << "  " << std::setw(24) << "predicted" << "  " << std::setw(24) << "oracle"
      << "  " << std::setw(10) << "delta" << "  provenance\n";
  for (const auto& r : rows) {
    std::string delta = "-";
    if (r.oracle) {
      std::ostringstream d;
      d << std::scientific << std::setprecision(3) << (*r.oracle - r.predicted);
      delta = d.str();
    }
    out << std::setw(4) << r.index << "  " << std::setw(24) << num(r.predicted) << "  " << std::setw(24)
        << (r.oracle ? num(*r.oracle) : "-") << "  " << std::setw(10) << delta << "  " << r.provenance << '\n';
  }
  return kExitOk;
}

SuiteConfig suite_config(const RunConfig& cfg) {
  const auto it = std::find_if(cfg.chain.begin(), cfg.chain.end(),
                               [](const StepConfig& s) { return s.op == StepConfig::Op::Add; });
  if (it == cfg.chain.end()) throw Error(Errc::Config, "chain: verify needs at least one add step");
  SuiteConfig s;
  s.kind = cfg.kind;
  s.params = cfg.params;
  s.family = it->family;
  s.btype = it->btype;
  s.degree = it->degrees.front();
  s.n_nodes = cfg.nodes;
  s.rng_seed = cfg.rng_seed;
  s.energy_offset = cfg.energy_offset;
  s.flip_boundary = cfg.flip_boundary;
  return s;
}

int cmd_verify(const RunConfig& cfg, bool as_json, std::ostream& out) {
  const auto reports = run_suite(suite_config(cfg));
  out << (as_json ? format_json(reports) : format_text(reports));
  return all_pass(reports) ? kExitOk : kExitCheckFailed;
}

int cmd_export(const RunConfig& cfg, const std::string& what, std::ostream& out) {
  if (what != "potential" && what != "states") {
    throw Error(Errc::Config, "--what must be potential or states, got '" + what + "'");
  }
  const Chain chain = build_chain(cfg);
  const bool states = what == "states";
  out << csv_table(chain, states ? output_levels(cfg, chain.result) : std::vector<int>{}, !states, states);
  return kExitOk;
}

}  // namespace amforge::cli
