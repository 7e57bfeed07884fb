// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "amforge/amcore.hpp"
#include "amforge/oracle.hpp"
#include "amforge/specfun.hpp"
#include "amforge/verify.hpp"

using namespace amforge;
using namespace amforge::specfun;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Outcome {
  double error = 0.0;
  std::string note;
};

struct Criterion {
  int id;
  std::string name;
  double tol;
  /// Wall-clock limit in seconds; 0 means none.
  double seconds;
  std::function<Outcome()> body;
};

double now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

SolvableSystem make(SystemKind k, double g, double h) { return SolvableSystem::make(k, {g, h, kNaN}); }

double norm2(const GridFn& f, const Grid& g) { return full_inner_nodes(f.values(), f.values(), g); }

AddOptions no_budget() {
  AddOptions o;
  o.enforce_budget = false;
  return o;
}

struct Case {
  SolvableSystem sys;
  SeedSolution seed;
  GridPtr grid;
  TransformedSystem base;
  TransformedSystem added;
  Case(SolvableSystem s, SeedSolution sd, const AddOptions& opts = {})
      : sys(std::move(s)),
        seed(std::move(sd)),
        grid(make_grid(sys, {seed}, 1024)),
        base(sys, grid),
        added(add_state(base, seed, opts)) {}
};

Case l_case() {
  const SolvableSystem l = make(SystemKind::L, 2.0, kNaN);
  return Case(l, virtual_state(l, BoundaryType::I, 0));
}

Case j_case() {
  const SolvableSystem j = make(SystemKind::J, 2.0, 3.0);
  return Case(j, generalized_virtual_state(j, BoundaryType::I, 0.5), no_budget());
}

double direct_vs_sequential(const SolvableSystem& sys, const std::vector<SeedSolution>& seeds) {
  const TransformedSystem base(sys, make_grid(sys, seeds, 1024));
  const TransformedSystem direct = add_states_direct(base, seeds);
  TransformedSystem seq = base;
  for (const auto& s : seeds) seq = add_state(seq, s);
  double worst = max_relative(direct.potential_nodes(), seq.potential_nodes());
  for (int n = 0; n <= 3; ++n) {
    worst = std::max(worst, max_relative(direct.eigenfunction(n).values(), seq.eigenfunction(n).values()));
  }
  const auto da = direct.added_states(), sa = seq.added_states();
  for (std::size_t j = 0; j < da.size(); ++j) worst = std::max(worst, max_relative(da[j].values(), sa[j].values()));
  return worst;
}

/// max over nodes of |W[phi, psi] - tau (E~ - E) <phi, psi>| relative to max |W|.
double wronskian_error(const SolvableSystem& sys, const SeedSolution& seed, int n) {
  const GridPtr grid = make_grid(sys, {seed}, 1024);
  const Grid& g = *grid;
  const GridFn phi = sample(seed.eval, grid, seed.energy, seed.btype);
  const GridFn psi = sample(sys.eigenfunction(n), grid, sys.eigen_energy(n));
  const bool lower = seed.btype == BoundaryType::I;
  std::vector<double> prod(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) prod[i] = phi.nodes[i].value * psi.nodes[i].value;
  const RunningInner c(grid, std::move(prod), lower ? Direction::FromLower : Direction::FromUpper);
  std::vector<double> w(g.size()), rhs(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    w[i] = phi.nodes[i].value * psi.nodes[i].derivative - phi.nodes[i].derivative * psi.nodes[i].value;
    rhs[i] = (lower ? 1.0 : -1.0) * (seed.energy - psi.energy) * c.values()[i];
  }
  return max_relative(rhs, w);
}

std::vector<double> oracle(const TransformedSystem& t, int k) {
  const Domain s = t.support();
  return fd_spectrum([&](double x) { return t.potential(x); }, t.base().domain(), 2000, k,
                     std::pair{s.lower, s.upper})
      .extrapolated;
}

std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::vector<Criterion> criteria() {
  std::vector<Criterion> cs;

  cs.push_back({1, "added state unit norm, (L,g=2)+L1(v=0)", 1e-7, 5.0, [] {
                  const Case c = l_case();
                  return Outcome{std::abs(norm2(c.added.added_states().at(0), *c.grid) - 1.0), ""};
                }});
  cs.push_back({1, "added state unit norm, (J,g=2,h=3)+J1Gen(v=0.5, type I)", 1e-7, 5.0, [] {
                  const Case c = j_case();
                  return Outcome{std::abs(norm2(c.added.added_states().at(0), *c.grid) - 1.0), ""};
                }});

  cs.push_back({2, "mapped eigenfunction norms equal h_n, n <= 3", 1e-7, 0.0, [] {
                  double worst = 0.0;
                  for (const Case& c : {l_case(), j_case()}) {
                    for (int n = 0; n <= 3; ++n) {
                      const double h = c.sys.norm_constant(n);
                      worst = std::max(worst, std::abs(norm2(c.added.eigenfunction(n), *c.grid) - h) / h);
                    }
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({3, "finite-difference oracle on L+L1: -10 within 5e-3, {0,4,8} within 1e-3", 1.0, 30.0, [] {
                  const Case c = l_case();
                  const auto e = oracle(c.added, 4);
                  // scaled so that 1 is the tolerance edge of either bound
                  double worst = std::abs(e[0] + 10.0) / 5e-3;
                  for (int n = 1; n <= 3; ++n) worst = std::max(worst, std::abs(e[n] - 4.0 * (n - 1)) / 1e-3);
                  return Outcome{worst, fmt("E0=%.8f E3=%.8f", e[0], e[3])};
                }});

  cs.push_back({4, "M=2 and M=3 direct addition agree with sequential", 1e-8, 0.0, [] {
                  const SolvableSystem l = make(SystemKind::L, 2.0, kNaN);
                  const SolvableSystem j = make(SystemKind::J, 2.0, 12.0);
                  std::vector<SeedSolution> ls, js;
                  for (int v = 0; v <= 2; ++v) {
                    ls.push_back(virtual_state(l, BoundaryType::I, v));
                    js.push_back(virtual_state(j, BoundaryType::I, v));
                  }
                  double worst = 0.0;
                  for (std::size_t m : {2u, 3u}) {
                    worst = std::max(worst, direct_vs_sequential(l, {ls.begin(), ls.begin() + m}));
                    worst = std::max(worst, direct_vs_sequential(j, {js.begin(), js.begin() + m}));
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({5, "addition then deletion and deletion then addition restore the system", 1e-7, 0.0, [] {
                  const Case c = l_case();
                  const TransformedSystem back = delete_state(c.added, 0);
                  double worst = max_relative(back.potential_nodes(), c.base.potential_nodes());
                  for (int n = 0; n <= 3; ++n) {
                    worst = std::max(worst, max_relative(back.eigenfunction(n).values(), c.base.eigenfunction(n).values()));
                  }
                  const TransformedSystem del = delete_state(c.base, 0);
                  const TransformedSystem re = add_stage_seed(del, del.deletion_partners().at(0), "partner(n=0)");
                  worst = std::max(worst, max_relative(re.potential_nodes(), c.base.potential_nodes()));
                  for (int n = 1; n <= 3; ++n) {
                    worst = std::max(worst, max_relative(re.eigenfunction(n).values(), c.base.eigenfunction(n).values()));
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({6, "Wronskian identity, four (seed, eigenstate) pairs", 1e-7, 0.0, [] {
                  const SolvableSystem l = make(SystemKind::L, 2.0, kNaN);
                  const SolvableSystem j = make(SystemKind::J, 2.0, 3.0);
                  double worst = wronskian_error(l, virtual_state(l, BoundaryType::I, 0), 0);
                  worst = std::max(worst, wronskian_error(l, virtual_state(l, BoundaryType::I, 1), 2));
                  worst = std::max(worst, wronskian_error(j, generalized_virtual_state(j, BoundaryType::I, 0.5), 1));
                  worst = std::max(worst, wronskian_error(j, virtual_state(j, BoundaryType::II, 0), 0));
                  return Outcome{worst, ""};
                }});

  cs.push_back({7, "two-step Darboux state ratio is the constant E~ - E", 1e-7, 0.0, [] {
                  const Case c = l_case();
                  const DarbouxTwoStep d = darboux_twostep(c.sys, c.seed, c.grid);
                  double worst = 0.0;
                  for (int n = 0; n <= 2; ++n) {
                    const GridFn psi = sample(c.sys.eigenfunction(n), c.grid, c.sys.eigen_energy(n));
                    const auto mapped = d.map(psi).values();
                    const auto am = c.added.eigenfunction(n).values();
                    double peak = 0.0;
                    for (double v : am) peak = std::max(peak, std::abs(v));
                    const double want = c.seed.energy - psi.energy;
                    for (std::size_t i = 0; i < am.size(); ++i) {
                      if (std::abs(am[i]) < 1e-3 * peak) continue;
                      worst = std::max(worst, std::abs(mapped[i] / am[i] - want) / std::abs(want));
                    }
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({8, "bordered-matrix lemma identities, 100 trials each, n = 2..6", 1e-10, 1.0, [] {
                  double worst = 0.0;
                  for (int n = 2; n <= 6; ++n) worst = std::max(worst, lemma_identities(n, 100, 20240607 + n).error);
                  return Outcome{worst, ""};
                }});

  cs.push_back({9, "1F1 -> Laguerre and 2F1 -> Jacobi, 50 random cases each", 1e-10, 0.0, [] {
                  std::mt19937_64 rng(2024);
                  std::uniform_int_distribution<int> deg(0, 8);
                  std::uniform_real_distribution<double> par(-0.4, 5.0), xl(0.0, 10.0), xj(-1.0, 1.0);
                  double worst = 0.0;
                  for (int t = 0; t < 50; ++t) {
                    const int n = deg(rng);
                    const double a = par(rng), x = xl(rng);
                    const double scale = std::tgamma(a + 1.0 + n) / (std::tgamma(a + 1.0) * std::tgamma(n + 1.0));
                    const double lag = laguerre(n, a, x).value;
                    worst = std::max(worst, std::abs(hyp1f1(-n, a + 1.0, x).value * scale - lag) /
                                                std::max(std::abs(lag), 1e-3));
                  }
                  for (int t = 0; t < 50; ++t) {
                    const int n = deg(rng);
                    const double a = par(rng), b = par(rng), x = xj(rng);
                    const double scale = std::tgamma(a + 1.0 + n) / (std::tgamma(a + 1.0) * std::tgamma(n + 1.0));
                    const double jac = jacobi(n, a, b, x).value;
                    const double via = scale * hyp2f1(-n, n + a + b + 1.0, a + 1.0, 0.5 * (1.0 - x)).value;
                    worst = std::max(worst, std::abs(via - jac) / std::max(std::abs(jac), 1e-3));
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({9, "Kummer and Euler rewritten seeds agree with the direct forms", 1e-9, 0.0, [] {
                  struct Seed {
                    SolvableSystem sys;
                    BoundaryType btype;
                    double v;
                  };
                  const std::vector<Seed> seeds = {{make(SystemKind::L, 2.0, kNaN), BoundaryType::I, 0.5},
                                                   {make(SystemKind::L, 3.5, kNaN), BoundaryType::I, 1.3},
                                                   {make(SystemKind::J, 2.0, 3.0), BoundaryType::I, 0.5},
                                                   {make(SystemKind::J, 2.5, 4.5), BoundaryType::II, 0.3}};
                  double worst = 0.0;
                  for (const auto& s : seeds) {
                    const SeedSolution a = generalized_virtual_state(s.sys, s.btype, s.v, SeedForm::Direct);
                    const SeedSolution b = generalized_virtual_state(s.sys, s.btype, s.v, SeedForm::Rewritten);
                    const GridPtr grid = make_grid(s.sys, {a}, 512);
                    for (std::size_t i = grid->size() / 8; i < grid->size() * 7 / 8; ++i) {
                      const FnValue fa = a.eval(grid->x()[i]), fb = b.eval(grid->x()[i]);
                      worst = std::max(worst, std::abs(fa.value - fb.value) / std::abs(fb.value));
                    }
                  }
                  return Outcome{worst, ""};
                }});

  cs.push_back({10, "J1Cplx(B=1) on (J,g=2,h=3): deformed residual", 1e-5, 0.0, [] {
                  const SolvableSystem j = make(SystemKind::J, 2.0, 3.0);
                  const Case c(j, complex_degree_seed(j, SeedFamily::J1Cplx, 1.0), no_budget());
                  auto u = [&](double x) { return c.added.potential(x); };
                  const GridFn chi = c.added.added_states().at(0);
                  double worst = schrodinger_residual(chi.eval, u, chi.energy, *c.grid);
                  for (int n = 0; n <= 2; ++n) {
                    const GridFn f = c.added.eigenfunction(n);
                    worst = std::max(worst, schrodinger_residual(f.eval, u, f.energy, *c.grid));
                  }
                  return Outcome{worst, ""};
                }});
  cs.push_back({10, "J1Cplx(B=1) on (J,g=2,h=3): oracle finds -29", 5e-3, 0.0, [] {
                  const SolvableSystem j = make(SystemKind::J, 2.0, 3.0);
                  const Case c(j, complex_degree_seed(j, SeedFamily::J1Cplx, 1.0), no_budget());
                  const auto e = oracle(c.added, 1);
                  return Outcome{std::abs(e[0] + 29.0), fmt("E0=%.8f", e[0])};
                }});

  cs.push_back({11, "budget: J1 on h=8.2 takes 3 additions, L1 takes >= 10", 0.0, 0.0, [] {
                  const SolvableSystem j = make(SystemKind::J, 2.0, 8.2);
                  std::vector<SeedSolution> js;
                  for (int v = 0; v <= 3; ++v) js.push_back(virtual_state(j, BoundaryType::I, v));
                  TransformedSystem st(j, make_grid(j, {js.front()}, 1024));
                  int accepted = 0;
                  bool rejected = false;
                  for (const auto& s : js) {
                    try {
                      st = add_state(st, s);
                      ++accepted;
                    } catch (const Error& e) {
                      rejected = e.code() == Errc::BudgetExhausted;
                      break;
                    }
                  }
                  const SolvableSystem l = make(SystemKind::L, 2.0, kNaN);
                  std::vector<SeedSolution> ls;
                  for (int v = 0; v < 10; ++v) ls.push_back(virtual_state(l, BoundaryType::I, v));
                  TransformedSystem lt(l, make_grid(l, {ls.front()}, 1024));
                  int l_accepted = 0;
                  for (const auto& s : ls) {
                    try {
                      lt = add_state(lt, s);
                      ++l_accepted;
                    } catch (const Error&) {
                      break;
                    }
                  }
                  const bool ok = accepted == 3 && rejected && l_accepted >= 10;
                  return Outcome{ok ? 0.0 : 1.0, fmt("J1 accepted %.0f, L1 accepted %.0f", accepted, l_accepted)};
                }});
  return cs;
}

}  // namespace

int main() {
  int failed = 0;
  for (const Criterion& c : criteria()) {
    const double t0 = now();
    Outcome o;
    std::string err;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.error = std::numeric_limits<double>::infinity();
      err = e.what();
    }
    const double dt = now() - t0;
    const bool in_time = c.seconds <= 0.0 || dt < c.seconds;
    const bool pass = o.error <= c.tol && in_time;
    if (!pass) ++failed;
    std::printf("%s  criterion %2d  %s  error=%.3e tol=%.1e time=%.2fs%s", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                o.error, c.tol, dt, c.seconds > 0.0 ? fmt(" limit=%.0fs", c.seconds).c_str() : "");
    if (!o.note.empty()) std::printf("  [%s]", o.note.c_str());
    if (!err.empty()) std::printf("  [%s]", err.c_str());
    std::printf("\n");
  }
  std::printf("%s: %d failing\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
