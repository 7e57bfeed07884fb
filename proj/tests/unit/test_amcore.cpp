#include <doctest.h>

#include <cmath>

#include "amforge/amcore.hpp"
#include "amforge/verify.hpp"

using namespace amforge;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const SolvableSystem L2 = SolvableSystem::make(SystemKind::L, {2.0, kNaN, kNaN});
const SolvableSystem J23 = SolvableSystem::make(SystemKind::J, {2.0, 3.0, kNaN});

template <class F>
Errc error_code(F f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Config;
}

double norm2(const GridFn& f, const Grid& g) { return full_inner_nodes(f.values(), f.values(), g); }

std::vector<double> energies(const TransformedSystem& t, int k) {
  std::vector<double> out;
  for (const Level& l : t.levels(k)) out.push_back(l.energy);
  return out;
}

double chain_difference(const TransformedSystem& a, const TransformedSystem& b, int top) {
  double worst = max_relative(a.potential_nodes(), b.potential_nodes());
  for (int n = 0; n <= top; ++n) worst = std::max(worst, max_relative(a.eigenfunction(n).values(), b.eigenfunction(n).values()));
  const auto sa = a.added_states(), sb = b.added_states();
  for (std::size_t j = 0; j < sa.size(); ++j) worst = std::max(worst, max_relative(sa[j].values(), sb[j].values()));
  return worst;
}

struct LPlusL1 {
  SeedSolution seed = virtual_state(L2, BoundaryType::I, 0);
  GridPtr grid = make_grid(L2, {seed}, 1024);
  TransformedSystem base{L2, grid};
  TransformedSystem added = add_state(base, seed);
};

}  // namespace

TEST_SUITE("amcore") {
  TEST_CASE("empty chain is the base system") {
    const TransformedSystem t(L2, make_grid(L2, {}, 256));
    for (std::size_t i = 0; i < t.grid()->size(); i += 17) {
      const double x = t.grid()->x()[i];
      CHECK(t.potential_nodes()[i] == L2.potential(x));
    }
    CHECK(energies(t, 3) == std::vector<double>{0.0, 4.0, 8.0});
    CHECK(t.support().lower == 0.0);
  }

  TEST_CASE("L + L1(v=0) spectrum and norms") {
    const LPlusL1 c;
    CHECK(energies(c.added, 4) == std::vector<double>{-10.0, 0.0, 4.0, 8.0});
    CHECK(c.added.levels(1)[0].provenance == "added:L1(v=0)");
    CHECK(c.added.levels(2)[1].provenance == "base:n=0");
    const Grid& g = *c.grid;
    CHECK(std::abs(norm2(c.added.added_states().at(0), g) - 1.0) <= 1e-8);
    for (int n = 0; n <= 3; ++n) {
      CHECK(std::abs(norm2(c.added.eigenfunction(n), g) - L2.norm_constant(n)) <= 1e-8 * L2.norm_constant(n));
      CHECK(std::abs(full_inner_nodes(c.added.eigenfunction(n).values(), c.added.added_states()[0].values(), g)) <= 1e-8);
    }
    CHECK(c.added.steps().size() == 1);
    CHECK(c.added.steps()[0].op == "add");
  }

  TEST_CASE("one-seed potential formula") {
    const LPlusL1 c;
    const Grid& g = *c.grid;
    const RunningInner ri = running_inner(c.seed.eval, c.seed.eval, c.grid, Direction::FromLower);
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = g.size() / 10; i < g.size() * 9 / 10; i += 11) {
      const double x = g.x()[i];
      const FnValue p = c.seed.eval(x);
      const double p1 = p.value / (1.0 + ri.values()[i]);
      const double u = L2.potential(x) - 2.0 * (2.0 * p.derivative * p1 - p.value * p.value * p1 * p1);
      worst = std::max(worst, std::abs(u - c.added.potential_nodes()[i]));
      scale = std::max(scale, std::abs(u));
    }
    CHECK(worst <= 1e-10 * scale);
  }

  TEST_CASE("potential is undefined outside the grid span") {
    const LPlusL1 c;
    CHECK(std::isnan(c.added.potential(2.0 * c.grid->upper_edge())));
    CHECK(std::isfinite(c.added.potential(1.0)));
    CHECK(c.added.support().upper == doctest::Approx(c.grid->upper_edge()));
  }

  TEST_CASE("M=1 direct equals add_state") {
    const LPlusL1 c;
    const TransformedSystem d = add_states_direct(c.base, {c.seed});
    CHECK(chain_difference(d, c.added, 3) <= 1e-13);
  }

  TEST_CASE("M=2 generalized L1 seeds agree with sequential addition") {
    const std::vector<SeedSolution> seeds = {generalized_virtual_state(L2, BoundaryType::I, 0.5),
                                             generalized_virtual_state(L2, BoundaryType::I, 1.5)};
    const TransformedSystem base(L2, make_grid(L2, seeds, 1024));
    const TransformedSystem direct = add_states_direct(base, seeds);
    const TransformedSystem seq = add_state(add_state(base, seeds[0]), seeds[1]);
    CHECK(chain_difference(direct, seq, 3) <= 1e-8);
    CHECK(energies(direct, 3) == std::vector<double>{-16.0, -12.0, 0.0});
  }

  TEST_CASE("M=3 added states are orthonormal") {
    const std::vector<SeedSolution> seeds = {virtual_state(L2, BoundaryType::I, 0), virtual_state(L2, BoundaryType::I, 1),
                                             virtual_state(L2, BoundaryType::I, 2)};
    const TransformedSystem base(L2, make_grid(L2, seeds, 1024));
    const TransformedSystem t = add_states_direct(base, seeds);
    const auto chi = t.added_states();
    REQUIRE(chi.size() == 3);
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t k = j; k < 3; ++k) {
        CHECK(std::abs(full_inner_nodes(chi[j].values(), chi[k].values(), *t.grid()) - (j == k ? 1.0 : 0.0)) <= 1e-7);
      }
    }
  }

  TEST_CASE("deleting the L ground state") {
    const TransformedSystem base(L2, make_grid(L2, {}, 1024));
    const TransformedSystem d = delete_state(base, 0);
    CHECK(energies(d, 3) == std::vector<double>{4.0, 8.0, 12.0});
    for (int n : {1, 2}) {
      CHECK(std::abs(norm2(d.eigenfunction(n), *d.grid()) - L2.norm_constant(n)) <= 1e-8 * L2.norm_constant(n));
    }
    CHECK(error_code([&] { d.eigenfunction(0); }) == Errc::IndexOutOfRange);
    CHECK(d.deletion_partners().size() == 1);
  }

  TEST_CASE("deletion requires unit norm") {
    const TransformedSystem base(L2, make_grid(L2, {}, 512));
    DeleteOptions opts;
    opts.auto_normalize = false;
    CHECK(error_code([&] { delete_state(base, 0, opts); }) == Errc::NonUnitNorm);
    CHECK(error_code([&] { delete_functions(base, {base.eigenfunction(1)}, opts); }) == Errc::NonUnitNorm);
  }

  TEST_CASE("deleting two J levels") {
    const TransformedSystem base(J23, make_grid(J23, {}, 1024));
    const TransformedSystem d = delete_states_direct(base, {0, 1});
    CHECK(d.levels(1)[0].energy == 56.0);
    // The joint block is below rounding near x = pi/2 and falls back to
    // deleting level 1 first; the two orders agree to 2e-10 in the bulk and
    // drift to ~8e-7 at the last nodes, where U ~ 3e8.
    const TransformedSystem seq = delete_state(delete_state(base, 0), 0);
    CHECK(max_relative(d.potential_nodes(), seq.potential_nodes()) <= 2e-6);
    for (int n = 2; n <= 4; ++n) CHECK(max_relative(d.eigenfunction(n).values(), seq.eigenfunction(n).values()) <= 2e-6);
    const TransformedSystem one = delete_states_direct(base, {0});
    CHECK(max_relative(one.potential_nodes(), delete_state(base, 0).potential_nodes()) <= 1e-13);
  }

  TEST_CASE("deleting two L levels jointly") {
    const TransformedSystem base(L2, make_grid(L2, {}, 1024));
    const TransformedSystem d = delete_states_direct(base, {0, 1});
    CHECK(d.levels(1)[0].energy == 8.0);
    const TransformedSystem seq = delete_state(delete_state(base, 0), 0);
    CHECK(max_relative(d.potential_nodes(), seq.potential_nodes()) <= 1e-8);
    for (int n = 2; n <= 4; ++n) CHECK(max_relative(d.eigenfunction(n).values(), seq.eigenfunction(n).values()) <= 1e-8);
  }

  TEST_CASE("addition then deletion restores the system") {
    const LPlusL1 c;
    const TransformedSystem back = delete_state(c.added, 0);
    CHECK(max_relative(back.potential_nodes(), c.base.potential_nodes()) <= 1e-7);
    for (int n = 0; n <= 3; ++n) {
      CHECK(max_relative(back.eigenfunction(n).values(), c.base.eigenfunction(n).values()) <= 1e-7);
    }
    CHECK(energies(back, 3) == std::vector<double>{0.0, 4.0, 8.0});
  }

  TEST_CASE("Darboux two-step matches addition") {
    const LPlusL1 c;
    const DarbouxTwoStep d = darboux_twostep(L2, c.seed, c.grid);
    CHECK(max_relative(d.potential_nodes, c.added.potential_nodes()) <= 1e-8);
    const GridFn psi = sample(L2.eigenfunction(1), c.grid, 4.0);
    auto expected = c.added.eigenfunction(1).values();
    for (auto& v : expected) v *= -14.0;
    CHECK(max_relative(d.map(psi).values(), expected) <= 1e-7);
  }

  TEST_CASE("Darboux two-step rejects a seed with a node") {
    // the L1(v=2) seed on g=2 has no node; the base excited state does
    const SeedSolution bad = eigenstate_seed(L2, 1);
    const GridPtr g = make_grid(L2, {}, 512);
    CHECK(error_code([&] { darboux_twostep(L2, bad, g); }) == Errc::NodeInSeed);
  }

  TEST_CASE("eigenfunction as seed changes its norm") {
    const TransformedSystem base(L2, make_grid(L2, {}, 1024));
    const TransformedSystem t = add_state(base, eigenstate_seed(L2, 0));
    const double h = L2.norm_constant(0);
    CHECK(norm2(t.eigenfunction(0), *t.grid()) == doctest::Approx(h / (1.0 + h)).epsilon(1e-8));
    CHECK(t.levels(3)[0].energy == 0.0);
  }

  TEST_CASE("errors") {
    const LPlusL1 c;
    SeedSolution flipped = c.seed;
    flipped.btype = BoundaryType::II;
    CHECK(error_code([&] { add_state(c.base, flipped); }) == Errc::BoundaryMismatch);
    const SeedSolution s2 = virtual_state(L2, BoundaryType::II, 0);
    CHECK(error_code([&] { add_states_direct(c.base, {c.seed, s2}); }) == Errc::MixedTypes);
    CHECK(error_code([&] { delete_state(c.base, -1); }) == Errc::IndexOutOfRange);

    const SolvableSystem j = SolvableSystem::make(SystemKind::J, {2.0, 8.2, kNaN});
    const TransformedSystem jb(j, make_grid(j, {}, 512));
    TransformedSystem t = jb;
    for (int v = 0; v < 3; ++v) t = add_state(t, virtual_state(j, BoundaryType::I, v));
    CHECK(t.param('h') == doctest::Approx(2.2));
    CHECK(error_code([&] { add_state(t, virtual_state(j, BoundaryType::I, 3)); }) == Errc::BudgetExhausted);
  }
}
