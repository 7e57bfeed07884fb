#include <doctest.h>

#include <cmath>

#include "amforge/amcore.hpp"
#include "amforge/oracle.hpp"

using namespace amforge;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const SolvableSystem L2 = SolvableSystem::make(SystemKind::L, {2.0, kNaN, kNaN});

SpectralResult oracle(const TransformedSystem& t, int n, int k) {
  const Domain s = t.support();
  return fd_spectrum([&](double x) { return t.potential(x); }, t.base().domain(), n, k,
                     std::pair{s.lower, s.upper});
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("tridiagonal lowest eigenvalues") {
    // -f'' on (0, pi) with N interior points: 4/h^2 sin^2(j pi / (2 (N + 1))).
    const int n = 200;
    const double h = M_PI / (n + 1);
    const std::vector<double> diag(n, 2.0 / (h * h));
    const std::vector<double> off(n - 1, -1.0 / (h * h));
    const auto ev = tridiagonal_lowest(diag, off, 4);
    REQUIRE(ev.size() == 4);
    for (int j = 1; j <= 4; ++j) {
      const double exact = 4.0 / (h * h) * std::pow(std::sin(j * M_PI / (2.0 * (n + 1))), 2);
      CHECK(ev[j - 1] == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(tridiagonal_lowest({3.0}, {}, 1) == std::vector<double>{3.0});
  }

  TEST_CASE("base L spectrum") {
    const auto r = fd_spectrum([](double x) { return L2.potential(x); }, L2.domain(), 2000, 3);
    REQUIRE(r.extrapolated.size() == 3);
    for (int n = 0; n < 3; ++n) CHECK(std::abs(r.extrapolated[n] - 4.0 * n) <= 1e-3);
    CHECK(r.grid.lower >= 0.0);
  }

  TEST_CASE("L + L1(v=0) spectrum") {
    const SeedSolution seed = virtual_state(L2, BoundaryType::I, 0);
    const TransformedSystem base(L2, make_grid(L2, {seed}, 1024));
    const TransformedSystem t = add_state(base, seed);
    const auto r = oracle(t, 2000, 4);
    const std::vector<double> want = {-10.0, 0.0, 4.0, 8.0};
    for (int n = 0; n < 4; ++n) CHECK(std::abs(r.extrapolated[n] - want[n]) <= 5e-3);
  }

  TEST_CASE("deleting the ground state removes 0") {
    const TransformedSystem base(L2, make_grid(L2, {}, 1024));
    const TransformedSystem d = delete_state(base, 0);
    const auto r = oracle(d, 2000, 3);
    const std::vector<double> want = {4.0, 8.0, 12.0};
    for (int n = 0; n < 3; ++n) {
      CHECK(std::abs(r.extrapolated[n] - want[n]) <= 5e-3);
      CHECK(std::abs(r.extrapolated[n]) > 0.5);
    }
  }

  TEST_CASE("second-order convergence") {
    const auto r = fd_spectrum([](double x) { return L2.potential(x); }, L2.domain(), 500, 2);
    for (int n = 0; n < 2; ++n) {
      const double coarse = std::abs(r.coarse[n] - 4.0 * n);
      const double fine = std::abs(r.eigenvalues[n] - 4.0 * n);
      CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
      CHECK(std::abs(r.extrapolated[n] - 4.0 * n) < fine);
    }
  }

  TEST_CASE("clip interval is honoured") {
    const auto r = fd_spectrum([](double x) { return L2.potential(x); }, L2.domain(), 400, 1, std::pair{0.5, 3.0});
    CHECK(r.grid.lower >= 0.5);
    CHECK(r.grid.upper <= 3.0);
  }
}
