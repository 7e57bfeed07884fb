#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "amforge/specfun.hpp"

using namespace amforge;
using namespace amforge::specfun;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

TEST_SUITE("specfun") {
  TEST_CASE("gamma at classical points") {
    CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rel(gamma_fn(0.5), std::sqrt(std::numbers::pi)) < 1e-13);
    CHECK(rel(gamma_fn(6.0), 120.0) < 1e-13);
  }

  TEST_CASE("gamma matches tgamma on [0.5, 50]") {
    for (double x = 0.5; x <= 50.0; x += 0.37) CHECK(rel(gamma_fn(x), std::tgamma(x)) < 1e-12);
  }

  TEST_CASE("gamma reflection below one half") {
    CHECK(rel(gamma_fn(-0.5), -2.0 * std::sqrt(std::numbers::pi)) < 1e-12);
    CHECK(rel(gamma_fn(0.1), std::tgamma(0.1)) < 1e-12);
  }

  TEST_CASE("gamma poles are reported") {
    for (double x : {0.0, -1.0, -4.0}) {
      try {
        gamma_fn(x);
        FAIL("no error at x=" << x);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::ParameterPole);
      }
    }
  }

  TEST_CASE("pochhammer") {
    CHECK(pochhammer(2.5, 0) == 1.0);
    CHECK(pochhammer(2.5, 3) == doctest::Approx(2.5 * 3.5 * 4.5));
    CHECK(pochhammer(-2.0, 3) == 0.0);
  }

  TEST_CASE("laguerre low degrees") {
    const FnValue l0 = laguerre(0, 1.5, 7.3);
    CHECK(l0.value == 1.0);
    CHECK(l0.derivative == 0.0);
    const FnValue l1 = laguerre(1, 1.5, 1.0);
    CHECK(l1.value == doctest::Approx(1.5).epsilon(1e-15));
    CHECK(l1.derivative == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(laguerre(2, 1.5, 1.0).value == doctest::Approx(1.375).epsilon(1e-15));
    // mpmath laguerre(3, 0.7, 2.5)
    CHECK(rel(laguerre(3, 0.7, 2.5).value, -0.6986666666666666) < 1e-14);
  }

  TEST_CASE("jacobi low degrees and parity") {
    CHECK(jacobi(0, 0.3, 2.0, 0.7).value == 1.0);
    CHECK(jacobi(1, 0.5, 1.5, 0.0).value == doctest::Approx(-0.5).epsilon(1e-15));
    // mpmath jacobi(3, 0.3, 1.2, 0.4)
    CHECK(rel(jacobi(3, 0.3, 1.2, 0.4).value, -0.5149375) < 1e-13);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> par(-0.4, 4.0), arg(-1.0, 1.0);
    std::uniform_int_distribution<int> deg(0, 6);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = deg(rng);
      const double a = par(rng), b = par(rng), x = arg(rng);
      const double lhs = jacobi(n, a, b, -x).value;
      const double rhs = (n % 2 ? -1.0 : 1.0) * jacobi(n, b, a, x).value;
      const double scale = std::max({1.0, std::abs(jacobi(n, a, b, 1.0).value), std::abs(jacobi(n, a, b, -1.0).value)});
      CHECK(std::abs(lhs - rhs) <= 1e-13 * scale);
    }
  }

  TEST_CASE("polynomial derivatives match central differences") {
    const double h = 1e-5;
    for (double x : {0.3, 1.7, 4.2}) {
      const double fd = (laguerre(4, 1.2, x + h).value - laguerre(4, 1.2, x - h).value) / (2 * h);
      CHECK(rel(laguerre(4, 1.2, x).derivative, fd) < 1e-6);
    }
    for (double x : {-0.6, 0.1, 0.8}) {
      const double fd = (jacobi(5, 1.5, 0.5, x + h).value - jacobi(5, 1.5, 0.5, x - h).value) / (2 * h);
      CHECK(rel(jacobi(5, 1.5, 0.5, x).derivative, fd) < 1e-6);
    }
  }

  TEST_CASE("1F1 examples") {
    CHECK(hyp1f1(0.7, 2.1, 0.0).value == 1.0);
    CHECK(rel(hyp1f1(-2.0, 2.5, 1.0).value, 1.375 * 2.0 * std::tgamma(2.5) / std::tgamma(4.5)) < 1e-14);
    // Kummer: 1F1(1;3;2) = e^2 1F1(2;3;-2), both sides by the raw series
    const double lhs = hyp1f1_series(1.0, 3.0, 2.0);
    const double rhs = std::exp(2.0) * hyp1f1_series(2.0, 3.0, -2.0);
    CHECK(rel(lhs, rhs) < 1e-13);
    CHECK(rel(lhs, 2.194528049465325) < 1e-14);
  }

  TEST_CASE("1F1 reduces to Laguerre at integer degree") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> deg(0, 8);
    std::uniform_real_distribution<double> alpha(-0.4, 5.0), arg(0.0, 10.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = deg(rng);
      const double a = alpha(rng), x = arg(rng);
      const double scale = std::tgamma(a + 1.0 + n) / (std::tgamma(a + 1.0) * factorial(n));
      const double lag = laguerre(n, a, x).value;
      CHECK(std::abs(hyp1f1(-n, a + 1.0, x).value * scale - lag) <= 1e-10 * std::max(std::abs(lag), 1e-3));
    }
  }

  TEST_CASE("1F1 large negative argument stays accurate") {
    // e^x 1F1(b-a; b; -x) at x = -40 against the polynomial case
    const double x = -40.0;
    const FnValue v = hyp1f1(-3.0, 1.5, x);
    const double exact = 1.0 + (-3.0 / 1.5) * x + (-3.0 * -2.0) / (1.5 * 2.5 * 2.0) * x * x +
                         (-3.0 * -2.0 * -1.0) / (1.5 * 2.5 * 3.5 * 6.0) * x * x * x;
    CHECK(rel(v.value, exact) < 1e-12);
    CHECK(rel(hyp1f1(0.5, 1.5, -30.0).value, std::sqrt(std::numbers::pi) * std::erf(std::sqrt(30.0)) /
                                                  (2.0 * std::sqrt(30.0))) < 1e-12);
  }

  TEST_CASE("1F1 satisfies Kummer's equation") {
    const double a = 0.37, b = 1.9;
    for (double x : {0.4, 2.0, 7.5, -3.0}) {
      const FnValue y = hyp1f1(a, b, x);
      const double y2 = a * (a + 1.0) / (b * (b + 1.0)) * hyp1f1(a + 2.0, b + 2.0, x).value;
      const double residual = x * y2 + (b - x) * y.derivative - a * y.value;
      CHECK(std::abs(residual) <= 1e-8 * std::max(1.0, std::abs(a * y.value)));
    }
  }

  TEST_CASE("2F1 examples") {
    CHECK(hyp2f1(0.3, 0.8, 1.7, 0.0).value == 1.0);
    CHECK(hyp2f1(-1.0, 5.0, 2.0, 0.3).value == doctest::Approx(0.25).epsilon(1e-15));
    // Euler: 2F1(1/2,1/2;3/2;1/4) = (3/4)^{1/2} 2F1(1,1;3/2;1/4), both by the raw series
    const double lhs = hyp2f1_series(0.5, 0.5, 1.5, 0.25);
    CHECK(rel(lhs, std::sqrt(0.75) * hyp2f1_series(1.0, 1.0, 1.5, 0.25)) < 1e-13);
    CHECK(rel(lhs, std::numbers::pi / 3.0) < 1e-14);
  }

  TEST_CASE("2F1 reduces to Jacobi at integer degree") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<int> deg(0, 8);
    std::uniform_real_distribution<double> par(-0.4, 5.0), arg(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = deg(rng);
      const double a = par(rng), b = par(rng), x = arg(rng);
      const double scale = std::tgamma(a + 1.0 + n) / (std::tgamma(a + 1.0) * factorial(n));
      const double jac = jacobi(n, a, b, x).value;
      const double via = scale * hyp2f1(-n, n + a + b + 1.0, a + 1.0, 0.5 * (1.0 - x)).value;
      CHECK(std::abs(via - jac) <= 1e-10 * std::max(std::abs(jac), 1e-3));
    }
  }

  TEST_CASE("2F1 close to one") {
    // mpmath hyp2f1(0.3, 1.7, 2.6, 0.97)
    CHECK(rel(hyp2f1(0.3, 1.7, 2.6, 0.97).value, 1.5287342357179703) < 1e-10);
    CHECK(rel(hyp2f1(0.3, 1.7, 2.6, 0.97, 0.03).value, 1.5287342357179703) < 1e-10);
  }

  TEST_CASE("2F1 derivative") {
    const double h = 1e-5;
    for (double x : {-0.8, 0.2, 0.6, 0.9}) {
      const double fd = (hyp2f1(0.4, 1.1, 2.3, x + h).value - hyp2f1(0.4, 1.1, 2.3, x - h).value) / (2 * h);
      CHECK(rel(hyp2f1(0.4, 1.1, 2.3, x).derivative, fd) < 1e-6);
    }
  }

  TEST_CASE("2F1 pole in c") {
    try {
      hyp2f1(0.5, 0.5, -2.0, 0.3);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ParameterPole);
    }
  }

  TEST_CASE("conjugate-pair 2F1") {
    CHECK(hyp2f1_complex_conjugate_pair(0.5, 1.0, 0.5, -1.0, 2.5, 0.0) == 1.0);
    // B = 0 degenerates to the real function
    CHECK(rel(hyp2f1_complex_conjugate_pair(0.7, 0.0, 1.3, 0.0, 2.5, 0.4), hyp2f1(0.7, 1.3, 2.5, 0.4).value) < 1e-13);
    // swapping the pair leaves the value unchanged
    const double v1 = hyp2f1_complex_conjugate_pair(0.6, 0.8, 0.6, -0.8, 1.9, 0.55);
    const double v2 = hyp2f1_complex_conjugate_pair(0.6, -0.8, 0.6, 0.8, 1.9, 0.55);
    CHECK(rel(v1, v2) < 1e-14);
  }

  TEST_CASE("conjugate-pair 2F1 rejects a non-conjugate pair") {
    try {
      hyp2f1_complex_conjugate_pair(0.6, 0.8, 0.9, 0.3, 1.9, 0.55);
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ImaginaryResidue);
    }
  }
}
