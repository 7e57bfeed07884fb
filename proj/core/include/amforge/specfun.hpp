#pragma once

// Special-function kernel: Gamma, Pochhammer, Laguerre and Jacobi
// polynomials, and the (confluent) hypergeometric series 1F1 / 2F1.
// Every evaluator returns the value together with its derivative in the
// argument; derivatives are analytic (parameter-shift or ODE based),
// never finite differences.

#include <complex>

#include "amforge/error.hpp"

namespace amforge {

struct FnValue {
  double value = 0.0;
  double derivative = 0.0;
};

namespace specfun {

/// Relative size below which a series term counts as negligible.
inline constexpr double kSeriesTolerance = 1e-16;
/// Consecutive negligible terms required before a series is accepted.
inline constexpr int kSeriesQuietTerms = 3;
/// Hard cap on summed terms.
inline constexpr int kSeriesMaxTerms = 10000;

/// Gamma function (Lanczos, g = 7, nine coefficients; reflection below 1/2).
/// Throws Errc::ParameterPole at non-positive integers.
double gamma_fn(double x);

/// Rising factorial (a)_k.
double pochhammer(double a, int k);

/// Generalized Laguerre polynomial L_n^{(alpha)}(x).
FnValue laguerre(int n, double alpha, double x);

/// Jacobi polynomial P_n^{(alpha,beta)}(x).
FnValue jacobi(int n, double alpha, double beta, double x);

/// Confluent hypergeometric 1F1(a; b; x).
FnValue hyp1f1(double a, double b, double x);

/// Gauss hypergeometric 2F1(a, b; c; x) for x < 1.
///
/// |x| <= 1/2 is summed directly, x < -1/2 goes through the Pfaff
/// transformation, and 1/2 < x < 1 is reached by Taylor re-expansion of the
/// hypergeometric ODE starting from x = 1/2. Polynomial cases are summed
/// exactly for any x.
FnValue hyp2f1(double a, double b, double c, double x);
/// Same, with 1 - x supplied exactly (for x close to 1).
FnValue hyp2f1(double a, double b, double c, double x, double one_minus_x);

/// 2F1 with complex upper parameters (a_re + i a_im, b_re + i b_im) whose
/// series is real (a conjugate pair). Evaluated in complex arithmetic; the
/// imaginary residue must stay below 1e-10 relative or
/// Errc::ImaginaryResidue is thrown.
double hyp2f1_complex_conjugate_pair(double a_re, double a_im, double b_re, double b_im,
                                     double c, double x);

/// Same as above, with the derivative in x.
FnValue hyp2f1_conjugate_pair_fn(double a_re, double a_im, double b_re, double b_im,
                                 double c, double x);
FnValue hyp2f1_conjugate_pair_fn(double a_re, double a_im, double b_re, double b_im,
                                 double c, double x, double one_minus_x);

/// Raw power series with no transformation applied (for identity checks).
double hyp1f1_series(double a, double b, double x);
double hyp2f1_series(double a, double b, double c, double x);

/// True when x is (numerically) a non-positive integer.
bool is_nonpositive_integer(double x);

}  // namespace specfun
}  // namespace amforge
