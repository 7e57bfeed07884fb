#include "amforge/specfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <type_traits>

namespace amforge::specfun {
namespace {

using cplx = std::complex<double>;

constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_gamma(double x) {
  // x >= 0.5
  x -= 1.0;
  double acc = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) acc += kLanczos[i] / (x + static_cast<double>(i));
  const double t = x + kLanczosG + 0.5;
  // split the power so that large arguments do not overflow before exp(-t)
  const double half = std::pow(t, 0.5 * (x + 0.5));
  return std::sqrt(2.0 * std::numbers::pi) * half * (half * std::exp(-t)) * acc;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
double mag(const T& v) {
  return std::abs(v);
}

template <class T>
bool is_polynomial_parameter(const T& a) {
  if constexpr (std::is_same_v<T, double>) {
    return is_nonpositive_integer(a);
  } else {
    return a.imag() == 0.0 && is_nonpositive_integer(a.real());
  }
}

template <class T>
T snap_integer(const T& a) {
  if constexpr (std::is_same_v<T, double>) {
    return is_nonpositive_integer(a) ? std::round(a) : a;
  } else {
    return is_polynomial_parameter(a) ? T(std::round(a.real()), 0.0) : a;
  }
}

/// Plain power series of 1F1; terminates on an exactly vanishing term.
double series_1f1(double a, double b, double x) {
  double sum = 1.0;
  double term = 1.0;
  int quiet = 0;
  for (int k = 0; k < kSeriesMaxTerms; ++k) {
    term *= (a + k) / (b + k) * x / (k + 1);
    sum += term;
    if (term == 0.0) return sum;
    if (std::abs(term) < kSeriesTolerance * std::abs(sum)) {
      if (++quiet >= kSeriesQuietTerms) return sum;
    } else {
      quiet = 0;
    }
  }
  throw Error(Errc::NonConvergence, "1F1(" + fmt(a) + ";" + fmt(b) + ";" + fmt(x) +
                                        ") did not converge within the term cap");
}

template <class T>
T series_2f1(T a, T b, double c, double z) {
  T sum = 1.0;
  T term = 1.0;
  int quiet = 0;
  for (int k = 0; k < kSeriesMaxTerms; ++k) {
    const double dk = k;
    term *= (a + dk) * (b + dk) / ((c + dk) * (dk + 1.0)) * z;
    sum += term;
    if (term == T(0.0)) return sum;
    if (mag(term) < kSeriesTolerance * mag(sum)) {
      if (++quiet >= kSeriesQuietTerms) return sum;
    } else {
      quiet = 0;
    }
  }
  throw Error(Errc::NonConvergence, "2F1 series at x=" + fmt(z) + " did not converge");
}

template <class T>
struct Pair {
  T value;
  T derivative;
};

/// Integrates the hypergeometric ODE
///   z(1-z) y'' + [c - (a+b+1) z] y' - ab y = 0
/// from z0 to z1 (z0 < z1 < 1) by successive Taylor re-expansions, each
/// step covering at most half the distance to the singular point z = 1.
/// Positions are tracked as r = 1 - z so that r1 may be given exactly.
template <class T>
Pair<T> continue_2f1(T a, T b, double c, double r0, Pair<T> y0, double r1) {
  const T ab = a * b;
  const T s1 = a + b + 1.0;
  double rk = r0;
  T y = y0.value;
  T yp = y0.derivative;
  while (rk > r1) {
    const double h = std::min(rk - r1, 0.5 * rk);
    if (!(h > 0.0)) break;
    const double zk = 1.0 - rk;
    const double A = zk * rk;
    const double B = 2.0 * rk - 1.0;
    const T q0 = c - s1 * zk;
    const T q1 = -s1;
    // scaled coefficients d_n = c_n h^n keep every term in range when h is tiny
    T dn0 = y;
    T dn1 = yp * h;
    T val = dn0 + dn1;
    T dsum = dn1;  // sum n d_n
    bool converged = false;
    int quiet = 0;
    for (int n = 0; n < 4000; ++n) {
      const double dn = n;
      const T dn2 = -((B * dn + q0) * (dn + 1.0) * dn1 * h + (-dn * (dn - 1.0) + q1 * dn - ab) * dn0 * (h * h)) /
                    (A * (dn + 2.0) * (dn + 1.0));
      val += dn2;
      dsum += (dn + 2.0) * dn2;
      const double scale = mag(val) + mag(dsum);
      if ((dn + 3.0) * mag(dn2) <= 1e-17 * scale) {
        if (++quiet >= 2) {
          converged = true;
          break;
        }
      } else {
        quiet = 0;
      }
      dn0 = dn1;
      dn1 = dn2;
    }
    const T der = dsum / h;
    if (!converged) {
      throw Error(Errc::NonConvergence, "2F1 Taylor re-expansion stalled at x=" + fmt(zk));
    }
    y = val;
    yp = der;
    rk = (h == rk - r1) ? r1 : rk - h;
  }
  return {y, yp};
}

/// Terminating 2F1. Above z = 1/2 the sum is taken in 1 - z:
///   2F1(-n, b; c; z) = (c-b)_n / (c)_n 2F1(-n, b; b-c-n+1; 1-z)
/// which avoids the cancellation of large alternating terms near z = 1.
template <class T>
T polynomial_2f1(T a, T b, double c, double z, double omz) {
  if (!is_polynomial_parameter(a)) std::swap(a, b);
  if (!is_polynomial_parameter(a)) return series_2f1(a, b, c, z);
  const T lower = b - c + a + 1.0;
  if (z <= 0.5 || is_polynomial_parameter(lower)) return series_2f1(a, b, c, z);
  const int n = static_cast<int>(std::lround(-std::real(a)));
  T ratio = 1.0;
  for (int k = 0; k < n; ++k) ratio *= (T(c) - b + double(k)) / (c + k);
  // the series in 1 - z has a complex lower parameter for complex b; sum it directly
  T sum = 1.0, term = 1.0;
  for (int k = 0; k < n; ++k) {
    const double dk = k;
    term *= (a + dk) * (b + dk) / ((lower + dk) * (dk + 1.0)) * omz;
    sum += term;
  }
  return ratio * sum;
}

template <class T>
Pair<T> eval_2f1(T a, T b, double c, double z, double omz) {
  if (is_nonpositive_integer(c)) {
    throw Error(Errc::ParameterPole, "2F1 lower parameter c=" + fmt(c) + " is a non-positive integer");
  }
  a = snap_integer(a);
  b = snap_integer(b);
  if (a == T(0.0) || b == T(0.0)) return {T(1.0), T(0.0)};
  const T slope = a * b / c;
  if (z == 0.0) return {T(1.0), slope};

  if (is_polynomial_parameter(a) || is_polynomial_parameter(b)) {
    return {polynomial_2f1(a, b, c, z, omz), slope * polynomial_2f1<T>(a + 1.0, b + 1.0, c + 1.0, z, omz)};
  }
  if (std::abs(z) <= 0.5) {
    return {series_2f1(a, b, c, z), slope * series_2f1<T>(a + 1.0, b + 1.0, c + 1.0, z)};
  }
  if (z < -0.5) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^{-a} 2F1(a, c-b; c; z/(z-1))
    const double w = z / (z - 1.0);
    const Pair<T> inner = eval_2f1<T>(a, T(c) - b, c, w, 1.0 - w);
    const T pre = std::pow(T(1.0 - z), -a);
    const double dw = -1.0 / ((z - 1.0) * (z - 1.0));
    return {pre * inner.value, a * pre / (1.0 - z) * inner.value + pre * inner.derivative * dw};
  }
  if (z >= 1.0 || !(omz > 0.0)) {
    throw Error(Errc::NonConvergence, "2F1 requested at x=" + fmt(z) + " (outside the unit disc)");
  }
  const double z0 = 0.5;
  const Pair<T> start{series_2f1(a, b, c, z0), slope * series_2f1<T>(a + 1.0, b + 1.0, c + 1.0, z0)};
  return continue_2f1(a, b, c, 1.0 - z0, start, omz);
}

}  // namespace

bool is_nonpositive_integer(double x) {
  if (x > 0.5) return false;
  return std::abs(x - std::round(x)) < 1e-13;
}

double gamma_fn(double x) {
  if (is_nonpositive_integer(x)) {
    throw Error(Errc::ParameterPole, "Gamma has a pole at " + fmt(x));
  }
  if (x < 0.5) {
    return std::numbers::pi / (std::sin(std::numbers::pi * x) * lanczos_gamma(1.0 - x));
  }
  return lanczos_gamma(x);
}

double pochhammer(double a, int k) {
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= a + i;
  return p;
}

FnValue laguerre(int n, double alpha, double x) {
  if (n < 0) throw Error(Errc::IndexOutOfRange, "Laguerre degree must be non-negative");
  // L_n^{(a)}(x) = sum_k (a+k+1)_{n-k}/(n-k)! (-x)^k/k!, finite for every alpha
  auto value = [](int deg, double a, double arg) {
    double sum = 0.0;
    double xk = 1.0;  // (-x)^k / k!
    for (int k = 0; k <= deg; ++k) {
      double coef = 1.0;
      for (int i = 1; i <= deg - k; ++i) coef *= (a + k + i) / i;
      sum += coef * xk;
      xk *= -arg / (k + 1);
    }
    return sum;
  };
  FnValue out;
  out.value = value(n, alpha, x);
  out.derivative = n == 0 ? 0.0 : -value(n - 1, alpha + 1.0, x);
  return out;
}

FnValue jacobi(int n, double alpha, double beta, double x) {
  if (n < 0) throw Error(Errc::IndexOutOfRange, "Jacobi degree must be non-negative");
  // P_n^{(a,b)}(x) = sum_k (a+k+1)_{n-k}/(n-k)! (n+a+b+1)_k/k! ((x-1)/2)^k
  auto value = [](int deg, double a, double b, double arg) {
    const double y = 0.5 * (arg - 1.0);
    double sum = 0.0;
    double upper = 1.0;  // (deg+a+b+1)_k / k! * y^k
    for (int k = 0; k <= deg; ++k) {
      double coef = 1.0;
      for (int i = 1; i <= deg - k; ++i) coef *= (a + k + i) / i;
      sum += coef * upper;
      upper *= (deg + a + b + 1.0 + k) / (k + 1) * y;
    }
    return sum;
  };
  // the series in (x-1)/2 cancels badly near x = -1; use
  // P_n^{(a,b)}(x) = (-1)^n P_n^{(b,a)}(-x) there
  auto eval = [&](int deg, double a, double b) {
    if (x >= 0.0) return value(deg, a, b, x);
    return (deg % 2 ? -1.0 : 1.0) * value(deg, b, a, -x);
  };
  FnValue out;
  out.value = eval(n, alpha, beta);
  out.derivative = n == 0 ? 0.0 : 0.5 * (n + alpha + beta + 1.0) * eval(n - 1, alpha + 1.0, beta + 1.0);
  return out;
}

namespace {

double hyp1f1_value(double a, double b, double x) {
  if (is_nonpositive_integer(b)) {
    throw Error(Errc::ParameterPole, "1F1 lower parameter b=" + fmt(b) + " is a non-positive integer");
  }
  if (a == 0.0 || x == 0.0) return 1.0;
  if (is_nonpositive_integer(a)) return series_1f1(std::round(a), b, x);
  if (x < 0.0) {
    // Kummer: 1F1(a;b;x) = e^x 1F1(b-a;b;-x); the summed argument becomes positive
    const double ap = is_nonpositive_integer(b - a) ? std::round(b - a) : b - a;
    return std::exp(x) * series_1f1(ap, b, -x);
  }
  return series_1f1(a, b, x);
}

}  // namespace

FnValue hyp1f1(double a, double b, double x) {
  FnValue out;
  out.value = hyp1f1_value(a, b, x);
  out.derivative = a == 0.0 ? 0.0 : a / b * hyp1f1_value(a + 1.0, b + 1.0, x);
  return out;
}

FnValue hyp2f1(double a, double b, double c, double x) { return hyp2f1(a, b, c, x, 1.0 - x); }

FnValue hyp2f1(double a, double b, double c, double x, double one_minus_x) {
  const Pair<double> p = eval_2f1<double>(a, b, c, x, one_minus_x);
  return {p.value, p.derivative};
}

FnValue hyp2f1_conjugate_pair_fn(double a_re, double a_im, double b_re, double b_im, double c,
                                 double x) {
  return hyp2f1_conjugate_pair_fn(a_re, a_im, b_re, b_im, c, x, 1.0 - x);
}

FnValue hyp2f1_conjugate_pair_fn(double a_re, double a_im, double b_re, double b_im, double c,
                                 double x, double one_minus_x) {
  const Pair<cplx> p = eval_2f1<cplx>(cplx(a_re, a_im), cplx(b_re, b_im), c, x, one_minus_x);
  const double vmag = std::abs(p.value);
  const double dmag = std::max(std::abs(p.derivative), vmag);
  if (std::abs(p.value.imag()) > 1e-10 * vmag || std::abs(p.derivative.imag()) > 1e-10 * dmag) {
    throw Error(Errc::ImaginaryResidue,
                "2F1 with parameters (" + fmt(a_re) + "+" + fmt(a_im) + "i, " + fmt(b_re) + "+" +
                    fmt(b_im) + "i) is not real at x=" + fmt(x) +
                    "; the upper parameters must form a conjugate pair");
  }
  return {p.value.real(), p.derivative.real()};
}

double hyp2f1_complex_conjugate_pair(double a_re, double a_im, double b_re, double b_im, double c,
                                     double x) {
  return hyp2f1_conjugate_pair_fn(a_re, a_im, b_re, b_im, c, x).value;
}

double hyp1f1_series(double a, double b, double x) {
  if (is_nonpositive_integer(b)) {
    throw Error(Errc::ParameterPole, "1F1 lower parameter b=" + fmt(b) + " is a non-positive integer");
  }
  return series_1f1(a, b, x);
}

double hyp2f1_series(double a, double b, double c, double x) {
  if (is_nonpositive_integer(c)) {
    throw Error(Errc::ParameterPole, "2F1 lower parameter c=" + fmt(c) + " is a non-positive integer");
  }
  return series_2f1<double>(a, b, c, x);
}

}  // namespace amforge::specfun
