#include "amforge/systems.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace amforge {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kHalfPi = 0.5 * std::numbers::pi;

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

double log_sinh(double x) {
  return x > 20.0 ? x - std::numbers::ln2 + std::log1p(-std::exp(-2.0 * x)) : std::log(std::sinh(x));
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::numbers::ln2;
}

// value = exp(log_pre) * P, derivative = exp(log_pre) * (dlog_pre * P + dP/dx)
FnValue assemble(double log_pre, double dlog_pre, FnValue poly, double deta_dx) {
  const double pre = std::exp(log_pre);
  return {pre * poly.value, pre * (dlog_pre * poly.value + poly.derivative * deta_dx)};
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::ParameterOutOfRange, what);
}

}  // namespace

std::string_view to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::L: return "L";
    case SystemKind::J: return "J";
    case SystemKind::Morse: return "Morse";
    case SystemKind::RosenMorse: return "RosenMorse";
    case SystemKind::Eckart: return "Eckart";
    case SystemKind::HypDPT: return "HypDPT";
    case SystemKind::Coulomb: return "Coulomb";
  }
  return "?";
}

SystemKind parse_system_kind(std::string_view name) {
  for (const auto& e : catalog()) {
    if (to_string(e.kind) == name) return e.kind;
  }
  static constexpr std::string_view kNoSeeds[] = {
      "HarmonicOscillator", "KeplerSpherical", "Soliton", "HyperbolicSymmetricTopII"};
  for (auto n : kNoSeeds) {
    if (n == name) {
      throw Error(Errc::UnsupportedSystem,
                  std::string(name) +
                      ": the discrete symmetries of the harmonic oscillator, Kepler problem in "
                      "spherical space, Morse, soliton, Rosen-Morse and hyperbolic symmetric top II "
                      "potentials give no type I/II virtual states; not in the catalog");
    }
  }
  throw Error(Errc::UnsupportedSystem, "unknown system '" + std::string(name) + "'");
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {SystemKind::L, "g", "g > 3/2", "(0, inf)", "inf", "x^2 + g(g-1)/x^2 - (1+2g)"},
      {SystemKind::J, "g,h", "g,h > 3/2", "(0, pi/2)", "inf",
       "g(g-1)/sin^2 x + h(h-1)/cos^2 x - (g+h)^2"},
      {SystemKind::Morse, "h,mu", "h, mu > 0", "(-inf, inf)", "[h]'",
       "mu^2 e^{2x} - mu(2h+1) e^x + h^2"},
      {SystemKind::RosenMorse, "h,mu", "h > sqrt(mu) > 0", "(-inf, inf)", "[h - sqrt(mu)]'",
       "-h(h+1)/cosh^2 x + 2 mu tanh x + h^2 + mu^2/h^2"},
      {SystemKind::Eckart, "g,mu", "sqrt(mu) > g > 3/2", "(0, inf)", "[sqrt(mu) - g]'",
       "g(g-1)/sinh^2 x - 2 mu coth x + g^2 + mu^2/g^2"},
      {SystemKind::HypDPT, "g,h", "h > g > 3/2", "(0, inf)", "[(h-g)/2]'",
       "g(g-1)/sinh^2 x - h(h+1)/cosh^2 x + (h-g)^2"},
      {SystemKind::Coulomb, "g", "g > 3/2", "(0, inf)", "inf", "g(g-1)/x^2 - 2/x + 1/g^2"},
  };
  return entries;
}

int floor_strict(double a) { return static_cast<int>(std::ceil(a)) - 1; }

SolvableSystem::SolvableSystem(SystemKind kind, SystemParams params)
    : kind_(kind), params_(params) {}

SolvableSystem SolvableSystem::make(SystemKind kind, SystemParams p) {
  SolvableSystem s(kind, p);
  const double g = p.g, h = p.h, mu = p.mu;
  switch (kind) {
    case SystemKind::L:
      require(g > 1.5, "g > 3/2 violated (g=" + num(g) + ")");
      break;
    case SystemKind::J:
      require(g > 1.5, "g > 3/2 violated (g=" + num(g) + ")");
      require(h > 1.5, "h > 3/2 violated (h=" + num(h) + ")");
      break;
    case SystemKind::Morse:
      require(h > 0.0, "h > 0 violated (h=" + num(h) + ")");
      require(mu > 0.0, "mu > 0 violated (mu=" + num(mu) + ")");
      s.n_max_ = floor_strict(h);
      break;
    case SystemKind::RosenMorse:
      require(mu > 0.0, "sqrt(mu) > 0 violated (mu=" + num(mu) + ")");
      require(h > std::sqrt(mu), "h > sqrt(mu) violated (h=" + num(h) + ", mu=" + num(mu) + ")");
      s.n_max_ = floor_strict(h - std::sqrt(mu));
      break;
    case SystemKind::Eckart:
      require(g > 1.5, "g > 3/2 violated (g=" + num(g) + ")");
      require(std::sqrt(mu) > g, "sqrt(mu) > g violated (g=" + num(g) + ", mu=" + num(mu) + ")");
      s.n_max_ = floor_strict(std::sqrt(mu) - g);
      break;
    case SystemKind::HypDPT:
      require(g > 1.5, "g > 3/2 violated (g=" + num(g) + ")");
      require(h > g, "h > g violated (g=" + num(g) + ", h=" + num(h) + ")");
      s.n_max_ = floor_strict(0.5 * (h - g));
      break;
    case SystemKind::Coulomb:
      require(g > 1.5, "g > 3/2 violated (g=" + num(g) + ")");
      break;
  }
  return s;
}

Domain SolvableSystem::domain() const {
  switch (kind_) {
    case SystemKind::J: return {0.0, kHalfPi};
    case SystemKind::Morse:
    case SystemKind::RosenMorse: return {-kInf, kInf};
    default: return {0.0, kInf};
  }
}

std::string SolvableSystem::label() const {
  std::string out = name() + "(";
  bool first = true;
  auto add = [&](const char* key, double v) {
    if (std::isnan(v)) return;
    if (!first) out += ", ";
    out += key;
    out += "=" + num(v);
    first = false;
  };
  add("g", params_.g);
  add("h", params_.h);
  add("mu", params_.mu);
  return out + ")";
}

void SolvableSystem::require_level(int n) const {
  if (!has_level(n)) {
    throw Error(Errc::IndexOutOfRange, label() + " has no bound level n=" + std::to_string(n) +
                                           (n_max_ ? " (n_max=" + std::to_string(*n_max_) + ")" : ""));
  }
}

void SolvableSystem::require_interior(double x) const {
  if (!domain().contains(x) || !std::isfinite(x)) {
    throw Error(Errc::EndpointEvaluation, label() + " evaluated outside the open domain at x=" + num(x));
  }
}

double SolvableSystem::potential(double x) const {
  require_interior(x);
  const double g = params_.g, h = params_.h, mu = params_.mu;
  switch (kind_) {
    case SystemKind::L: return x * x + g * (g - 1.0) / (x * x) - (1.0 + 2.0 * g);
    case SystemKind::J: {
      const double s = std::sin(x), c = std::cos(x);
      return g * (g - 1.0) / (s * s) + h * (h - 1.0) / (c * c) - (g + h) * (g + h);
    }
    case SystemKind::Morse: {
      const double ex = std::exp(x);
      return mu * mu * ex * ex - mu * (2.0 * h + 1.0) * ex + h * h;
    }
    case SystemKind::RosenMorse: {
      const double c = std::cosh(x);
      return -h * (h + 1.0) / (c * c) + 2.0 * mu * std::tanh(x) + h * h + mu * mu / (h * h);
    }
    case SystemKind::Eckart: {
      const double s = std::sinh(x);
      return g * (g - 1.0) / (s * s) - 2.0 * mu / std::tanh(x) + g * g + mu * mu / (g * g);
    }
    case SystemKind::HypDPT: {
      const double s = std::sinh(x), c = std::cosh(x);
      return g * (g - 1.0) / (s * s) - h * (h + 1.0) / (c * c) + (h - g) * (h - g);
    }
    case SystemKind::Coulomb: return g * (g - 1.0) / (x * x) - 2.0 / x + 1.0 / (g * g);
  }
  return 0.0;
}

double SolvableSystem::energy_formula(double n) const {
  const double g = params_.g, h = params_.h, mu = params_.mu;
  switch (kind_) {
    case SystemKind::L: return 4.0 * n;
    case SystemKind::J: return 4.0 * n * (n + g + h);
    case SystemKind::Morse: return h * h - (h - n) * (h - n);
    case SystemKind::RosenMorse:
      return h * h - (h - n) * (h - n) + mu * mu / (h * h) - mu * mu / ((h - n) * (h - n));
    case SystemKind::Eckart:
      return g * g - (g + n) * (g + n) + mu * mu / (g * g) - mu * mu / ((g + n) * (g + n));
    case SystemKind::HypDPT: return 4.0 * n * (h - g - n);
    case SystemKind::Coulomb: return 1.0 / (g * g) - 1.0 / ((g + n) * (g + n));
  }
  return 0.0;
}

double SolvableSystem::eigen_energy(int n) const {
  require_level(n);
  return energy_formula(n);
}

double SolvableSystem::norm_constant(int n) const {
  require_level(n);
  using specfun::gamma_fn;
  const double g = params_.g, h = params_.h, mu = params_.mu;
  const double nf = gamma_fn(n + 1.0);
  switch (kind_) {
    case SystemKind::L: return gamma_fn(n + g + 0.5) / (2.0 * nf);
    case SystemKind::J:
      return gamma_fn(n + g + 0.5) * gamma_fn(n + h + 0.5) /
             (2.0 * nf * (2.0 * n + g + h) * gamma_fn(n + g + h));
    case SystemKind::Morse:
      return gamma_fn(2.0 * h - n + 1.0) / (std::pow(2.0 * mu, 2.0 * h) * nf * 2.0 * (h - n));
    case SystemKind::RosenMorse: {
      const double k = h - n;
      return std::pow(2.0, 2.0 * k) * k * gamma_fn(h + mu / k + 1.0) * gamma_fn(h - mu / k + 1.0) /
             (nf * (k * k - mu * mu / (k * k)) * gamma_fn(2.0 * h - n + 1.0));
    }
    case SystemKind::Eckart: {
      const double k = g + n;
      return k * gamma_fn(1.0 - g + mu / k) * gamma_fn(2.0 * g + n) /
             (std::pow(2.0, 2.0 * k) * nf * (mu * mu / (k * k) - k * k) * gamma_fn(g + mu / k));
    }
    case SystemKind::HypDPT:
      return gamma_fn(n + g + 0.5) * gamma_fn(h - g - n + 1.0) /
             (2.0 * nf * (h - g - 2.0 * n) * gamma_fn(h - n + 0.5));
    case SystemKind::Coulomb:
      return std::pow(0.5 * (g + n), 2.0 * g + 2.0) * 4.0 / nf * gamma_fn(2.0 * g + n);
  }
  return 0.0;
}

FnValue SolvableSystem::eigenfunction_formula(int n, double x) const {
  require_interior(x);
  const double g = params_.g, h = params_.h, mu = params_.mu;
  switch (kind_) {
    case SystemKind::L: {
      const FnValue p = specfun::laguerre(n, g - 0.5, x * x);
      return assemble(-0.5 * x * x + g * std::log(x), -x + g / x, p, 2.0 * x);
    }
    case SystemKind::J: {
      const double s = std::sin(x), c = std::cos(x);
      const FnValue p = specfun::jacobi(n, g - 0.5, h - 0.5, std::cos(2.0 * x));
      return assemble(g * std::log(s) + h * std::log(c), g * c / s - h * s / c, p,
                      -2.0 * std::sin(2.0 * x));
    }
    case SystemKind::Morse: {
      const double y = 2.0 * mu * std::exp(x);
      const FnValue p = specfun::laguerre(n, 2.0 * h - 2.0 * n, y);
      return assemble((h - n) * x - mu * std::exp(x) - n * std::log(2.0 * mu), (h - n) - mu * std::exp(x),
                      p, y);
    }
    case SystemKind::RosenMorse: {
      const double k = h - n;
      const double t = std::tanh(x);
      const FnValue p = specfun::jacobi(n, k + mu / k, k - mu / k, t);
      return assemble(-mu / k * x - k * log_cosh(x), -mu / k - k * t, p, 1.0 - t * t);
    }
    case SystemKind::Eckart: {
      const double k = g + n;
      const double ct = 1.0 / std::tanh(x);
      const FnValue p = specfun::jacobi(n, -k + mu / k, -k - mu / k, ct);
      return assemble(-mu / k * x + k * log_sinh(x), -mu / k + k * ct, p, 1.0 - ct * ct);
    }
    case SystemKind::HypDPT: {
      const FnValue p = specfun::jacobi(n, g - 0.5, -h - 0.5, std::cosh(2.0 * x));
      return assemble(g * log_sinh(x) - h * log_cosh(x), g / std::tanh(x) - h * std::tanh(x), p,
                      2.0 * std::sinh(2.0 * x));
    }
    case SystemKind::Coulomb: {
      const double k = g + n;
      const FnValue p = specfun::laguerre(n, 2.0 * g - 1.0, 2.0 * x / k);
      return assemble(-x / k + g * std::log(x), -1.0 / k + g / x, p, 2.0 / k);
    }
  }
  return {};
}

WaveFn SolvableSystem::eigenfunction(int n) const {
  require_level(n);
  SolvableSystem self = *this;
  return [self, n](double x) { return self.eigenfunction_formula(n, x); };
}

std::optional<int> SolvableSystem::level_at(double e, double tol) const {
  const int top = n_max_ ? *n_max_ : 50;
  for (int n = 0; n <= top; ++n) {
    const double en = energy_formula(n);
    if (std::abs(en - e) <= tol * std::max(1.0, std::abs(en))) return n;
  }
  return std::nullopt;
}

double SolvableSystem::reference_point() const {
  switch (kind_) {
    case SystemKind::J: return 0.25 * std::numbers::pi;
    case SystemKind::Morse:
    case SystemKind::RosenMorse: return 0.0;
    default: return 1.0;
  }
}

}  // namespace amforge
