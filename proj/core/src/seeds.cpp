#include "amforge/seeds.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

namespace amforge {
namespace {

using specfun::hyp1f1;
using specfun::hyp2f1;
using specfun::jacobi;
using specfun::laguerre;

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

// exp(log_pre) * F(eta(x)) with d/dx
FnValue assemble(double log_pre, double dlog_pre, FnValue f, double deta_dx) {
  const double pre = std::exp(log_pre);
  return {pre * f.value, pre * (dlog_pre * f.value + f.derivative * deta_dx)};
}

bool is_nonneg_integer(double v) { return v > -0.5 && std::abs(v - std::round(v)) < 1e-12; }

void require_kind(const SolvableSystem& sys, std::initializer_list<SystemKind> kinds,
                  std::string_view what) {
  for (auto k : kinds) {
    if (sys.kind() == k) return;
  }
  throw Error(Errc::UnsupportedSystem, std::string(what) + " seeds are not defined for " + sys.label());
}

void require_outside_spectrum(const SolvableSystem& sys, double energy, const std::string& tag) {
  if (auto n = sys.level_at(energy)) {
    throw Error(Errc::SeedInSpectrum, tag + " has energy " + num(energy) + " = E_" +
                                          std::to_string(*n) + " of " + sys.label() +
                                          "; a seed may not belong to the spectrum");
  }
}

/// Rescales raw so that it equals 1 at the system's reference point (or a
/// nearby point if raw vanishes there).
WaveFn normalized(const SolvableSystem& sys, WaveFn raw) {
  const double ref = sys.reference_point();
  const Domain d = sys.domain();
  std::vector<double> cands;
  for (int k : {0, 1, -1, 2, -2, 3}) {
    const double x = ref + 0.137 * k;
    if (d.contains(x)) cands.push_back(x);
  }
  double best = 0.0;
  for (double x : cands) best = std::max(best, std::abs(raw(x).value));
  double scale = 1.0;
  for (double x : cands) {
    const double v = raw(x).value;
    if (std::isfinite(v) && std::abs(v) >= 1e-3 * best && v != 0.0) {
      scale = 1.0 / v;
      break;
    }
  }
  return [raw = std::move(raw), scale](double x) {
    const FnValue f = raw(x);
    return FnValue{scale * f.value, scale * f.derivative};
  };
}

struct TrigFactor {
  double s, c, ls, lc, cot, tan, sin2x;
};

TrigFactor trig(double x) {
  const double s = std::sin(x), c = std::cos(x);
  return {s, c, std::log(s), std::log(c), c / s, s / c, 2.0 * s * c};
}

WaveFn require_interior(const SolvableSystem& sys, WaveFn f) {
  const Domain d = sys.domain();
  const std::string label = sys.label();
  return [d, label, f = std::move(f)](double x) {
    if (!d.contains(x) || !std::isfinite(x)) {
      throw Error(Errc::EndpointEvaluation, "seed of " + label + " evaluated at x=" + num(x));
    }
    return f(x);
  };
}

std::optional<ParamShift> shift_for(SystemKind kind, SeedFamily family, BoundaryType btype) {
  switch (family) {
    case SeedFamily::L2:
    case SeedFamily::L2Gen:
    case SeedFamily::J2:
    case SeedFamily::J2Gen:
    case SeedFamily::J2Eig:
    case SeedFamily::J2Cplx:
    case SeedFamily::J2EigCplx: return ParamShift{'g', -2.0};
    case SeedFamily::J1:
    case SeedFamily::J1Gen:
    case SeedFamily::J1Eig:
    case SeedFamily::J1Cplx:
    case SeedFamily::J1EigCplx: return ParamShift{'h', -2.0};
    case SeedFamily::DiscreteSym:
      // the x^{1-g} families; the HypDPT type I seed grows exponentially
      if (kind == SystemKind::HypDPT && btype == BoundaryType::I) return std::nullopt;
      return ParamShift{'g', -2.0};
    default: return std::nullopt;
  }
}

SeedSolution finish(const SolvableSystem& sys, SeedFamily family, double degree, double energy,
                    BoundaryType btype, WaveFn raw) {
  SeedSolution s{sys,
                 family,
                 degree,
                 energy,
                 btype,
                 family == SeedFamily::Eigenstate ? std::move(raw)
                                                  : normalized(sys, require_interior(sys, std::move(raw))),
                 shift_for(sys.kind(), family, btype)};
  if (family != SeedFamily::Eigenstate) require_outside_spectrum(sys, energy, s.tag());
  return s;
}

}  // namespace

std::string_view to_string(BoundaryType t) { return t == BoundaryType::I ? "I" : "II"; }

BoundaryType parse_boundary_type(std::string_view s) {
  if (s == "I" || s == "1") return BoundaryType::I;
  if (s == "II" || s == "2") return BoundaryType::II;
  throw Error(Errc::Config, "boundary type must be I or II, got '" + std::string(s) + "'");
}

namespace {
constexpr std::array<std::pair<SeedFamily, std::string_view>, 18> kFamilyNames = {{
    {SeedFamily::L1, "L1"},
    {SeedFamily::L2, "L2"},
    {SeedFamily::J1, "J1"},
    {SeedFamily::J2, "J2"},
    {SeedFamily::L1Gen, "L1Gen"},
    {SeedFamily::L2Gen, "L2Gen"},
    {SeedFamily::J1Gen, "J1Gen"},
    {SeedFamily::J2Gen, "J2Gen"},
    {SeedFamily::L1Eig, "L1Eig"},
    {SeedFamily::J1Eig, "J1Eig"},
    {SeedFamily::J2Eig, "J2Eig"},
    {SeedFamily::J1Cplx, "J1Cplx"},
    {SeedFamily::J2Cplx, "J2Cplx"},
    {SeedFamily::J1EigCplx, "J1EigCplx"},
    {SeedFamily::J2EigCplx, "J2EigCplx"},
    {SeedFamily::Overshoot, "Overshoot"},
    {SeedFamily::DiscreteSym, "DiscreteSym"},
    {SeedFamily::Eigenstate, "Eigenstate"},
}};
}  // namespace

std::string_view to_string(SeedFamily f) {
  for (const auto& [fam, name] : kFamilyNames) {
    if (fam == f) return name;
  }
  return "?";
}

SeedFamily parse_seed_family(std::string_view s) {
  for (const auto& [fam, name] : kFamilyNames) {
    if (name == s) return fam;
  }
  throw Error(Errc::Config, "unknown seed family '" + std::string(s) + "'");
}

std::string SeedSolution::tag() const {
  std::string key = "v";
  switch (family) {
    case SeedFamily::J1Cplx:
    case SeedFamily::J2Cplx:
    case SeedFamily::J1EigCplx:
    case SeedFamily::J2EigCplx: key = "B"; break;
    case SeedFamily::Overshoot:
    case SeedFamily::Eigenstate: key = "n"; break;
    default: break;
  }
  std::string out = std::string(to_string(family));
  if (family == SeedFamily::DiscreteSym || family == SeedFamily::Eigenstate) {
    out += "/" + std::string(to_string(btype));
  }
  return out + "(" + key + "=" + num(degree) + ")";
}

SeedSolution virtual_state(const SolvableSystem& sys, BoundaryType btype, int v) {
  require_kind(sys, {SystemKind::L, SystemKind::J}, "virtual-state");
  if (v < 0) throw Error(Errc::InvalidDegree, "virtual-state degree must be >= 0, got " + std::to_string(v));
  const double g = sys.params().g, h = sys.params().h;
  if (sys.kind() == SystemKind::L) {
    if (btype == BoundaryType::I) {
      auto raw = [g, v](double x) {
        return assemble(0.5 * x * x + g * std::log(x), x + g / x, laguerre(v, g - 0.5, -x * x), -2.0 * x);
      };
      return finish(sys, SeedFamily::L1, v, -4.0 * (g + v + 0.5), btype, raw);
    }
    auto raw = [g, v](double x) {
      return assemble(-0.5 * x * x + (1.0 - g) * std::log(x), -x + (1.0 - g) / x,
                      laguerre(v, 0.5 - g, x * x), 2.0 * x);
    };
    return finish(sys, SeedFamily::L2, v, -4.0 * (g - v - 0.5), btype, raw);
  }
  if (btype == BoundaryType::I) {
    auto raw = [g, h, v](double x) {
      const TrigFactor t = trig(x);
      return assemble(g * t.ls + (1.0 - h) * t.lc, g * t.cot - (1.0 - h) * t.tan,
                      jacobi(v, g - 0.5, 0.5 - h, std::cos(2.0 * x)), -2.0 * t.sin2x);
    };
    return finish(sys, SeedFamily::J1, v, -4.0 * (g + v + 0.5) * (h - v - 0.5), btype, raw);
  }
  auto raw = [g, h, v](double x) {
    const TrigFactor t = trig(x);
    return assemble((1.0 - g) * t.ls + h * t.lc, (1.0 - g) * t.cot - h * t.tan,
                    jacobi(v, 0.5 - g, h - 0.5, std::cos(2.0 * x)), -2.0 * t.sin2x);
  };
  return finish(sys, SeedFamily::J2, v, -4.0 * (g - v - 0.5) * (h + v + 0.5), btype, raw);
}

SeedSolution generalized_virtual_state(const SolvableSystem& sys, BoundaryType btype, double v,
                                       SeedForm form) {
  require_kind(sys, {SystemKind::L, SystemKind::J}, "generalized virtual-state");
  if (is_nonneg_integer(v)) {
    throw Error(Errc::InvalidDegree, "v=" + num(v) +
                                         " is a non-negative integer; use virtual_state for the "
                                         "polynomial seed");
  }
  const double g = sys.params().g, h = sys.params().h;
  const bool direct = form == SeedForm::Direct;
  if (sys.kind() == SystemKind::L) {
    if (btype == BoundaryType::I) {
      auto raw = [g, v, direct](double x) {
        const double lx = std::log(x);
        if (direct) {
          return assemble(0.5 * x * x + g * lx, x + g / x, hyp1f1(-v, g + 0.5, -x * x), -2.0 * x);
        }
        return assemble(-0.5 * x * x + g * lx, -x + g / x, hyp1f1(g + 0.5 + v, g + 0.5, x * x), 2.0 * x);
      };
      return finish(sys, SeedFamily::L1Gen, v, -4.0 * (g + v + 0.5), btype, raw);
    }
    // 1F1(3/2-g+v; 3/2-g; -x^2) e^{x^2} is the rewritten form
    specfun::hyp1f1(-v, 1.5 - g, 0.5);  // surfaces a pole in the lower index
    auto raw = [g, v, direct](double x) {
      const double lx = std::log(x);
      if (direct) {
        return assemble(-0.5 * x * x + (1.0 - g) * lx, -x + (1.0 - g) / x, hyp1f1(-v, 1.5 - g, x * x),
                        2.0 * x);
      }
      return assemble(0.5 * x * x + (1.0 - g) * lx, x + (1.0 - g) / x,
                      hyp1f1(1.5 - g + v, 1.5 - g, -x * x), -2.0 * x);
    };
    return finish(sys, SeedFamily::L2Gen, v, -4.0 * (g - v - 0.5), btype, raw);
  }
  if (btype == BoundaryType::I) {
    auto raw = [g, h, v, direct](double x) {
      const TrigFactor t = trig(x);
      const double z = t.s * t.s;
      if (direct) {
        return assemble(g * t.ls + (1.0 - h) * t.lc, g * t.cot - (1.0 - h) * t.tan,
                        hyp2f1(-v, v + g - h + 1.0, g + 0.5, z, t.c * t.c), t.sin2x);
      }
      return assemble(g * t.ls + h * t.lc, g * t.cot - h * t.tan,
                      hyp2f1(g + 0.5 + v, h - 0.5 - v, g + 0.5, z, t.c * t.c), t.sin2x);
    };
    return finish(sys, SeedFamily::J1Gen, v, -4.0 * (g + v + 0.5) * (h - v - 0.5), btype, raw);
  }
  auto raw = [g, h, v, direct](double x) {
    const TrigFactor t = trig(x);
    const double z = t.c * t.c;
    if (direct) {
      return assemble((1.0 - g) * t.ls + h * t.lc, (1.0 - g) * t.cot - h * t.tan,
                      hyp2f1(-v, v + h - g + 1.0, h + 0.5, z, t.s * t.s), -t.sin2x);
    }
    return assemble(g * t.ls + h * t.lc, g * t.cot - h * t.tan,
                    hyp2f1(h + 0.5 + v, g - 0.5 - v, h + 0.5, z, t.s * t.s), -t.sin2x);
  };
  return finish(sys, SeedFamily::J2Gen, v, -4.0 * (g - v - 0.5) * (h + v + 0.5), btype, raw);
}

SeedSolution eigenlike_seed(const SolvableSystem& sys, BoundaryType btype, double v) {
  require_kind(sys, {SystemKind::L, SystemKind::J}, "eigenfunction-type");
  if (is_nonneg_integer(v)) {
    throw Error(Errc::InvalidDegree,
                "v=" + num(v) + " is a non-negative integer; that is an eigenfunction, not a seed");
  }
  const double g = sys.params().g, h = sys.params().h;
  if (sys.kind() == SystemKind::L) {
    if (btype != BoundaryType::I) {
      throw Error(Errc::UnsupportedSystem, "the eigenfunction-type L seed is type I only");
    }
    auto raw = [g, v](double x) {
      return assemble(-0.5 * x * x + g * std::log(x), -x + g / x, hyp1f1(-v, g + 0.5, x * x), 2.0 * x);
    };
    return finish(sys, SeedFamily::L1Eig, v, sys.energy_formula(v), btype, raw);
  }
  const bool one = btype == BoundaryType::I;
  auto raw = [g, h, v, one](double x) {
    const TrigFactor t = trig(x);
    const double z = one ? t.s * t.s : t.c * t.c;
    return assemble(g * t.ls + h * t.lc, g * t.cot - h * t.tan,
                    hyp2f1(-v, v + g + h, (one ? g : h) + 0.5, z, one ? t.c * t.c : t.s * t.s), one ? t.sin2x : -t.sin2x);
  };
  return finish(sys, one ? SeedFamily::J1Eig : SeedFamily::J2Eig, v, sys.energy_formula(v), btype, raw);
}

SeedSolution complex_degree_seed(const SolvableSystem& sys, SeedFamily family, double b) {
  require_kind(sys, {SystemKind::J}, "complex-degree");
  if (b == 0.0) {
    throw Error(Errc::InvalidDegree, "B must be non-zero; B=0 is the real-degree seed");
  }
  const double g = sys.params().g, h = sys.params().h;
  double a_re = 0.0, c = 0.0, pg = 0.0, ph = 0.0;
  bool upper_arg = false;  // argument cos^2 x instead of sin^2 x
  BoundaryType btype = BoundaryType::I;
  switch (family) {
    case SeedFamily::J1Cplx:
      a_re = 0.5 * (g - h + 1.0), c = g + 0.5, pg = g, ph = 1.0 - h;
      break;
    case SeedFamily::J2Cplx:
      a_re = 0.5 * (h - g + 1.0), c = h + 0.5, pg = 1.0 - g, ph = h, upper_arg = true;
      btype = BoundaryType::II;
      break;
    case SeedFamily::J1EigCplx:
      a_re = 0.5 * (g + h), c = g + 0.5, pg = g, ph = h;
      break;
    case SeedFamily::J2EigCplx:
      a_re = 0.5 * (g + h), c = h + 0.5, pg = g, ph = h, upper_arg = true;
      btype = BoundaryType::II;
      break;
    default:
      throw Error(Errc::InvalidDegree,
                  "complex_degree_seed needs J1Cplx, J2Cplx, J1EigCplx or J2EigCplx, got " +
                      std::string(to_string(family)));
  }
  auto raw = [=](double x) {
    const TrigFactor t = trig(x);
    const double z = upper_arg ? t.c * t.c : t.s * t.s;
    return assemble(pg * t.ls + ph * t.lc, pg * t.cot - ph * t.tan,
                    specfun::hyp2f1_conjugate_pair_fn(a_re, -b, a_re, b, c, z, upper_arg ? t.s * t.s : t.c * t.c),
                    upper_arg ? -t.sin2x : t.sin2x);
  };
  return finish(sys, family, b, -((g + h) * (g + h) + 4.0 * b * b), btype, raw);
}

SeedSolution overshoot_seed(const SolvableSystem& sys, int n) {
  require_kind(sys, {SystemKind::Morse, SystemKind::RosenMorse, SystemKind::Eckart, SystemKind::HypDPT},
               "overshoot");
  const double g = sys.params().g, h = sys.params().h, mu = sys.params().mu;
  BoundaryType btype = BoundaryType::I;
  auto reject = [&](const std::string& why) {
    throw Error(Errc::InvalidDegree, "overshoot n=" + std::to_string(n) + " for " + sys.label() + ": " + why);
  };
  switch (sys.kind()) {
    case SystemKind::Morse:
      if (!(n > h)) reject("window n > h violated");
      btype = BoundaryType::II;
      break;
    case SystemKind::RosenMorse: {
      const double r = std::sqrt(mu);
      if (h - r < n && n < h) {
        btype = BoundaryType::II;
      } else if (h < n && n < h + r) {
        btype = BoundaryType::I;
      } else {
        reject("neither h-sqrt(mu) < n < h nor h < n < h+sqrt(mu) holds");
      }
      break;
    }
    case SystemKind::Eckart:
      if (!(n > std::sqrt(mu) - g)) reject("window n > sqrt(mu)-g violated");
      break;
    case SystemKind::HypDPT:
      if (!(n > 0.5 * (h - g))) reject("window n > (h-g)/2 violated");
      break;
    default: break;
  }
  SolvableSystem copy = sys;
  auto raw = [copy, n](double x) { return copy.eigenfunction_formula(n, x); };
  return finish(sys, SeedFamily::Overshoot, n, sys.energy_formula(n), btype, raw);
}

SeedSolution discrete_symmetry_seed(const SolvableSystem& sys, BoundaryType btype, int v) {
  require_kind(sys, {SystemKind::HypDPT, SystemKind::Eckart, SystemKind::Coulomb}, "discrete-symmetry");
  if (v < 0) throw Error(Errc::InvalidDegree, "degree must be >= 0");
  const double g = sys.params().g, h = sys.params().h, mu = sys.params().mu;
  auto reject = [&](const std::string& why) {
    throw Error(Errc::InvalidDegree, "discrete-symmetry v=" + std::to_string(v) + " for " + sys.label() +
                                         ": " + why);
  };
  switch (sys.kind()) {
    case SystemKind::HypDPT: {
      if (btype == BoundaryType::I) {
        auto raw = [g, h, v](double x) {
          return assemble(g * log_sinh(x) + (h + 1.0) * log_cosh(x), g / std::tanh(x) + (h + 1.0) * std::tanh(x),
                          jacobi(v, g - 0.5, h + 0.5, std::cosh(2.0 * x)), 2.0 * std::sinh(2.0 * x));
        };
        return finish(sys, SeedFamily::DiscreteSym, v, -4.0 * (v + 0.5 + g) * (v + 0.5 + h), btype, raw);
      }
      if (!(v < 0.5 * (h + g - 1.0))) reject("v < (h+g-1)/2 violated");
      auto raw = [g, h, v](double x) {
        return assemble((1.0 - g) * log_sinh(x) - h * log_cosh(x), (1.0 - g) / std::tanh(x) - h * std::tanh(x),
                        jacobi(v, 0.5 - g, -h - 0.5, std::cosh(2.0 * x)), 2.0 * std::sinh(2.0 * x));
      };
      return finish(sys, SeedFamily::DiscreteSym, v, -4.0 * (v + 0.5 - g) * (v + 0.5 - h), btype, raw);
    }
    case SystemKind::Eckart: {
      if (btype != BoundaryType::II) reject("the Eckart discrete-symmetry seed is type II");
      if (!(g - 1.0 < v && v < g - 1.0 + std::sqrt(mu))) reject("g-1 < v < g-1+sqrt(mu) violated");
      const double m = v + 1.0 - g;
      auto raw = [mu, v, m](double x) {
        const double ct = 1.0 / std::tanh(x);
        return assemble(-mu / m * x + m * log_sinh(x), -mu / m + m * ct,
                        jacobi(v, -m + mu / m, -m - mu / m, ct), 1.0 - ct * ct);
      };
      return finish(sys, SeedFamily::DiscreteSym, v, sys.energy_formula(-v - 1.0), btype, raw);
    }
    default: {
      if (btype != BoundaryType::II) reject("the Coulomb discrete-symmetry seed is type II");
      if (!(v > g - 1.0)) reject("v > g-1 violated");
      const double m = v + 1.0 - g;
      auto raw = [g, v, m](double x) {
        return assemble(-x / m + (1.0 - g) * std::log(x), -1.0 / m + (1.0 - g) / x,
                        laguerre(v, 1.0 - 2.0 * g, 2.0 * x / m), 2.0 / m);
      };
      return finish(sys, SeedFamily::DiscreteSym, v, sys.energy_formula(-v - 1.0), btype, raw);
    }
  }
}

SeedSolution eigenstate_seed(const SolvableSystem& sys, int n, BoundaryType btype) {
  const WaveFn phi = sys.eigenfunction(n);
  return finish(sys, SeedFamily::Eigenstate, n, sys.eigen_energy(n), btype, phi);
}

SeedSolution make_seed(const SolvableSystem& sys, SeedFamily family, BoundaryType btype, double degree) {
  auto as_int = [&]() {
    if (std::abs(degree - std::round(degree)) > 1e-12) {
      throw Error(Errc::InvalidDegree, std::string(to_string(family)) + " needs an integer degree, got " +
                                           num(degree));
    }
    return static_cast<int>(std::lround(degree));
  };
  auto expect = [&](BoundaryType want) {
    if (btype != want) {
      throw Error(Errc::BoundaryMismatch, std::string(to_string(family)) + " seeds are type " +
                                              std::string(to_string(want)));
    }
  };
  switch (family) {
    case SeedFamily::L1:
    case SeedFamily::J1:
      expect(BoundaryType::I);
      return virtual_state(sys, btype, as_int());
    case SeedFamily::L2:
    case SeedFamily::J2:
      expect(BoundaryType::II);
      return virtual_state(sys, btype, as_int());
    case SeedFamily::L1Gen:
    case SeedFamily::J1Gen:
      expect(BoundaryType::I);
      return generalized_virtual_state(sys, btype, degree);
    case SeedFamily::L2Gen:
    case SeedFamily::J2Gen:
      expect(BoundaryType::II);
      return generalized_virtual_state(sys, btype, degree);
    case SeedFamily::L1Eig:
    case SeedFamily::J1Eig:
      expect(BoundaryType::I);
      return eigenlike_seed(sys, btype, degree);
    case SeedFamily::J2Eig:
      expect(BoundaryType::II);
      return eigenlike_seed(sys, btype, degree);
    case SeedFamily::J1Cplx:
    case SeedFamily::J1EigCplx:
      expect(BoundaryType::I);
      return complex_degree_seed(sys, family, degree);
    case SeedFamily::J2Cplx:
    case SeedFamily::J2EigCplx:
      expect(BoundaryType::II);
      return complex_degree_seed(sys, family, degree);
    case SeedFamily::Overshoot: {
      SeedSolution s = overshoot_seed(sys, as_int());
      expect(s.btype);
      return s;
    }
    case SeedFamily::DiscreteSym: return discrete_symmetry_seed(sys, btype, as_int());
    case SeedFamily::Eigenstate: return eigenstate_seed(sys, as_int(), btype);
  }
  throw Error(Errc::InvalidDegree, "unknown family");
}

namespace {

/// Masses of seed^2 over unit windows in a log-type coordinate walking
/// towards one endpoint. Returns false if the seed overflows.
bool window_masses(const SeedSolution& seed, bool upper, std::vector<double>& masses) {
  const Domain d = seed.source.domain();
  const double ref = seed.source.reference_point();
  const bool infinite = upper ? d.upper_infinite() : d.lower_infinite();
  const double end = upper ? d.upper : d.lower;
  // x(s): finite end -> end -/+ (dist) e^{-s}; infinite end -> ref +/- e^{s}
  const double dist = std::abs(end - ref);
  static constexpr std::array<double, 8> kNodes = {-0.9602898564975363, -0.7966664774136267,
                                                   -0.5255324099163290, -0.1834346424956498,
                                                   0.1834346424956498,  0.5255324099163290,
                                                   0.7966664774136267,  0.9602898564975363};
  static constexpr std::array<double, 8> kWeights = {0.1012285362903763, 0.2223810344533745,
                                                     0.3137066638921341, 0.3626837833783620,
                                                     0.3626837833783620, 0.3137066638921341,
                                                     0.2223810344533745, 0.1012285362903763};
  const double step = infinite ? 0.25 : 1.0;
  const int windows = infinite ? 20 : 32;
  for (int k = 0; k < windows; ++k) {
    const double s0 = k * step;
    double m = 0.0;
    for (std::size_t i = 0; i < kNodes.size(); ++i) {
      const double s = s0 + 0.5 * step * (kNodes[i] + 1.0);
      double x, jac;
      if (infinite) {
        const double e = std::exp(s + 1.0);
        x = upper ? ref + e : ref - e;
        jac = e;
      } else {
        const double e = dist * std::exp(-s - 0.7);
        x = upper ? end - e : end + e;
        jac = e;
      }
      if (!d.contains(x)) return true;
      double v;
      try {
        v = seed.eval(x).value;
      } catch (const Error&) {
        return false;
      }
      const double dens = v * v * jac;
      if (!std::isfinite(dens) || dens > 1e280) return false;
      m += 0.5 * step * kWeights[i] * dens;
    }
    masses.push_back(m);
  }
  return true;
}

bool integrable_at(const SeedSolution& seed, bool upper) {
  std::vector<double> m;
  if (!window_masses(seed, upper, m)) return false;
  if (m.size() < 4) return true;
  double total = 0.0;
  for (double v : m) total += v;
  const std::size_t n = m.size();
  const bool decreasing = m[n - 1] <= m[n - 2] && m[n - 2] <= m[n - 3];
  return decreasing && m[n - 1] <= 1e-6 * total;
}

}  // namespace

BoundaryType classify_boundary(const SeedSolution& seed) {
  const bool lo = integrable_at(seed, false);
  const bool hi = integrable_at(seed, true);
  if (lo && hi) {
    throw Error(Errc::AmbiguousClassification,
                seed.tag() + " is square-integrable at both ends; not a type I/II seed");
  }
  if (!lo && !hi) {
    throw Error(Errc::PseudoVirtual, seed.tag() +
                                         " is square-integrable at neither end (pseudo virtual state); "
                                         "it cannot seed an addition");
  }
  return lo ? BoundaryType::I : BoundaryType::II;
}

std::optional<int> addable_budget(const SolvableSystem& sys, SeedFamily family, BoundaryType btype) {
  const auto shift = shift_for(sys.kind(), family, btype);
  if (!shift) return std::nullopt;
  const double p = shift->param == 'g' ? sys.params().g : sys.params().h;
  int count = 0;
  for (int k = 1; p + shift->delta * k > 1.5; ++k) ++count;
  return count;
}

std::optional<int> addable_budget(const SeedSolution& seed) {
  return addable_budget(seed.source, seed.family, seed.btype);
}

}  // namespace amforge
