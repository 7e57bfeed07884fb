#include "amforge/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "amforge/error.hpp"

namespace amforge {

namespace {

constexpr double kAction = 30.0;

struct Map {
  enum Kind { Identity, Logistic, Softplus } kind;
  double a, b;
  bool mirrored = false;

  double x(double t) const {
    switch (kind) {
      case Identity: return t;
      case Logistic: return a + (b - a) / (1.0 + std::exp(-t));
      case Softplus: {
        const double s = mirrored ? -t : t;
        const double sp = s > 30.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
        return mirrored ? b - sp : a + sp;
      }
    }
    return t;
  }
  double t(double x) const {
    switch (kind) {
      case Identity: return x;
      case Logistic: {
        const double u = (x - a) / (b - a);
        return std::log(u) - std::log1p(-u);
      }
      case Softplus: {
        const double d = mirrored ? b - x : x - a;
        const double s = d > 30.0 ? d + std::log(-std::expm1(-d)) : std::log(std::expm1(d));
        return mirrored ? -s : s;
      }
    }
    return x;
  }
  std::string name() const {
    return kind == Identity ? "identity" : kind == Logistic ? "logistic" : "softplus";
  }
};

Map map_for_domain(const Domain& d) {
  if (d.lower_infinite() && d.upper_infinite()) return {Map::Identity, 0.0, 0.0};
  if (!d.lower_infinite() && !d.upper_infinite()) return {Map::Logistic, d.lower, d.upper};
  if (d.upper_infinite()) return {Map::Softplus, d.lower, 0.0};
  return {Map::Softplus, 0.0, d.upper, true};
}

struct Discrete {
  std::vector<double> x, diag, off;
};

Discrete discretize(const std::function<double(double)>& u, const Map& m, double t_lo, double t_hi, int n,
                    bool strict) {
  Discrete d;
  const double dt = (t_hi - t_lo) / (n + 1);
  std::vector<double> xs(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i <= n + 1; ++i) xs[static_cast<std::size_t>(i)] = m.x(t_lo + i * dt);
  d.x.assign(xs.begin() + 1, xs.end() - 1);
  d.diag.resize(static_cast<std::size_t>(n));
  d.off.resize(static_cast<std::size_t>(n > 0 ? n - 1 : 0));
  std::vector<double> dd(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) {
    const double hm = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(i) - 1];
    const double hp = xs[static_cast<std::size_t>(i) + 1] - xs[static_cast<std::size_t>(i)];
    if (!(hm > 0.0) || !(hp > 0.0)) {
      throw Error(Errc::Oracle, "finite-difference grid collapsed near x=" + std::to_string(xs[static_cast<std::size_t>(i)]));
    }
    double ui = u(xs[static_cast<std::size_t>(i)]);
    if (!std::isfinite(ui)) {
      if (strict || std::isnan(ui)) {
        throw Error(Errc::Oracle, "potential is not finite at x=" + std::to_string(xs[static_cast<std::size_t>(i)]));
      }
      ui = 1e30;
    }
    if (!strict) ui = std::min(ui, 1e30);
    const double di = 0.5 * (hm + hp);
    dd[static_cast<std::size_t>(i) - 1] = di;
    d.diag[static_cast<std::size_t>(i) - 1] = (1.0 / hm + 1.0 / hp) / di + ui;
  }
  for (int i = 1; i < n; ++i) {
    const double h = xs[static_cast<std::size_t>(i) + 1] - xs[static_cast<std::size_t>(i)];
    d.off[static_cast<std::size_t>(i) - 1] =
        -1.0 / (h * std::sqrt(dd[static_cast<std::size_t>(i) - 1] * dd[static_cast<std::size_t>(i)]));
  }
  return d;
}

/// Clip points at which the WKB action beyond the outermost turning points
/// of e_ref reaches kAction.
std::pair<double, double> wkb_clip(const std::function<double(double)>& u, const std::vector<double>& xs,
                                   double e_ref) {
  const std::size_t n = xs.size();
  std::vector<double> us(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = u(xs[i]);
    us[i] = std::isfinite(v) ? std::min(v, 1e30) : 1e30;
  }
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (us[i] < e_ref) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == n) return {xs.front(), xs.back()};
  double lo = xs.front(), hi = xs.back();
  double s = 0.0;
  for (std::size_t i = last; i + 1 < n; ++i) {
    s += 0.5 * (std::sqrt(std::max(0.0, us[i] - e_ref)) + std::sqrt(std::max(0.0, us[i + 1] - e_ref))) *
         (xs[i + 1] - xs[i]);
    if (s >= kAction) {
      hi = xs[i + 1];
      break;
    }
  }
  s = 0.0;
  for (std::size_t i = first; i > 0; --i) {
    s += 0.5 * (std::sqrt(std::max(0.0, us[i] - e_ref)) + std::sqrt(std::max(0.0, us[i - 1] - e_ref))) *
         (xs[i] - xs[i - 1]);
    if (s >= kAction) {
      lo = xs[i - 1];
      break;
    }
  }
  return {lo, hi};
}

int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double lambda) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    d = diag[i] - lambda - (i == 0 ? 0.0 : b2 / d);
    if (d == 0.0) d = -1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> tridiagonal_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k) {
  if (k <= 0) return {};
  if (static_cast<std::size_t>(k) > diag.size()) {
    throw Error(Errc::Oracle, "requested more eigenvalues than matrix rows");
  }
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i < off.size() ? std::abs(off[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  std::vector<double> out;
  for (int j = 0; j < k; ++j) {
    double a = j == 0 ? lo : out.back();
    double b = hi;
    // shrink the upper bracket geometrically before bisecting
    double step = std::max(1.0, std::abs(a));
    while (a + step < b && sturm_count(diag, off, a + step) <= j) step *= 2.0;
    b = std::min(b, a + step);
    for (int it = 0; it < 300; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(diag, off, mid) > j) {
        b = mid;
      } else {
        a = mid;
      }
      if (b - a <= 1e-14 * std::max(1.0, std::abs(a))) break;
    }
    if (!(b - a <= 1e-10 * std::max(1.0, std::abs(a)))) {
      throw Error(Errc::Oracle, "bisection did not converge for eigenvalue " + std::to_string(j));
    }
    out.push_back(0.5 * (a + b));
  }
  return out;
}

SpectralResult fd_spectrum(const std::function<double(double)>& potential, const Domain& domain, int n_nodes, int k,
                           std::optional<std::pair<double, double>> clip) {
  if (n_nodes < 200) throw Error(Errc::Oracle, "n_nodes must be at least 200");
  if (k > 10) throw Error(Errc::Oracle, "at most 10 eigenvalues may be requested");
  if (!(domain.lower < domain.upper)) throw Error(Errc::DegenerateDomain, "empty domain");
  const Map m = map_for_domain(domain);

  // initial box in t
  double t_lo, t_hi;
  switch (m.kind) {
    case Map::Identity: t_lo = -200.0; t_hi = 200.0; break;
    case Map::Logistic: t_lo = -40.0; t_hi = 40.0; break;
    case Map::Softplus:
      t_lo = m.mirrored ? -200.0 : -40.0;
      t_hi = m.mirrored ? 40.0 : 200.0;
      break;
  }
  auto apply_clip = [&](double xl, double xu) {
    if (clip) {
      xl = std::max(xl, clip->first);
      xu = std::min(xu, clip->second);
    }
    xl = std::max(xl, domain.lower);
    xu = std::min(xu, domain.upper);
    t_lo = std::max(t_lo, m.t(xl));
    t_hi = std::min(t_hi, m.t(xu));
    if (!std::isfinite(t_lo) || !std::isfinite(t_hi) || !(t_lo < t_hi)) {
      throw Error(Errc::Oracle, "empty finite-difference window");
    }
  };
  if (clip) apply_clip(clip->first, clip->second);

  const int kk = std::max(k, 1);
  for (int pass = 0; pass < 2; ++pass) {
    const Discrete d = discretize(potential, m, t_lo, t_hi, 2000, false);
    const auto ev = tridiagonal_lowest(d.diag, d.off, kk);
    const double e_top = ev.back();
    const double e_ref = e_top + std::max(1.0, 0.1 * std::abs(e_top));
    const auto [xl, xu] = wkb_clip(potential, d.x, e_ref);
    apply_clip(xl, xu);
  }

  SpectralResult r;
  r.grid = {n_nodes, m.name(), m.x(t_lo), m.x(t_hi)};
  if (k <= 0) return r;
  const Discrete c = discretize(potential, m, t_lo, t_hi, n_nodes, true);
  const Discrete f = discretize(potential, m, t_lo, t_hi, 2 * n_nodes, true);
  r.coarse = tridiagonal_lowest(c.diag, c.off, k);
  r.eigenvalues = tridiagonal_lowest(f.diag, f.off, k);
  for (int j = 0; j < k; ++j) {
    r.extrapolated.push_back((4.0 * r.eigenvalues[static_cast<std::size_t>(j)] - r.coarse[static_cast<std::size_t>(j)]) /
                             3.0);
  }
  return r;
}

}  // namespace amforge
