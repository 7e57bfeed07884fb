#include "amforge/quad.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace amforge {
namespace {

constexpr int kN = Grid::kOrder;

struct GaussLegendre {
  std::vector<double> nodes, weights;
};

// P_0..P_{n} at u
std::array<double, kN + 2> legendre_all(double u) {
  std::array<double, kN + 2> p{};
  p[0] = 1.0;
  p[1] = u;
  for (int k = 1; k <= kN; ++k) p[k + 1] = ((2.0 * k + 1.0) * u * p[k] - k * p[k - 1]) / (k + 1.0);
  return p;
}

const GaussLegendre& gl();

std::array<double, kN> partial_weights(double u) {
  const GaussLegendre& q = gl();
  const auto pu = legendre_all(u);
  std::array<double, kN> out{};
  for (int j = 0; j < kN; ++j) {
    const auto pj = legendre_all(q.nodes[j]);
    double acc = 0.5 * (u + 1.0);
    for (int k = 1; k < kN; ++k) acc += 0.5 * pj[k] * (pu[k + 1] - pu[k - 1]);
    out[j] = q.weights[j] * acc;
  }
  return out;
}

const GaussLegendre& gl() {
  static const GaussLegendre q = [] {
    GaussLegendre r;
    r.nodes.resize(kN);
    r.weights.resize(kN);
    for (int i = 0; i < kN; ++i) {
      double u = std::cos(std::numbers::pi * (i + 0.75) / (kN + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = u;
        for (int k = 1; k < kN; ++k) {
          const double p2 = ((2.0 * k + 1.0) * u * p1 - k * p0) / (k + 1.0);
          p0 = p1;
          p1 = p2;
        }
        dp = kN * (u * p1 - p0) / (u * u - 1.0);
        const double du = p1 / dp;
        u -= du;
        if (std::abs(du) < 1e-16) break;
      }
      double p0 = 1.0, p1 = u;
      for (int k = 1; k < kN; ++k) {
        const double p2 = ((2.0 * k + 1.0) * u * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = kN * (u * p1 - p0) / (u * u - 1.0);
      r.nodes[kN - 1 - i] = u;
      r.weights[kN - 1 - i] = 2.0 / ((1.0 - u * u) * dp * dp);
    }
    return r;
  }();
  return q;
}

const std::vector<std::array<double, kN>>& integration_matrix() {
  static const std::vector<std::array<double, kN>> s = [] {
    std::vector<std::array<double, kN>> m(kN);
    for (int i = 0; i < kN; ++i) m[i] = partial_weights(gl().nodes[i]);
    return m;
  }();
  return s;
}

struct MapFns {
  GridMap map;
  Domain d;
  bool mirrored = false;  // SoftExp on (-inf, b)

  double x(double t) const {
    switch (map) {
      case GridMap::Identity: return t;
      case GridMap::Logistic: return d.lower + (d.upper - d.lower) / (1.0 + std::exp(-t));
      case GridMap::SoftExp: {
        const double sp = t > 35.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
        return mirrored ? d.upper - sp : d.lower + sp;
      }
    }
    return t;
  }
  double dxdt(double t) const {
    switch (map) {
      case GridMap::Identity: return 1.0;
      case GridMap::Logistic: {
        const double e = std::exp(-std::abs(t));
        return (d.upper - d.lower) * e / ((1.0 + e) * (1.0 + e));
      }
      case GridMap::SoftExp: return 1.0 / (1.0 + std::exp(-t));
    }
    return 1.0;
  }
  double t(double xv) const {
    switch (map) {
      case GridMap::Identity: return xv;
      case GridMap::Logistic: return std::log((xv - d.lower) / (d.upper - xv));
      case GridMap::SoftExp: {
        const double y = mirrored ? d.upper - xv : xv - d.lower;
        return y > 35.0 ? y + std::log(-std::expm1(-y)) : std::log(std::expm1(y));
      }
    }
    return xv;
  }
};

MapFns map_fns(GridMap m, const Domain& d) {
  return {m, d, m == GridMap::SoftExp && d.lower_infinite()};
}

struct Limits {
  double lo, hi, ref;
};

Limits limits_for(const MapFns& mf) {
  switch (mf.map) {
    case GridMap::Logistic: return {-35.0, 35.0, 0.0};
    case GridMap::SoftExp: {
      const double far = 2000.0, ref = std::log(std::expm1(1.0));
      return mf.mirrored ? Limits{-far, 36.0, -ref} : Limits{-36.0, far, ref};
    }
    case GridMap::Identity: return {-2000.0, 2000.0, 0.0};
  }
  return {-30.0, 30.0, 0.0};
}

struct Sample {
  double t;
  std::vector<double> dens;  // per probe, (f^2 + f_t^2) dx/dt
  std::vector<double> mass;  // per probe, int f^2 dx from t_ref
  std::vector<double> v2j;   // per probe, f^2 dx/dt
  bool overflow = false;
};

Sample sample_at(const MapFns& mf, const MarginPolicy& pol, double t) {
  Sample s;
  s.t = t;
  const double x = mf.x(t), j = mf.dxdt(t);
  s.dens.resize(pol.probes.size());
  s.v2j.resize(pol.probes.size());
  s.mass.assign(pol.probes.size(), 0.0);
  if (!mf.d.contains(x) || !(j > 0.0)) {
    s.overflow = true;
    return s;
  }
  for (std::size_t p = 0; p < pol.probes.size(); ++p) {
    FnValue f;
    try {
      f = pol.probes[p].f(x);
    } catch (const Error&) {
      s.overflow = true;
      return s;
    }
    const double ft = f.derivative * j;
    const double v2 = f.value * f.value;
    if (!std::isfinite(v2) || !std::isfinite(ft) || v2 > pol.overflow) {
      s.overflow = true;
      return s;
    }
    s.dens[p] = (v2 + ft * ft) * j;
    s.v2j[p] = v2 * j;
  }
  return s;
}

/// Walks from t_ref towards one end, returning samples in walking order.
std::vector<Sample> scan_end(const MapFns& mf, const MarginPolicy& pol, const Limits& lim, int dir,
                             std::vector<double>& peak) {
  std::vector<Sample> out;
  const std::size_t np = pol.probes.size();
  std::vector<double> cum(np, 0.0);
  double t = lim.ref;
  Sample prev = sample_at(mf, pol, t);
  if (prev.overflow) return out;
  for (std::size_t p = 0; p < np; ++p) peak[p] = std::max(peak[p], prev.dens[p]);
  out.push_back(prev);
  const double limit = dir > 0 ? lim.hi : lim.lo;
  while (true) {
    const double step = 0.02 * (1.0 + std::abs(t - lim.ref));
    const double tn = t + dir * step;
    if ((dir > 0 && tn > limit) || (dir < 0 && tn < limit)) break;
    Sample s = sample_at(mf, pol, tn);
    if (s.overflow) break;
    bool all_done = true;
    for (std::size_t p = 0; p < np; ++p) {
      peak[p] = std::max(peak[p], s.dens[p]);
      cum[p] += 0.5 * step * (prev.v2j[p] + s.v2j[p]);
      s.mass[p] = cum[p];
      const bool decays = dir > 0 ? pol.probes[p].decays_upper : pol.probes[p].decays_lower;
      const bool done = decays ? s.dens[p] < pol.decay_tol * peak[p]
                               : 1.0 / (1.0 + cum[p]) < pol.growth_tol;
      all_done = all_done && done;
    }
    out.push_back(s);
    prev = s;
    t = tn;
    if (all_done && std::abs(t - lim.ref) > 1.0) break;
  }
  return out;
}

/// First sample (walking outwards) at which every probe meets its criterion
/// with the final peaks; the last sample if none does.
double extent(const std::vector<Sample>& walk, const MarginPolicy& pol, const std::vector<double>& peak,
              int dir) {
  for (const Sample& s : walk) {
    bool ok = true;
    for (std::size_t p = 0; p < pol.probes.size() && ok; ++p) {
      const bool decays = dir > 0 ? pol.probes[p].decays_upper : pol.probes[p].decays_lower;
      ok = decays ? s.dens[p] < pol.decay_tol * peak[p] : 1.0 / (1.0 + s.mass[p]) < pol.growth_tol;
    }
    if (ok) return s.t;
  }
  return walk.back().t;
}

}  // namespace

std::string_view to_string(GridMap m) {
  switch (m) {
    case GridMap::Identity: return "identity";
    case GridMap::Logistic: return "logistic";
    case GridMap::SoftExp: return "softexp";
  }
  return "?";
}

const std::vector<double>& gl_nodes() { return gl().nodes; }
const std::vector<double>& gl_weights() { return gl().weights; }

GridMap map_for(const Domain& d) {
  if (!(d.lower < d.upper)) {
    throw Error(Errc::DegenerateDomain, "domain lower bound must be below the upper bound");
  }
  if (d.lower_infinite() && d.upper_infinite()) return GridMap::Identity;
  if (d.lower_infinite() || d.upper_infinite()) return GridMap::SoftExp;
  return GridMap::Logistic;
}

double Grid::x_of_t(double t) const { return map_fns(map_, domain_).x(t); }
double Grid::dxdt(double t) const { return map_fns(map_, domain_).dxdt(t); }
double Grid::t_of_x(double x) const { return map_fns(map_, domain_).t(x); }

int Grid::panel_of_t(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  int p = static_cast<int>(it - breaks_.begin()) - 1;
  return std::clamp(p, 0, panels() - 1);
}

Grid Grid::from_breaks(const Domain& domain, std::vector<double> breaks) {
  Grid g;
  g.map_ = map_for(domain);
  g.domain_ = domain;
  g.breaks_ = std::move(breaks);
  const MapFns mf = map_fns(g.map_, domain);
  const auto& q = gl();
  for (int p = 0; p + 1 < static_cast<int>(g.breaks_.size()); ++p) {
    const double a = g.breaks_[p], b = g.breaks_[p + 1];
    const double hw = 0.5 * (b - a);
    for (int j = 0; j < kN; ++j) {
      const double t = a + hw * (q.nodes[j] + 1.0);
      g.t_.push_back(t);
      g.x_.push_back(mf.x(t));
      g.w_.push_back(hw * q.weights[j] * mf.dxdt(t));
    }
  }
  for (std::size_t i = 0; i < g.x_.size(); ++i) {
    if (!domain.contains(g.x_[i]) || (i > 0 && !(g.x_[i] > g.x_[i - 1]))) {
      throw Error(Errc::DegenerateDomain, "grid nodes are not strictly interior and increasing");
    }
  }
  return g;
}

Grid build_grid(const Domain& domain, int n_nodes, const MarginPolicy& policy) {
  const GridMap m = map_for(domain);
  const MapFns mf = map_fns(m, domain);
  const int nodes = std::max(64, (n_nodes + kN - 1) / kN * kN);
  const int panels = nodes / kN;
  const Limits lim = limits_for(mf);

  double t_lo = -30.0, t_hi = 30.0;
  if (m == GridMap::SoftExp) {
    t_lo = mf.mirrored ? -30.0 : -20.0;
    t_hi = mf.mirrored ? 20.0 : 30.0;
  }
  const std::size_t np = policy.probes.size();
  if (np > 0) {
    std::vector<double> peak(np, 0.0);
    const auto up = scan_end(mf, policy, lim, +1, peak);
    const auto down = scan_end(mf, policy, lim, -1, peak);
    if (up.empty() || down.empty()) {
      throw Error(Errc::DegenerateDomain, "probe functions are not finite at the reference point");
    }
    t_hi = std::max(extent(up, policy, peak, +1), lim.ref + 1.0);
    t_lo = std::min(extent(down, policy, peak, -1), lim.ref - 1.0);
  }

  // monitor: 1 + capped log-density slope, equidistributed over the panels
  constexpr int kSamples = 2000;
  const double dt = (t_hi - t_lo) / kSamples;
  std::vector<double> cum(kSamples + 1, 0.0);
  std::vector<std::vector<double>> logd(np, std::vector<double>(kSamples + 1, 0.0));
  for (int i = 0; i <= kSamples && np > 0; ++i) {
    const double t = t_lo + i * dt;
    const Sample s = sample_at(mf, policy, t);
    for (std::size_t p = 0; p < np; ++p) {
      logd[p][i] = s.overflow ? (i > 0 ? logd[p][i - 1] : 0.0) : std::log(s.dens[p] + 1e-300);
    }
  }
  for (int i = 1; i <= kSamples; ++i) {
    double slope = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      slope = std::max(slope, std::min(200.0, std::abs(logd[p][i] - logd[p][i - 1]) / dt));
    }
    cum[i] = cum[i - 1] + (1.0 + 0.5 * slope) * dt;
  }
  std::vector<double> breaks(panels + 1);
  breaks[0] = t_lo;
  breaks[panels] = t_hi;
  int k = 0;
  for (int p = 1; p < panels; ++p) {
    const double target = cum[kSamples] * p / panels;
    while (k < kSamples && cum[k + 1] < target) ++k;
    const double frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
    breaks[p] = t_lo + (k + frac) * dt;
  }
  return Grid::from_breaks(domain, std::move(breaks));
}

RunningInner::RunningInner(GridPtr grid, std::vector<double> integrand, Direction dir, bool check_divergence)
    : grid_(std::move(grid)), integrand_(std::move(integrand)), dir_(dir) {
  const Grid& g = *grid_;
  const int np = g.panels();
  if (integrand_.size() != g.size()) {
    throw Error(Errc::DegenerateDomain, "integrand size does not match the grid");
  }
  const auto& q = gl();
  const auto& s = integration_matrix();
  std::vector<double> ptot(np, 0.0);
  std::vector<double> ft(g.size());
  for (int p = 0; p < np; ++p) {
    const double hw = 0.5 * (g.breaks()[p + 1] - g.breaks()[p]);
    for (int j = 0; j < kN; ++j) {
      const std::size_t idx = static_cast<std::size_t>(p) * kN + j;
      ft[idx] = integrand_[idx] * g.dxdt(g.t()[idx]);
      ptot[p] += hw * q.weights[j] * ft[idx];
    }
  }
  double sum_abs = 0.0;
  for (double v : ptot) sum_abs += std::abs(v);

  if (check_divergence && sum_abs > 0.0) {
    const int start = dir_ == Direction::FromLower ? 0 : np - 1;
    const std::size_t first = static_cast<std::size_t>(start) * kN;
    double fmax = 0.0;
    for (int j = 0; j < kN; ++j) fmax = std::max(fmax, std::abs(ft[first + j]));
    const double edge = std::abs(ft[dir_ == Direction::FromLower ? first : first + kN - 1]);
    if (std::abs(ptot[start]) > 1e-3 * sum_abs && edge >= 0.1 * fmax) {
      throw Error(Errc::Divergence, std::string("running integral from the ") +
                                        (dir_ == Direction::FromLower ? "lower" : "upper") +
                                        " endpoint does not converge; the integrand is not "
                                        "square-integrable there (wrong boundary type?)");
    }
  }

  // Partial integrals per panel from the spectral integration matrix, taken
  // from the panel side the walk enters.
  std::vector<double> part(g.size());
  for (int p = 0; p < np; ++p) {
    const std::size_t off = static_cast<std::size_t>(p) * kN;
    const double hw = 0.5 * (g.breaks()[p + 1] - g.breaks()[p]);
    for (int i = 0; i < kN; ++i) {
      // upward integrals sum the complementary weights directly, which
      // avoids cancelling ptot - part near the panel's right end
      double v = 0.0;
      for (int j = 0; j < kN; ++j) {
        v += (dir_ == Direction::FromLower ? s[i][j] : q.weights[j] - s[i][j]) * ft[off + j];
      }
      part[off + i] = hw * v;
    }
  }
  // Where a one-signed integrand is too steep for its panel the interpolant
  // overshoots and the running values turn back; such panels use cumulative
  // positive weights instead, which keep the values monotone.
  coarse_.assign(np, false);
  const bool lower = dir_ == Direction::FromLower;
  auto fill_panel = [&](int p, double acc) {
    const std::size_t off = static_cast<std::size_t>(p) * kN;
    auto value = [&](int i) { return acc + part[off + i]; };
    bool pos = true, neg = true;
    for (int j = 0; j < kN; ++j) {
      pos = pos && ft[off + j] >= 0.0;
      neg = neg && ft[off + j] <= 0.0;
    }
    if (pos || neg) {
      const double sg = pos ? 1.0 : -1.0;
      const double end = sg * (acc + ptot[p]);
      double prev = sg * acc;
      bool ok = true;
      for (int k = 0; k < kN && ok; ++k) {
        const double v = sg * value(lower ? k : kN - 1 - k);
        ok = v >= prev - 1e-3 * std::abs(prev) && v <= end + 1e-3 * std::abs(end);
        prev = std::max(prev, v);
      }
      if (!ok) {
        coarse_[p] = true;
        const double hw = 0.5 * (g.breaks()[p + 1] - g.breaks()[p]);
        double c = 0.0;
        for (int k = 0; k < kN; ++k) {
          const int i = lower ? k : kN - 1 - k;
          const double w = hw * q.weights[i] * ft[off + i];
          part[off + i] = c + 0.5 * w;
          c += w;
        }
      }
    }
    for (int i = 0; i < kN; ++i) values_[off + i] = value(i);
  };

  values_.assign(g.size(), 0.0);
  panel_start_.assign(np, 0.0);
  double acc = 0.0;
  if (lower) {
    for (int p = 0; p < np; ++p) {
      panel_start_[p] = acc;
      fill_panel(p, acc);
      acc += ptot[p];
    }
  } else {
    for (int p = np - 1; p >= 0; --p) {
      fill_panel(p, acc);
      acc += ptot[p];
      panel_start_[p] = acc;  // value at the panel's left boundary
    }
  }
  total_ = acc;
}

double RunningInner::at(double x) const {
  const Grid& g = *grid_;
  if (x <= g.lower_edge()) return dir_ == Direction::FromLower ? 0.0 : total_;
  if (x >= g.upper_edge()) return dir_ == Direction::FromLower ? total_ : 0.0;
  const double t = g.t_of_x(x);
  const int p = g.panel_of_t(t);
  if (coarse_[static_cast<std::size_t>(p)] && x > g.x().front() && x < g.x().back()) return monotone_at(x);
  const double a = g.breaks()[p], b = g.breaks()[p + 1];
  const double hw = 0.5 * (b - a);
  const double u = std::clamp((t - a) / hw - 1.0, -1.0, 1.0);
  const auto pw = partial_weights(u);
  double part = 0.0;
  for (int j = 0; j < kN; ++j) {
    const std::size_t idx = static_cast<std::size_t>(p) * kN + j;
    part += pw[j] * integrand_[idx] * g.dxdt(g.t()[idx]);
  }
  return dir_ == Direction::FromLower ? panel_start_[p] + hw * part : panel_start_[p] - hw * part;
}

double RunningInner::monotone_at(double x) const {
  const auto& xs = grid_->x();
  if (x <= xs.front() || x >= xs.back()) return at(x);
  const std::size_t i = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin()) - 1;
  const double h = xs[i + 1] - xs[i];
  const double sign = dir_ == Direction::FromLower ? 1.0 : -1.0;
  const double y0 = values_[i], y1 = values_[i + 1];
  double m0 = sign * integrand_[i], m1 = sign * integrand_[i + 1];
  const double delta = (y1 - y0) / h;
  if (delta == 0.0) {
    m0 = m1 = 0.0;
  } else {
    double a = m0 / delta, b = m1 / delta;
    if (a < 0.0) a = 0.0;
    if (b < 0.0) b = 0.0;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      a *= tau;
      b *= tau;
    }
    m0 = a * delta;
    m1 = b * delta;
  }
  const double s = (x - xs[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * m1;
}

RunningInner running_inner(const WaveFn& f, const WaveFn& g, const GridPtr& grid, Direction dir) {
  std::vector<double> fg(grid->size());
  for (std::size_t i = 0; i < fg.size(); ++i) {
    const double x = grid->x()[i];
    fg[i] = f(x).value * g(x).value;
  }
  return RunningInner(grid, std::move(fg), dir);
}

double full_inner_nodes(const std::vector<double>& f, const std::vector<double>& g, const Grid& grid) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) acc += grid.w()[i] * f[i] * g[i];
  return acc;
}

double full_inner(const WaveFn& f, const WaveFn& g, const Grid& grid) {
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.x()[i];
    acc += grid.w()[i] * f(x).value * g(x).value;
  }
  return acc;
}

}  // namespace amforge
