#pragma once

// Composite Gauss-Legendre grids in a mapped coordinate t and running inner
// products <f,g>(x) accumulated from either endpoint.

#include <memory>
#include <optional>
#include <vector>

#include "amforge/systems.hpp"

namespace amforge {

/// Coordinate maps x(t):
///  Identity  x = t                      for (-inf, inf)
///  Logistic  x = a + (b-a)/(1+e^{-t})   for finite (a, b)
///  SoftExp   x = a + log(1+e^t)         for (a, inf), exponential clustering at a
///            (mirrored for (-inf, b))
enum class GridMap { Identity, Logistic, SoftExp };

std::string_view to_string(GridMap m);

enum class Direction { FromLower, FromUpper };

/// A function whose square-integrability at each end is known. Decaying ends
/// are trimmed where the density drops below decay_tol of its peak; growing
/// ends are extended until 1/(1 + int f^2) < growth_tol.
struct Probe {
  WaveFn f;
  bool decays_lower = true;
  bool decays_upper = true;
};

struct MarginPolicy {
  std::vector<Probe> probes;
  double decay_tol = 1e-18;
  double growth_tol = 1e-13;
  double overflow = 1e280;
};

class Grid {
 public:
  static constexpr int kOrder = 16;

  GridMap map() const { return map_; }
  const Domain& domain() const { return domain_; }
  std::size_t size() const { return x_.size(); }
  int panels() const { return static_cast<int>(breaks_.size()) - 1; }

  /// Node positions, increasing.
  const std::vector<double>& x() const { return x_; }
  /// Node positions in t.
  const std::vector<double>& t() const { return t_; }
  /// Quadrature weights for integrals in x (include dx/dt).
  const std::vector<double>& w() const { return w_; }
  /// Panel boundaries in t.
  const std::vector<double>& breaks() const { return breaks_; }

  double x_of_t(double t) const;
  double dxdt(double t) const;
  double t_of_x(double x) const;
  /// Panel containing t, clamped to [0, panels()-1].
  int panel_of_t(double t) const;

  /// x-range covered by the panels.
  double lower_edge() const { return x_of_t(breaks_.front()); }
  double upper_edge() const { return x_of_t(breaks_.back()); }

  /// Grid built on explicit panel boundaries in t.
  static Grid from_breaks(const Domain& domain, std::vector<double> breaks);

 private:
  GridMap map_ = GridMap::Identity;
  Domain domain_{0.0, 1.0};
  std::vector<double> breaks_, x_, t_, w_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridMap map_for(const Domain& domain);

/// Nodes rounded up to a multiple of 16 (at least 64). Panel extents follow
/// the probes; panel widths equidistribute the log-density slope.
Grid build_grid(const Domain& domain, int n_nodes, const MarginPolicy& policy = {});

/// 16-point Gauss-Legendre nodes and weights on [-1, 1].
const std::vector<double>& gl_nodes();
const std::vector<double>& gl_weights();

/// Cumulative integral of f*g started at one endpoint. Node values are
/// exact for the panel interpolant; at() integrates the interpolant over a
/// partial panel.
class RunningInner {
 public:
  /// integrand holds f*g at the grid nodes.
  RunningInner(GridPtr grid, std::vector<double> integrand, Direction dir,
               bool check_divergence = true);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  Direction direction() const { return dir_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& integrand() const { return integrand_; }
  /// Integral over the whole grid.
  double total() const { return total_; }

  /// Value at any x; clamped to 0 / total() outside the panel range.
  double at(double x) const;
  /// Monotone cubic Hermite interpolation between nodes using f*g as the
  /// node slopes (Fritsch-Carlson limiter).
  double monotone_at(double x) const;

 private:
  GridPtr grid_;
  std::vector<double> integrand_;
  std::vector<double> values_;
  std::vector<double> panel_start_;  // value at the left boundary of each panel
  std::vector<bool> coarse_;         // panels using positive-weight partials
  Direction dir_;
  double total_ = 0.0;
};

RunningInner running_inner(const WaveFn& f, const WaveFn& g, const GridPtr& grid, Direction dir);
double full_inner(const WaveFn& f, const WaveFn& g, const Grid& grid);
/// Weighted sum of node products.
double full_inner_nodes(const std::vector<double>& f, const std::vector<double>& g, const Grid& grid);

}  // namespace amforge
