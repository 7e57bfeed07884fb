#pragma once

// Finite-difference eigenvalues of -d^2/dx^2 + U(x), independent of the
// quadrature and Gram machinery: only the potential evaluator crosses the
// interface.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "amforge/systems.hpp"

namespace amforge {

struct OracleGrid {
  int n_nodes = 0;
  /// "identity", "logistic" or "softplus".
  std::string mapping;
  /// Dirichlet clip points.
  double lower = 0.0;
  double upper = 0.0;
};

struct SpectralResult {
  /// Lowest k eigenvalues at n_nodes and at 2 n_nodes.
  std::vector<double> coarse;
  std::vector<double> eigenvalues;
  /// (4 E_{2N} - E_N) / 3.
  std::vector<double> extrapolated;
  OracleGrid grid;
};

/// Three-point differences on a grid uniform in a mapped coordinate (the
/// nonuniform x-spacing enters symmetrically), Sturm-count bisection for the
/// lowest k eigenvalues, Richardson extrapolation over n_nodes and 2 n_nodes.
/// Clip points come from a WKB tunnelling action of about 30 beyond the
/// outermost turning points, optionally intersected with `clip`.
SpectralResult fd_spectrum(const std::function<double(double)>& potential, const Domain& domain, int n_nodes,
                           int k, std::optional<std::pair<double, double>> clip = std::nullopt);

/// Lowest k eigenvalues of the symmetric tridiagonal matrix (diag, off).
std::vector<double> tridiagonal_lowest(const std::vector<double>& diag, const std::vector<double>& off, int k);

}  // namespace amforge
