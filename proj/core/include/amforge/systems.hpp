#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amforge/specfun.hpp"

namespace amforge {

/// x -> (value, d/dx value).
using WaveFn = std::function<FnValue(double)>;

enum class SystemKind { L, J, Morse, RosenMorse, Eckart, HypDPT, Coulomb };

std::string_view to_string(SystemKind kind);
/// Parses a catalog name. Names of systems without usable seeds produce an
/// Errc::UnsupportedSystem error that says so.
SystemKind parse_system_kind(std::string_view name);

struct SystemParams {
  double g = std::numeric_limits<double>::quiet_NaN();
  double h = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
};

struct Domain {
  double lower;
  double upper;

  bool lower_infinite() const { return lower == -std::numeric_limits<double>::infinity(); }
  bool upper_infinite() const { return upper == std::numeric_limits<double>::infinity(); }
  bool contains(double x) const { return x > lower && x < upper; }
};

/// One row of the catalog table printed by `amforge list-systems`.
struct CatalogEntry {
  SystemKind kind;
  std::string_view parameters;
  std::string_view range;
  std::string_view domain;
  std::string_view n_max;
  std::string_view potential;
};

const std::vector<CatalogEntry>& catalog();

/// A base Hamiltonian -d^2/dx^2 + U(x) with closed-form bound states.
/// Immutable after construction.
class SolvableSystem {
 public:
  static SolvableSystem make(SystemKind kind, SystemParams params);

  SystemKind kind() const { return kind_; }
  const SystemParams& params() const { return params_; }
  Domain domain() const;
  /// Highest bound-state index; std::nullopt for infinitely many.
  std::optional<int> n_max() const { return n_max_; }
  bool has_level(int n) const { return n >= 0 && (!n_max_ || n <= *n_max_); }

  double potential(double x) const;
  double eigen_energy(int n) const;
  WaveFn eigenfunction(int n) const;
  double norm_constant(int n) const;

  /// Energy formula continued to an arbitrary real degree (no range check).
  double energy_formula(double n) const;
  /// Eigenfunction formula at any integer degree, including past n_max.
  FnValue eigenfunction_formula(int n, double x) const;

  /// Index of a bound level with energy within tol of e, if any (checks
  /// n <= n_max, or n <= 50 for infinite spectra).
  std::optional<int> level_at(double e, double tol = 1e-9) const;

  /// Interior point used to fix seed scales.
  double reference_point() const;

  std::string name() const { return std::string(to_string(kind_)); }
  /// e.g. "L(g=2)".
  std::string label() const;

 private:
  SolvableSystem(SystemKind kind, SystemParams params);
  void require_level(int n) const;
  void require_interior(double x) const;

  SystemKind kind_;
  SystemParams params_;
  std::optional<int> n_max_;
};

/// Greatest integer strictly below a.
int floor_strict(double a);

}  // namespace amforge
