#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "amforge/systems.hpp"

namespace amforge {

/// Type I: square-integrable at the lower endpoint only. Type II: at the
/// upper endpoint only.
enum class BoundaryType { I, II };

std::string_view to_string(BoundaryType t);
BoundaryType parse_boundary_type(std::string_view s);

enum class SeedFamily {
  L1,
  L2,
  J1,
  J2,
  L1Gen,
  L2Gen,
  J1Gen,
  J2Gen,
  L1Eig,
  J1Eig,
  J2Eig,
  J1Cplx,
  J2Cplx,
  J1EigCplx,
  J2EigCplx,
  Overshoot,
  DiscreteSym,
  /// A bound eigenfunction used as a seed; changes a norm, adds no level.
  Eigenstate,
};

std::string_view to_string(SeedFamily f);
SeedFamily parse_seed_family(std::string_view s);

/// Per-step parameter change caused by one addition. An empty optional
/// (in SeedSolution::shift) means the family never exhausts.
struct ParamShift {
  char param;  // 'g' or 'h'
  double delta;
};

/// Evaluation form for the hypergeometric seeds that have a Kummer/Euler
/// rewrite. Both give the same function up to a constant factor.
enum class SeedForm { Direct, Rewritten };

struct SeedSolution {
  SolvableSystem source;
  SeedFamily family;
  /// Degree v; the imaginary part B for the complex families; the level
  /// index for Overshoot and Eigenstate.
  double degree;
  double energy;
  BoundaryType btype;
  WaveFn eval;
  std::optional<ParamShift> shift;

  /// e.g. "L1(v=0)".
  std::string tag() const;
};

SeedSolution virtual_state(const SolvableSystem& sys, BoundaryType btype, int v);
SeedSolution generalized_virtual_state(const SolvableSystem& sys, BoundaryType btype, double v,
                                       SeedForm form = SeedForm::Rewritten);
SeedSolution eigenlike_seed(const SolvableSystem& sys, BoundaryType btype, double v);
/// family is one of J1Cplx, J2Cplx, J1EigCplx, J2EigCplx.
SeedSolution complex_degree_seed(const SolvableSystem& sys, SeedFamily family, double b);
SeedSolution overshoot_seed(const SolvableSystem& sys, int n);
/// btype only matters for HypDPT; Eckart and Coulomb seeds are type II.
SeedSolution discrete_symmetry_seed(const SolvableSystem& sys, BoundaryType btype, int v);
/// Eigenfunction phi_n as a seed with the running integral taken in the
/// direction implied by btype.
SeedSolution eigenstate_seed(const SolvableSystem& sys, int n, BoundaryType btype = BoundaryType::I);

/// Dispatches on family, using degree as v, B or n as appropriate.
SeedSolution make_seed(const SolvableSystem& sys, SeedFamily family, BoundaryType btype,
                       double degree);

/// Numerical boundary classification from endpoint window masses of seed^2.
/// Throws AmbiguousClassification if integrable at both ends, PseudoVirtual
/// if integrable at neither.
BoundaryType classify_boundary(const SeedSolution& seed);

/// Largest number of additions with this family before the shifted
/// parameter leaves (3/2, inf). std::nullopt means unlimited.
std::optional<int> addable_budget(const SolvableSystem& sys, SeedFamily family,
                                  BoundaryType btype = BoundaryType::I);
std::optional<int> addable_budget(const SeedSolution& seed);

}  // namespace amforge
