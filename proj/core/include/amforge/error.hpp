#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amforge {

enum class Errc {
  ParameterPole,
  NonConvergence,
  ImaginaryResidue,
  ParameterOutOfRange,
  EndpointEvaluation,
  IndexOutOfRange,
  UnsupportedSystem,
  InvalidDegree,
  SeedInSpectrum,
  BoundaryMismatch,
  BudgetExhausted,
  AmbiguousClassification,
  PseudoVirtual,
  Divergence,
  DegenerateDomain,
  NotPositiveDefinite,
  SingularDeformation,
  NonUnitNorm,
  NodeInSeed,
  MixedTypes,
  Oracle,
  Config,
};

std::string_view to_string(Errc code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::ParameterPole: return "parameter-pole";
    case Errc::NonConvergence: return "non-convergence";
    case Errc::ImaginaryResidue: return "imaginary-residue-too-large";
    case Errc::ParameterOutOfRange: return "parameter-out-of-range";
    case Errc::EndpointEvaluation: return "evaluation-at-endpoint";
    case Errc::IndexOutOfRange: return "index-out-of-range";
    case Errc::UnsupportedSystem: return "unsupported-system";
    case Errc::InvalidDegree: return "invalid-degree";
    case Errc::SeedInSpectrum: return "seed-in-spectrum";
    case Errc::BoundaryMismatch: return "boundary-type-mismatch";
    case Errc::BudgetExhausted: return "budget-exhausted";
    case Errc::AmbiguousClassification: return "ambiguous-classification";
    case Errc::PseudoVirtual: return "pseudo-virtual";
    case Errc::Divergence: return "divergence";
    case Errc::DegenerateDomain: return "degenerate-domain";
    case Errc::NotPositiveDefinite: return "not-positive-definite";
    case Errc::SingularDeformation: return "singular-deformation";
    case Errc::NonUnitNorm: return "non-unit-norm";
    case Errc::NodeInSeed: return "node-in-seed";
    case Errc::MixedTypes: return "mixed-boundary-types";
    case Errc::Oracle: return "oracle-failure";
    case Errc::Config: return "config";
  }
  return "unknown";
}

}  // namespace amforge
