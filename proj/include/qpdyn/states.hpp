#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "qpdyn/grid.hpp"

namespace qpdyn {

/// Center of a unit-width coherent state, Hartree atomic units.
struct CoherentStateSpec {
  double q0 = 0.0;
  double p0 = 0.0;
};

struct MorseParams {
  double v0 = 0.0;    // offset of the well bottom
  double depth = 0.0; // well depth
  double a = 0.0;     // range parameter
  double q_eq = 0.0;  // equilibrium position
};

struct HarmonicParams {
  double m = 1.0;
  double omega = 1.0;
};

struct FreeParams {};

class PotentialSpec {
 public:
  static PotentialSpec morse(double v0, double depth, double a, double q_eq);
  static PotentialSpec harmonic(double m, double omega);
  static PotentialSpec free_particle();

  /// V at an arbitrary point. Morse exponents are clamped (see
  /// potential_values diagnostics) so the result is always finite.
  double evaluate(double q) const;

  const char* kind_name() const;
  const std::variant<MorseParams, HarmonicParams, FreeParams>& variant() const { return v_; }

 private:
  std::variant<MorseParams, HarmonicParams, FreeParams> v_;
};

struct NonRelativisticParams {
  double m = 1.0;
};

struct RelativisticParams {
  double m0 = 1.0;
  double c = 137.035999;  // CODATA speed of light, atomic units
};

class KineticSpec {
 public:
  static KineticSpec non_relativistic(double m);
  static KineticSpec relativistic(double m0, double c);

  /// T(p): p^2/(2m), or sqrt(c^2 p^2 + (m0 c^2)^2) which includes the rest
  /// energy m0 c^2 at p = 0.
  double evaluate(double p) const;

  bool is_relativistic() const;
  /// m0 c^2 for relativistic kinetics, 0 otherwise.
  double rest_energy() const;
  double mass() const;

  const char* kind_name() const;
  const std::variant<NonRelativisticParams, RelativisticParams>& variant() const { return v_; }

 private:
  std::variant<NonRelativisticParams, RelativisticParams> v_;
};

/// Boundary-amplitude diagnostic for sampled states. `truncated` is set when
/// |psi| at either edge exceeds 1e-8, converting the silent assumption of
/// negligible boundary amplitude into a testable warning.
struct BoundaryDiagnostic {
  double left_amp = 0.0;
  double right_amp = 0.0;
  bool truncated = false;
};

inline constexpr double kBoundaryAmplitudeThreshold = 1e-8;

/// Samples pi^(-1/4) exp[i p0 (q - q0) - (q - q0)^2 / 2] on a position grid.
/// Unit quadrature norm whenever the center is well inside the domain.
WaveFn coherent_state(const Grid1D& grid, const CoherentStateSpec& spec,
                      BoundaryDiagnostic* diag = nullptr);

BoundaryDiagnostic boundary_diagnostic(const WaveFn& psi);

struct Superposition {
  WaveFn psi;               // renormalized to unit quadrature norm
  double normalization;     // N with psi = N * sum(coeff_i * psi_i)
};

/// Coefficient-weighted sum renormalized to unit norm. Throws InvalidInput
/// on mismatched grids or a perfectly cancelling (zero-norm) result.
Superposition superpose(const std::vector<std::pair<Complex, WaveFn>>& terms);

struct ClampDiagnostic {
  bool clamped = false;
  double worst_exponent = 0.0;
};

/// V(q) on a position grid. Morse: v0 + depth*(1 - exp[-a(q - q_eq)])^2 with
/// the exponent clamped to keep values representable (diagnostic reports it).
AxisField potential_values(const Grid1D& grid, const PotentialSpec& spec,
                           ClampDiagnostic* diag = nullptr);

/// T(p) on a momentum grid.
AxisField kinetic_values(const Grid1D& grid, const KineticSpec& spec);

}  // namespace qpdyn
