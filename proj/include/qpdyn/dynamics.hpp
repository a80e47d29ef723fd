#pragma once

#include <functional>
#include <limits>
#include <span>

#include "qpdyn/grid.hpp"
#include "qpdyn/states.hpp"

namespace qpdyn {

enum class RhsKind { phase_direct, phase_factorized, schrodinger_reference };

/// Evaluation strategy for the phase-space right-hand side:
/// `contracted` is the O(N^3) separable contraction (algebraically identical
/// to the literal sum), `literal` the O(N^4) four-index reference, gated to
/// grids <= 64x64.
enum class DirectEval { contracted, literal };

struct PropagatorConfig {
  double t0 = 0.0;
  double t1 = 0.0;
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-3;
  double safety = 0.9;
  double dt_min = 1e-12;
  double dt_max = std::numeric_limits<double>::infinity();
  double snapshot_stride = 0.5;
  KineticSpec kinetic = KineticSpec::non_relativistic(1.0);
  PotentialSpec potential = PotentialSpec::free_particle();
  RhsKind rhs_kind = RhsKind::phase_factorized;
};

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evals = 0;
  double final_dt = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> times;                    // strictly increasing
  std::vector<std::vector<Complex>> snapshots;  // flattened state per time
  StepStats stats;
  /// Phase rate removed during relativistic runs (m0 c^2); the stored
  /// snapshots live in the rest-energy rotating frame. 0 otherwise.
  double rest_energy_rate = 0.0;
};

/// Kinetic profile used by the propagation RHS: T(p) for non-relativistic
/// models, T(p) - m0 c^2 for relativistic ones (rest-energy rotating frame;
/// the removed constant only contributes a global phase e^{-i m0 c^2 t}).
double rhs_kinetic_value(const KineticSpec& spec, double p);

/// Schrodinger right-hand side -i[(-d_q^2/2m) psi + V psi] with the second
/// derivative evaluated spectrally. Relativistic kinetics are not supported
/// in this position-space reference.
WaveFn rhs_schrodinger(const WaveFn& psi, const PropagatorConfig& cfg);

/// Phase-space equation of motion
///   d_t rho(q,p) = -i (4 pi)^(-1) sum_{j,l} e^{i(q p_l - q_j p)/2}
///                  [T((p+p_l)/2) + V((q+q_j)/2)] rho(q_j,p_l) dq dp.
PhaseField rhs_phase_direct(const PhaseField& qp, const PropagatorConfig& cfg,
                            DirectEval eval = DirectEval::contracted);

/// Factorized form of the same operator, valid on the physical subspace:
/// reconstructs psi, applies H = T + V (T spectrally, V pointwise) and maps
/// -i H psi back with the windowed transform:
///   -i psi_to_qp( T_spectral psi + V psi ),  psi = qp_to_psi_q(rho).
/// Exactly conjugate to the reference discretization on conjugate grids;
/// O(N log N) per evaluation and the default engine for propagation.
/// Accepts any kinetic profile T(p), including the (experimental)
/// relativistic one.
PhaseField rhs_phase_factorized(const PhaseField& qp, const PropagatorConfig& cfg);

using RhsFn = std::function<void(double t, std::span<const Complex> y, std::span<Complex> dydt)>;

/// Adaptive embedded Cash-Karp 5(4) driver over a flattened complex state.
/// Error control: per-component scale atol + rtol*|y|, acceptance on
/// RMS-normalized error <= 1, step update with the safety factor and
/// exponent 1/5, growth/shrink clamped to [0.2, 5]. The final step is
/// clamped to hit t1 exactly; snapshots are recorded at the configured
/// stride plus first/last. Throws NumericalFailure on dt underflow or NaN.
TrajectoryRecord cash_karp_propagate_raw(std::span<const Complex> y0,
                                         const PropagatorConfig& cfg, const RhsFn& rhs);

/// Propagates a position-space state with the Schrodinger reference RHS.
TrajectoryRecord propagate(const WaveFn& psi0, const PropagatorConfig& cfg);

/// Propagates a phase-space field with the configured phase-space RHS.
TrajectoryRecord propagate(const PhaseField& qp0, const PropagatorConfig& cfg);

WaveFn wavefn_snapshot(const TrajectoryRecord& rec, std::size_t i, const Grid1D& grid);
PhaseField phase_snapshot(const TrajectoryRecord& rec, std::size_t i, const PhaseGrid& grid);

}  // namespace qpdyn
