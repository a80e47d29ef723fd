#pragma once

#include "qpdyn/grid.hpp"

namespace qpdyn {

/// Every transform ships as a matched pair behind one interface:
/// `reference` is the literal nested quadrature (the ground-truth oracle),
/// `fast` the FFT/contraction factorization. Equivalence of the two is
/// bound by tests; results are deterministic for either choice.
enum class Impl { reference, fast };

/// Gabor-like map of a position-space state onto phase space:
///   rho(q,p) = (2 pi^(3/2))^(-1/2) e^{i q p / 2}
///              * sum_j e^{-(q - q_j)^2 / 2} psi(q_j) e^{-i q_j p} dq
/// The Gaussian window width is fixed at 1; all back-transform constants
/// assume it.
PhaseField psi_to_qp(const WaveFn& psi, const PhaseGrid& pg, Impl impl = Impl::fast);

/// Momentum-space variant of the same map:
///   rho(q,p) = (2 pi^(3/2))^(-1/2) e^{-i q p / 2}
///              * sum_l e^{-(p - p_l)^2 / 2} psi(p_l) e^{+i q p_l} dp
/// Agrees with psi_to_qp applied to the Fourier-transformed state.
PhaseField psi_p_to_qp(const WaveFn& psi_p, const PhaseGrid& pg, Impl impl = Impl::fast);

/// psi(q) = (2 sqrt(pi))^(-1/2) sum_k rho(q, p_k) e^{i q p_k / 2} dp.
/// Composing after psi_to_qp is the identity (to machine precision on
/// conjugate grids).
WaveFn qp_to_psi_q(const PhaseField& qp);

/// psi(p) = (2 sqrt(pi))^(-1/2) sum_j rho(q_j, p) e^{-i q_j p / 2} dq.
WaveFn qp_to_psi_p(const PhaseField& qp);

/// Kirkwood-like density matrix P(q,p) = psi*(q) * F[psi](p) with the
/// unitary Fourier sum F.
PhaseField psi_to_kirkwood(const WaveFn& psi, const PhaseGrid& pg, Impl impl = Impl::fast);

/// P(q,p) = (4 pi)^(-1/2) sum_{j,l} rho(q_j, p) rho*(q, p_l)
///          e^{-i (q_j p + q p_l)/2} dq dp.
PhaseField qp_to_kirkwood(const PhaseField& qp, Impl impl = Impl::fast);

/// Wigner function from the position-space state:
///   W(q,p) = (2 pi)^(-1) sum_xi psi(q + xi/2) psi*(q - xi/2) e^{-i xi p} dxi
/// xi runs over the q-step lattice; half-step samples come from band-limited
/// interpolation, out-of-domain samples are zero. The imaginary residue is
/// checked against 1e-10 and discarded.
RealField psi_to_wigner(const WaveFn& psi, const PhaseGrid& pg, Impl impl = Impl::fast);

/// Wigner function computed directly from the phase-space wave function
/// (1-D systems):
///   W(q,p) = pi^(-1) sum_{xi,ups} rho(q-xi, p-ups) rho*(q+xi, p+ups)
///            e^{-i (q ups - p xi)} dxi dups
/// with offsets on the grid-difference lattice and zero extension outside
/// the domain. The kernel sign is fixed by the coherent-state regression
/// test against psi_to_wigner.
RealField qp_to_wigner_1d(const PhaseField& qp, Impl impl = Impl::fast);

/// Phase-space identity map
///   out(q,p) = (4 pi)^(-1) sum_{j,l} rho(q_j, p_l) e^{i (q p_l - q_j p)/2} dq dp.
/// Acts as the identity (to quadrature accuracy) on fields in the image of
/// psi_to_qp. Off that subspace the map is a symplectic-Fourier transform,
/// not a projector; the projector onto the physical subspace is the
/// reconstruction round trip psi_to_qp(qp_to_psi_q(.)), which is exactly
/// idempotent on conjugate grids.
PhaseField phase_identity(const PhaseField& qp, Impl impl = Impl::fast);

/// Gabor transform without the complex prefactor: G(q,p) = rho(q,p) e^{-i q p/2};
/// |G| equals |rho| pointwise.
PhaseField gabor_no_phase(const WaveFn& psi, const PhaseGrid& pg, Impl impl = Impl::fast);

/// Shared phase table e^{+i q_j p_k / 2} for the grid (q-major layout).
/// Exposed for the observables/dynamics contractions.
const std::vector<Complex>& half_phase_table(const PhaseGrid& pg);

/// Band-limited samples of psi on the half-step refinement of its grid,
/// 2n values, fine[2j] = psi[j].
std::vector<Complex> half_step_refine(const WaveFn& psi);

}  // namespace qpdyn
