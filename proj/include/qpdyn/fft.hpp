#pragma once

#include <span>

#include "qpdyn/grid.hpp"

namespace qpdyn {

namespace fft {

/// Unnormalized length-n c2c DFT, sign -1 forward / +1 backward
/// (FFTW convention). Plans are cached per length and may be executed
/// concurrently; in and out may alias.
void dft(std::span<const Complex> in, std::span<Complex> out, int sign);

}  // namespace fft

/// Unitary discrete Fourier pair on conjugate grids:
///   psi(p_k) = (2 pi)^(-1/2) sum_j psi(q_j) e^{-i q_j p_k} dq
///   psi(q_j) = (2 pi)^(-1/2) sum_k psi(p_k) e^{+i q_j p_k} dp
/// The p axis must be conjugate_momentum_grid of the q axis; composing the
/// two maps is the identity to machine precision.
WaveFn fourier_q_to_p(const WaveFn& psi_q, const Grid1D& p_axis);
WaveFn fourier_p_to_q(const WaveFn& psi_p, const Grid1D& q_axis);

}  // namespace qpdyn
