#pragma once

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "qpdyn/grid.hpp"
#include "qpdyn/states.hpp"
#include "qpdyn/transforms.hpp"

namespace qpdyn::testing {

inline constexpr double kPi = std::numbers::pi;

/// The 256-point grid on [-2, 50) used by the headline experiment.
inline Grid1D paper_grid() { return make_position_grid(256, -2.0, 50.0); }

/// 256-point grid hosting the two-Gaussian figure state with every center
/// at least 11 sigma inside the domain.
inline Grid1D figure_grid() { return make_position_grid(256, -12.0, 16.0); }

/// Closed-form phase-space wave function of a unit-width coherent state
/// (Gaussian integral, verified against brute-force quadrature):
///   rho(q,p) = (2 pi)^(-1/2) e^{-((q-q0)^2+(p-p0)^2)/4}
///              e^{+i (q p0 - q0 p - q0 p0)/2}
inline Complex coherent_qp_oracle(double q, double p, double q0, double p0) {
  const double mod =
      std::exp(-((q - q0) * (q - q0) + (p - p0) * (p - p0)) / 4.0) / std::sqrt(2.0 * kPi);
  return std::polar(mod, 0.5 * (q * p0 - q0 * p - q0 * p0));
}

/// Closed-form Wigner function of a coherent state:
///   W(q,p) = pi^(-1) e^{-(q-q0)^2 - (p-p0)^2}
inline double coherent_wigner_oracle(double q, double p, double q0, double p0) {
  return std::exp(-(q - q0) * (q - q0) - (p - p0) * (p - p0)) / kPi;
}

/// Closed-form momentum representation of a coherent state:
///   psi(p) = pi^(-1/4) e^{-(p-p0)^2/2} e^{-i q0 p}
inline Complex coherent_psi_p_oracle(double p, double q0, double p0) {
  const double mod = std::pow(kPi, -0.25) * std::exp(-0.5 * (p - p0) * (p - p0));
  return std::polar(mod, -q0 * p);
}

/// The two-Gaussian state of the figure set: N [z(4,-2) + z(-1,5)].
inline WaveFn figure_state(const Grid1D& grid) {
  const WaveFn z1 = coherent_state(grid, {4.0, -2.0});
  const WaveFn z2 = coherent_state(grid, {-1.0, 5.0});
  return superpose({{Complex{1.0, 0.0}, z1}, {Complex{1.0, 0.0}, z2}}).psi;
}

/// Boundary-safe pseudo-random test state: a superposition of a few coherent
/// states with centers inside |q| <= box, fixed seed.
inline WaveFn random_state(const Grid1D& grid, unsigned seed, double q_box, double p_box) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uq(-q_box, q_box), up(-p_box, p_box),
      uc(-1.0, 1.0);
  std::vector<std::pair<Complex, WaveFn>> terms;
  for (int i = 0; i < 3; ++i) {
    const Complex coeff{uc(rng), uc(rng)};
    terms.emplace_back(coeff, coherent_state(grid, {uq(rng), up(rng)}));
  }
  return superpose(terms).psi;
}

/// Random complex field (not in the physical subspace), fixed seed.
inline PhaseField random_phase_field(const PhaseGrid& pg, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PhaseField f = make_phase_field(pg);
  for (Complex& v : f.values) v = Complex{u(rng), u(rng)};
  return f;
}

inline double linf(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs(const std::vector<Complex>& a) {
  double m = 0.0;
  for (const Complex& v : a) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_real(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace qpdyn::testing
