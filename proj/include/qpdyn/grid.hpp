#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qpdyn {

using Complex = std::complex<double>;

enum class AxisKind { position, momentum };

/// Uniform 1-D sample axis in atomic units. Sample j is origin + j*step,
/// j in [0, n); the covered interval is half-open (Fourier convention).
struct Grid1D {
  std::size_t n = 0;
  double origin = 0.0;
  double step = 0.0;
  AxisKind axis_kind = AxisKind::position;

  double sample(std::size_t j) const { return origin + static_cast<double>(j) * step; }
  double extent() const { return static_cast<double>(n) * step; }
  std::vector<double> samples() const;

  bool operator==(const Grid1D&) const = default;
};

/// n samples on [q_min, q_max), step (q_max - q_min)/n.
Grid1D make_position_grid(std::size_t n, double q_min, double q_max);

/// Fourier-conjugate momentum axis of a position grid: same n,
/// step 2*pi/(n*dq), covering [-pi/dq, pi/dq).
Grid1D conjugate_momentum_grid(const Grid1D& q);

/// (q,p) product grid housing phase-space fields.
struct PhaseGrid {
  Grid1D q_axis;
  Grid1D p_axis;

  std::size_t size() const { return q_axis.n * p_axis.n; }
  std::size_t index(std::size_t iq, std::size_t ip) const { return iq * p_axis.n + ip; }

  bool operator==(const PhaseGrid&) const = default;
};

/// PhaseGrid with the conjugate momentum axis of `q`.
PhaseGrid make_phase_grid(const Grid1D& q);

/// True when pg.p_axis is exactly the conjugate of pg.q_axis.
bool is_conjugate_pair(const PhaseGrid& pg);

/// Complex field over a single axis; `space()` tags psi(q) vs psi(p).
struct WaveFn {
  Grid1D grid;
  std::vector<Complex> values;

  AxisKind space() const { return grid.axis_kind; }
};

/// Complex field over a PhaseGrid. Layout is q-major, p index fastest:
/// values[iq * n_p + ip].
struct PhaseField {
  PhaseGrid grid;
  std::vector<Complex> values;

  Complex& at(std::size_t iq, std::size_t ip) { return values[grid.index(iq, ip)]; }
  const Complex& at(std::size_t iq, std::size_t ip) const { return values[grid.index(iq, ip)]; }
};

/// Real field over a PhaseGrid (Wigner, Husimi). Same layout as PhaseField.
struct RealField {
  PhaseGrid grid;
  std::vector<double> values;

  double& at(std::size_t iq, std::size_t ip) { return values[grid.index(iq, ip)]; }
  const double& at(std::size_t iq, std::size_t ip) const { return values[grid.index(iq, ip)]; }
};

/// Real samples over a single axis (potential/kinetic profiles).
struct AxisField {
  Grid1D grid;
  std::vector<double> values;
};

WaveFn make_wavefn(const Grid1D& grid);
PhaseField make_phase_field(const PhaseGrid& pg);
RealField make_real_field(const PhaseGrid& pg);

/// Rectangle-rule sums: sum(values) * product of axis steps. Exact for
/// band-limited periodic integrands on conjugate grids.
Complex quadrature_sum(const WaveFn& f);
Complex quadrature_sum(const PhaseField& f);
double quadrature_sum(const RealField& f);
double quadrature_sum(const AxisField& f);

/// sqrt(sum |psi|^2 * step)
double quadrature_norm(const WaveFn& f);
/// sum |rho|^2 * dq * dp
double quadrature_norm_sq(const PhaseField& f);

/// Throws NumericalFailure if any entry is NaN/Inf.
void ensure_finite(std::span<const Complex> v, const char* what);
void ensure_finite(std::span<const double> v, const char* what);

struct DiffNorms {
  double linf = 0.0;
  double l2 = 0.0;  // quadrature-weighted
};

DiffNorms diff_norms(const WaveFn& a, const WaveFn& b);
DiffNorms diff_norms(const PhaseField& a, const PhaseField& b);
DiffNorms diff_norms(const RealField& a, const RealField& b);

}  // namespace qpdyn
