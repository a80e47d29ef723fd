#include "qpdyn/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpdyn/errors.hpp"

namespace qpdyn {

std::vector<double> Grid1D::samples() const {
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = sample(j);
  return out;
}

Grid1D make_position_grid(std::size_t n, double q_min, double q_max) {
  if (n < 2) throw InvalidInput("make_position_grid: need n >= 2, got " + std::to_string(n));
  if (!(q_max > q_min))
    throw InvalidInput("make_position_grid: need q_max > q_min, got [" + std::to_string(q_min) +
                       ", " + std::to_string(q_max) + ")");
  return Grid1D{n, q_min, (q_max - q_min) / static_cast<double>(n), AxisKind::position};
}

Grid1D conjugate_momentum_grid(const Grid1D& q) {
  if (q.axis_kind != AxisKind::position)
    throw InvalidInput("conjugate_momentum_grid: expected a position axis");
  const double dp = 2.0 * std::numbers::pi / (static_cast<double>(q.n) * q.step);
  return Grid1D{q.n, -std::numbers::pi / q.step, dp, AxisKind::momentum};
}

PhaseGrid make_phase_grid(const Grid1D& q) { return PhaseGrid{q, conjugate_momentum_grid(q)}; }

bool is_conjugate_pair(const PhaseGrid& pg) {
  if (pg.q_axis.axis_kind != AxisKind::position || pg.p_axis.axis_kind != AxisKind::momentum)
    return false;
  const Grid1D conj = conjugate_momentum_grid(pg.q_axis);
  return conj == pg.p_axis;
}

WaveFn make_wavefn(const Grid1D& grid) { return WaveFn{grid, std::vector<Complex>(grid.n)}; }

PhaseField make_phase_field(const PhaseGrid& pg) {
  return PhaseField{pg, std::vector<Complex>(pg.size())};
}

RealField make_real_field(const PhaseGrid& pg) {
  return RealField{pg, std::vector<double>(pg.size())};
}

Complex quadrature_sum(const WaveFn& f) {
  Complex s{0.0, 0.0};
  for (const Complex& v : f.values) s += v;
  return s * f.grid.step;
}

Complex quadrature_sum(const PhaseField& f) {
  Complex s{0.0, 0.0};
  for (const Complex& v : f.values) s += v;
  return s * (f.grid.q_axis.step * f.grid.p_axis.step);
}

double quadrature_sum(const RealField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.q_axis.step * f.grid.p_axis.step;
}

double quadrature_sum(const AxisField& f) {
  double s = 0.0;
  for (double v : f.values) s += v;
  return s * f.grid.step;
}

double quadrature_norm(const WaveFn& f) {
  double s = 0.0;
  for (const Complex& v : f.values) s += std::norm(v);
  return std::sqrt(s * f.grid.step);
}

double quadrature_norm_sq(const PhaseField& f) {
  double s = 0.0;
  for (const Complex& v : f.values) s += std::norm(v);
  return s * f.grid.q_axis.step * f.grid.p_axis.step;
}

void ensure_finite(std::span<const Complex> v, const char* what) {
  for (const Complex& x : v)
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
      throw NumericalFailure(std::string(what) + ": non-finite entry");
}

void ensure_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalFailure(std::string(what) + ": non-finite entry");
}

namespace {

template <typename T>
DiffNorms diff_norms_impl(std::span<const T> a, std::span<const T> b, double weight,
                          const char* what) {
  if (a.size() != b.size()) throw InvalidInput(std::string(what) + ": size mismatch");
  double linf = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d;
    if constexpr (std::is_same_v<T, Complex>)
      d = std::abs(a[i] - b[i]);
    else
      d = std::abs(a[i] - b[i]);
    linf = std::max(linf, d);
    sq += d * d;
  }
  return DiffNorms{linf, std::sqrt(sq * weight)};
}

}  // namespace

DiffNorms diff_norms(const WaveFn& a, const WaveFn& b) {
  if (a.grid != b.grid) throw InvalidInput("diff_norms: wave functions on different grids");
  return diff_norms_impl<Complex>(a.values, b.values, a.grid.step, "diff_norms(WaveFn)");
}

DiffNorms diff_norms(const PhaseField& a, const PhaseField& b) {
  if (a.grid != b.grid) throw InvalidInput("diff_norms: fields on different grids");
  return diff_norms_impl<Complex>(a.values, b.values, a.grid.q_axis.step * a.grid.p_axis.step,
                                  "diff_norms(PhaseField)");
}

DiffNorms diff_norms(const RealField& a, const RealField& b) {
  if (a.grid != b.grid) throw InvalidInput("diff_norms: fields on different grids");
  return diff_norms_impl<double>(a.values, b.values, a.grid.q_axis.step * a.grid.p_axis.step,
                                 "diff_norms(RealField)");
}

}  // namespace qpdyn
