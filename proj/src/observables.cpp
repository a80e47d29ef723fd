#include "qpdyn/observables.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "qpdyn/errors.hpp"
#include "qpdyn/parallel.hpp"
#include "qpdyn/transforms.hpp"

namespace qpdyn {

namespace {

std::vector<double> midpoint_samples(const Grid1D& axis, const std::function<double(double)>& f) {
  std::vector<double> out(2 * axis.n - 1);
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double x = axis.origin + 0.5 * axis.step * static_cast<double>(r);
    out[r] = f(x);
    if (!std::isfinite(out[r]))
      throw InvalidInput("ObservableSpec: non-finite sample at x = " + std::to_string(x));
  }
  return out;
}

}  // namespace

ObservableSpec ObservableSpec::position_fn(const Grid1D& q_axis,
                                           const std::function<double(double)>& f) {
  if (q_axis.axis_kind != AxisKind::position)
    throw InvalidInput("ObservableSpec::position_fn: expected a position axis");
  ObservableSpec s;
  s.q_axis_ = q_axis;
  s.q_mid_ = midpoint_samples(q_axis, f);
  return s;
}

ObservableSpec ObservableSpec::momentum_fn(const Grid1D& p_axis,
                                           const std::function<double(double)>& g) {
  if (p_axis.axis_kind != AxisKind::momentum)
    throw InvalidInput("ObservableSpec::momentum_fn: expected a momentum axis");
  ObservableSpec s;
  s.p_axis_ = p_axis;
  s.p_mid_ = midpoint_samples(p_axis, g);
  return s;
}

ObservableSpec ObservableSpec::sum(const ObservableSpec& q_part, const ObservableSpec& p_part) {
  if (!q_part.has_q() || q_part.has_p())
    throw InvalidInput("ObservableSpec::sum: first argument must be a pure f(q) part");
  if (!p_part.has_p() || p_part.has_q())
    throw InvalidInput("ObservableSpec::sum: second argument must be a pure g(p) part");
  ObservableSpec s;
  s.q_axis_ = q_part.q_axis_;
  s.q_mid_ = q_part.q_mid_;
  s.p_axis_ = p_part.p_axis_;
  s.p_mid_ = p_part.p_mid_;
  return s;
}

ObservableSpec ObservableSpec::identity(const Grid1D& q_axis) {
  return position_fn(q_axis, [](double) { return 1.0; });
}

ObservableSpec ObservableSpec::position(const Grid1D& q_axis) {
  return position_fn(q_axis, [](double q) { return q; });
}

ObservableSpec ObservableSpec::momentum(const Grid1D& p_axis) {
  return momentum_fn(p_axis, [](double p) { return p; });
}

ObservableSpec ObservableSpec::potential(const Grid1D& q_axis, const PotentialSpec& v) {
  return position_fn(q_axis, [&v](double q) { return v.evaluate(q); });
}

ObservableSpec ObservableSpec::kinetic(const Grid1D& p_axis, const KineticSpec& t) {
  return momentum_fn(p_axis, [&t](double p) { return t.evaluate(p); });
}

ObservableSpec ObservableSpec::hamiltonian(const PhaseGrid& pg, const KineticSpec& t,
                                           const PotentialSpec& v) {
  return sum(potential(pg.q_axis, v), kinetic(pg.p_axis, t));
}

RealField husimi(const PhaseField& qp) {
  RealField out = make_real_field(qp.grid);
  for (std::size_t i = 0; i < qp.values.size(); ++i) out.values[i] = std::norm(qp.values[i]);
  return out;
}

double trace_norm(const PhaseField& qp) { return quadrature_norm_sq(qp); }

namespace {

void require_axes(const PhaseField& qp, const ObservableSpec& obs, const char* what) {
  if (!is_conjugate_pair(qp.grid))
    throw InvalidInput(std::string(what) + ": field grid is not a conjugate pair");
  if (obs.has_q() && obs.q_axis() != qp.grid.q_axis)
    throw InvalidInput(std::string(what) + ": observable q axis does not match the field");
  if (obs.has_p() && obs.p_axis() != qp.grid.p_axis)
    throw InvalidInput(std::string(what) + ": observable p axis does not match the field");
  if (!obs.has_q() && !obs.has_p())
    throw InvalidInput(std::string(what) + ": empty observable");
}

// A[j''][j'] = sum_l rho*(j'',l) e^{-i q_{j'} p_l / 2} dp; the f(q) part of
// the quadruple-sum mean value is then
//   (4 pi)^(-1) dq^2 sum_{j'',j'} f_mid[j''+j'] A[j''][j'] conj(A[j'][j''])
// (and symmetrically in momentum for g(p)).
std::vector<Complex> position_contraction(const PhaseField& qp, const std::vector<Complex>& half) {
  const std::size_t n = qp.grid.q_axis.n;
  const double dp = qp.grid.p_axis.step;
  std::vector<Complex> a(n * n);
  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j2 = lo; j2 < hi; ++j2) {
      Complex* arow = a.data() + j2 * n;
      const Complex* rrow = qp.values.data() + j2 * n;
      for (std::size_t j1 = 0; j1 < n; ++j1) {
        const Complex* hrow = half.data() + j1 * n;
        Complex s{0.0, 0.0};
        for (std::size_t l = 0; l < n; ++l) s += rrow[l] * hrow[l];
        arow[j1] = dp * std::conj(s);
      }
    }
  });
  return a;
}

std::vector<Complex> momentum_contraction(const PhaseField& qp, const std::vector<Complex>& half) {
  const std::size_t n = qp.grid.q_axis.n;
  const double dq = qp.grid.q_axis.step;
  std::vector<Complex> rho_t(n * n), half_t(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      rho_t[l * n + j] = qp.values[j * n + l];
      half_t[l * n + j] = half[j * n + l];
    }
  std::vector<Complex> d(n * n);
  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t l2 = lo; l2 < hi; ++l2) {
      Complex* drow = d.data() + l2 * n;
      const Complex* rrow = rho_t.data() + l2 * n;
      for (std::size_t l1 = 0; l1 < n; ++l1) {
        const Complex* hrow = half_t.data() + l1 * n;
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) s += std::conj(rrow[j]) * hrow[j];
        drow[l1] = dq * s;
      }
    }
  });
  return d;
}

}  // namespace

double expectation_direct(const PhaseField& qp, const ObservableSpec& obs) {
  require_axes(qp, obs, "expectation_direct");
  const std::vector<Complex>& half = half_phase_table(qp.grid);
  const std::size_t n = qp.grid.q_axis.n;
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);

  Complex total{0.0, 0.0};
  if (obs.has_q()) {
    const std::vector<Complex> a = position_contraction(qp, half);
    const std::vector<double>& f = obs.q_mid_samples();
    const double w = inv4pi * qp.grid.q_axis.step * qp.grid.q_axis.step;
    Complex s{0.0, 0.0};
    for (std::size_t j2 = 0; j2 < n; ++j2)
      for (std::size_t j1 = 0; j1 < n; ++j1)
        s += f[j2 + j1] * a[j2 * n + j1] * std::conj(a[j1 * n + j2]);
    total += w * s;
  }
  if (obs.has_p()) {
    const std::vector<Complex> d = momentum_contraction(qp, half);
    const std::vector<double>& g = obs.p_mid_samples();
    const double w = inv4pi * qp.grid.p_axis.step * qp.grid.p_axis.step;
    Complex s{0.0, 0.0};
    for (std::size_t l2 = 0; l2 < n; ++l2)
      for (std::size_t l1 = 0; l1 < n; ++l1)
        s += g[l2 + l1] * d[l2 * n + l1] * std::conj(d[l1 * n + l2]);
    total += w * s;
  }
  if (std::abs(total.imag()) > kExpectationResidueTol)
    throw NumericalFailure("expectation_direct: imaginary residue " +
                           std::to_string(total.imag()) +
                           " above threshold (non-Hermitian input or broken grid)");
  return total.real();
}

double expectation_reduced(const PhaseField& qp, const ObservableSpec& obs) {
  require_axes(qp, obs, "expectation_reduced");
  double total = 0.0;
  if (obs.has_q()) {
    const WaveFn psi = qp_to_psi_q(qp);
    const std::vector<double>& f = obs.q_mid_samples();
    double s = 0.0;
    for (std::size_t j = 0; j < psi.grid.n; ++j) s += f[2 * j] * std::norm(psi.values[j]);
    total += s * psi.grid.step;
  }
  if (obs.has_p()) {
    const WaveFn psi_p = qp_to_psi_p(qp);
    const std::vector<double>& g = obs.p_mid_samples();
    double s = 0.0;
    for (std::size_t k = 0; k < psi_p.grid.n; ++k) s += g[2 * k] * std::norm(psi_p.values[k]);
    total += s * psi_p.grid.step;
  }
  return total;
}

}  // namespace qpdyn
