#include "qpdyn/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "qpdyn/errors.hpp"
#include "qpdyn/fft.hpp"
#include "qpdyn/parallel.hpp"
#include "qpdyn/transforms.hpp"

namespace qpdyn {

namespace {

constexpr Complex kMinusI{0.0, -1.0};

// Cash-Karp embedded 5(4) tableau.
constexpr double kA21 = 1.0 / 5.0;
constexpr double kA31 = 3.0 / 40.0, kA32 = 9.0 / 40.0;
constexpr double kA41 = 3.0 / 10.0, kA42 = -9.0 / 10.0, kA43 = 6.0 / 5.0;
constexpr double kA51 = -11.0 / 54.0, kA52 = 5.0 / 2.0, kA53 = -70.0 / 27.0, kA54 = 35.0 / 27.0;
constexpr double kA61 = 1631.0 / 55296.0, kA62 = 175.0 / 512.0, kA63 = 575.0 / 13824.0,
                 kA64 = 44275.0 / 110592.0, kA65 = 253.0 / 4096.0;
constexpr double kC2 = 1.0 / 5.0, kC3 = 3.0 / 10.0, kC4 = 3.0 / 5.0, kC5 = 1.0, kC6 = 7.0 / 8.0;
constexpr double kB1 = 37.0 / 378.0, kB3 = 250.0 / 621.0, kB4 = 125.0 / 594.0,
                 kB6 = 512.0 / 1771.0;
constexpr double kD1 = kB1 - 2825.0 / 27648.0;
constexpr double kD3 = kB3 - 18575.0 / 48384.0;
constexpr double kD4 = kB4 - 13525.0 / 55296.0;
constexpr double kD5 = -277.0 / 14336.0;
constexpr double kD6 = kB6 - 1.0 / 4.0;

constexpr std::size_t kLiteralRhsLimit = 64;

// Midpoint-lattice samples: value r corresponds to origin + r*step/2.
std::vector<double> midpoint_values(const Grid1D& axis, const std::function<double(double)>& f) {
  std::vector<double> out(2 * axis.n - 1);
  for (std::size_t r = 0; r < out.size(); ++r)
    out[r] = f(axis.origin + 0.5 * axis.step * static_cast<double>(r));
  return out;
}

}  // namespace

double rhs_kinetic_value(const KineticSpec& spec, double p) {
  return spec.evaluate(p) - spec.rest_energy();
}

WaveFn rhs_schrodinger(const WaveFn& psi, const PropagatorConfig& cfg) {
  if (psi.space() != AxisKind::position)
    throw InvalidInput("rhs_schrodinger: expected a position-space state");
  if (cfg.kinetic.is_relativistic())
    throw InvalidInput(
        "rhs_schrodinger: relativistic kinetics unsupported in the position-space reference");

  const Grid1D p_axis = conjugate_momentum_grid(psi.grid);
  WaveFn psi_p = fourier_q_to_p(psi, p_axis);
  for (std::size_t k = 0; k < p_axis.n; ++k)
    psi_p.values[k] *= cfg.kinetic.evaluate(p_axis.sample(k));
  WaveFn t_psi = fourier_p_to_q(psi_p, psi.grid);

  WaveFn out = make_wavefn(psi.grid);
  for (std::size_t j = 0; j < psi.grid.n; ++j) {
    const double v = cfg.potential.evaluate(psi.grid.sample(j));
    out.values[j] = kMinusI * (t_psi.values[j] + v * psi.values[j]);
  }
  return out;
}

PhaseField rhs_phase_direct(const PhaseField& qp, const PropagatorConfig& cfg, DirectEval eval) {
  if (!is_conjugate_pair(qp.grid))
    throw InvalidInput("rhs_phase_direct: field grid is not a conjugate pair");
  const std::size_t n = qp.grid.q_axis.n;
  const double dq = qp.grid.q_axis.step;
  const double dp = qp.grid.p_axis.step;
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  const std::vector<Complex>& half = half_phase_table(qp.grid);

  const std::vector<double> v_mid = midpoint_values(
      qp.grid.q_axis, [&](double q) { return cfg.potential.evaluate(q); });
  const std::vector<double> t_mid = midpoint_values(
      qp.grid.p_axis, [&](double p) { return rhs_kinetic_value(cfg.kinetic, p); });

  PhaseField out = make_phase_field(qp.grid);

  if (eval == DirectEval::literal) {
    if (n > kLiteralRhsLimit)
      throw InvalidInput("rhs_phase_direct: literal four-index sum is gated to grids <= " +
                         std::to_string(kLiteralRhsLimit) + "x" +
                         std::to_string(kLiteralRhsLimit));
    parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t m = lo; m < hi; ++m) {
        Complex* orow = out.values.data() + m * n;
        const Complex* hm = half.data() + m * n;
        for (std::size_t k = 0; k < n; ++k) {
          Complex s{0.0, 0.0};
          for (std::size_t j = 0; j < n; ++j) {
            const Complex hj = std::conj(half[j * n + k]);
            const Complex* rrow = qp.values.data() + j * n;
            const double vj = v_mid[m + j];
            for (std::size_t l = 0; l < n; ++l)
              s += hm[l] * hj * (t_mid[k + l] + vj) * rrow[l];
          }
          orow[k] = kMinusI * inv4pi * dq * dp * s;
        }
      }
    });
    ensure_finite(out.values, "rhs_phase_direct");
    return out;
  }

  // Semi-factorized contraction, algebraically identical to the literal sum:
  //   V part: sum_j V((q_m+q_j)/2) e^{-i q_j p_k/2} M[j][m],
  //           M[j][m] = sum_l rho(j,l) e^{+i q_m p_l/2} dp
  //   T part: sum_l T((p_k+p_l)/2) e^{+i q_m p_l/2} G[l][k],
  //           G[l][k] = sum_j rho(j,l) e^{-i q_j p_k/2} dq
  std::vector<Complex> m_tab(n * n);  // [j][m]
  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t j = lo; j < hi; ++j) {
      const Complex* rrow = qp.values.data() + j * n;
      Complex* mrow = m_tab.data() + j * n;
      for (std::size_t m = 0; m < n; ++m) {
        const Complex* hrow = half.data() + m * n;
        Complex s{0.0, 0.0};
        for (std::size_t l = 0; l < n; ++l) s += rrow[l] * hrow[l];
        mrow[m] = s * dp;
      }
    }
  });

  std::vector<Complex> rho_t(n * n), half_t(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = 0; l < n; ++l) {
      rho_t[l * n + j] = qp.values[j * n + l];
      half_t[l * n + j] = half[j * n + l];
    }
  std::vector<Complex> g_tab(n * n);  // [l][k]
  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t l = lo; l < hi; ++l) {
      const Complex* rrow = rho_t.data() + l * n;
      Complex* grow = g_tab.data() + l * n;
      for (std::size_t k = 0; k < n; ++k) {
        const Complex* hrow = half_t.data() + k * n;
        Complex s{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j) s += rrow[j] * std::conj(hrow[j]);
        grow[k] = s * dq;
      }
    }
  });

  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t m = lo; m < hi; ++m) {
      Complex* orow = out.values.data() + m * n;
      const Complex* hm = half.data() + m * n;
      // V part: iterate j outer so the k loop stays contiguous.
      for (std::size_t j = 0; j < n; ++j) {
        const Complex vm = v_mid[m + j] * m_tab[j * n + m] * dq;
        const Complex* hjrow = half.data() + j * n;  // e^{+i q_j p_k / 2}
        for (std::size_t k = 0; k < n; ++k) orow[k] += vm * std::conj(hjrow[k]);
      }
      // T part.
      for (std::size_t l = 0; l < n; ++l) {
        const Complex hl = hm[l] * dp;
        const Complex* grow = g_tab.data() + l * n;
        for (std::size_t k = 0; k < n; ++k) orow[k] += hl * t_mid[k + l] * grow[k];
      }
      const Complex scale = kMinusI * inv4pi;
      for (std::size_t k = 0; k < n; ++k) orow[k] *= scale;
    }
  });
  ensure_finite(out.values, "rhs_phase_direct");
  return out;
}

PhaseField rhs_phase_factorized(const PhaseField& qp, const PropagatorConfig& cfg) {
  if (!is_conjugate_pair(qp.grid))
    throw InvalidInput("rhs_phase_factorized: field grid is not a conjugate pair");
  const PhaseGrid& pg = qp.grid;

  // H psi assembled in the reconstructed position representation: V acts
  // pointwise, T spectrally through the exact unitary Fourier pair. The
  // single windowed transform of (-i H psi) keeps the evolution exactly
  // conjugate to the reference discretization; routing the kinetic term
  // through the momentum-space windowed transform instead carries
  // boundary-margin deficits of the window sums (e^{-L^2/4} in the
  // state-to-wall margin L), which dominate the propagator comparison on
  // wall-rebound problems.
  const WaveFn psi = qp_to_psi_q(qp);
  WaveFn psi_p = fourier_q_to_p(psi, pg.p_axis);
  for (std::size_t k = 0; k < pg.p_axis.n; ++k)
    psi_p.values[k] *= rhs_kinetic_value(cfg.kinetic, pg.p_axis.sample(k));
  WaveFn h_psi = fourier_p_to_q(psi_p, pg.q_axis);
  for (std::size_t j = 0; j < pg.q_axis.n; ++j) {
    h_psi.values[j] += cfg.potential.evaluate(pg.q_axis.sample(j)) * psi.values[j];
    h_psi.values[j] *= kMinusI;
  }
  return psi_to_qp(h_psi, pg, Impl::fast);
}

namespace {

void axpy_stage(std::vector<Complex>& dst, std::span<const Complex> y, double dt,
                std::initializer_list<std::pair<double, const std::vector<Complex>*>> terms) {
  const std::size_t n = y.size();
  parallel_for_range(n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      Complex acc = y[i];
      for (const auto& [coeff, k] : terms) acc += dt * coeff * (*k)[i];
      dst[i] = acc;
    }
  });
}

}  // namespace

TrajectoryRecord cash_karp_propagate_raw(std::span<const Complex> y0,
                                         const PropagatorConfig& cfg, const RhsFn& rhs) {
  if (!(cfg.t1 > cfg.t0)) throw InvalidInput("cash_karp_propagate_raw: need t1 > t0");
  if (!(cfg.rtol > 0.0) || !(cfg.atol > 0.0))
    throw InvalidInput("cash_karp_propagate_raw: need rtol, atol > 0");
  if (!(cfg.safety > 0.0 && cfg.safety < 1.0))
    throw InvalidInput("cash_karp_propagate_raw: need safety in (0,1)");
  if (!(cfg.dt_min <= cfg.dt_init && cfg.dt_init <= cfg.dt_max))
    throw InvalidInput("cash_karp_propagate_raw: need dt_min <= dt_init <= dt_max");

  const std::size_t n = y0.size();
  const double span = cfg.t1 - cfg.t0;

  std::vector<Complex> y(y0.begin(), y0.end());
  std::vector<Complex> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), ytmp(n), y5(n);

  TrajectoryRecord rec;
  rec.times.push_back(cfg.t0);
  rec.snapshots.push_back(y);

  double t = cfg.t0;
  double dt = std::min(cfg.dt_init, span);
  double next_snap = cfg.t0 + cfg.snapshot_stride;

  auto eval = [&](double tt, const std::vector<Complex>& yy, std::vector<Complex>& out) {
    rhs(tt, yy, out);
    ++rec.stats.rhs_evals;
  };

  const double t_end = cfg.t1;
  while (t < t_end - 1e-14 * std::abs(t_end)) {
    dt = std::min(dt, t_end - t);

    eval(t, y, k1);
    axpy_stage(ytmp, y, dt, {{kA21, &k1}});
    eval(t + kC2 * dt, ytmp, k2);
    axpy_stage(ytmp, y, dt, {{kA31, &k1}, {kA32, &k2}});
    eval(t + kC3 * dt, ytmp, k3);
    axpy_stage(ytmp, y, dt, {{kA41, &k1}, {kA42, &k2}, {kA43, &k3}});
    eval(t + kC4 * dt, ytmp, k4);
    axpy_stage(ytmp, y, dt, {{kA51, &k1}, {kA52, &k2}, {kA53, &k3}, {kA54, &k4}});
    eval(t + kC5 * dt, ytmp, k5);
    axpy_stage(ytmp, y, dt, {{kA61, &k1}, {kA62, &k2}, {kA63, &k3}, {kA64, &k4}, {kA65, &k5}});
    eval(t + kC6 * dt, ytmp, k6);

    axpy_stage(y5, y, dt, {{kB1, &k1}, {kB3, &k3}, {kB4, &k4}, {kB6, &k6}});

    // Fixed-chunk reduction: partials are combined in chunk order, so the
    // sum does not depend on the thread schedule and step acceptance is
    // reproducible run to run.
    constexpr std::size_t kErrChunks = 64;
    std::array<double, kErrChunks> partial{};
    const std::size_t chunk = (n + kErrChunks - 1) / kErrChunks;
    parallel_for_range(kErrChunks, [&](std::size_t clo, std::size_t chi) {
      for (std::size_t c = clo; c < chi; ++c) {
        double acc = 0.0;
        const std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) {
          const Complex e =
              dt * (kD1 * k1[i] + kD3 * k3[i] + kD4 * k4[i] + kD5 * k5[i] + kD6 * k6[i]);
          const double scale =
              cfg.atol + cfg.rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
          const double r = std::abs(e) / scale;
          acc += r * r;
        }
        partial[c] = acc;
      }
    });
    double err_sq = 0.0;
    for (double p : partial) err_sq += p;
    const double err = std::sqrt(err_sq / static_cast<double>(n));
    if (!std::isfinite(err))
      throw NumericalFailure("cash_karp_propagate_raw: non-finite state at t = " +
                             std::to_string(t));

    if (err <= 1.0) {
      t += dt;
      y.swap(y5);
      ++rec.stats.accepted;
      rec.stats.final_dt = dt;

      const bool at_end = t >= t_end - 1e-14 * std::abs(t_end);
      if (at_end || t >= next_snap - 1e-12) {
        rec.times.push_back(t);
        rec.snapshots.push_back(y);
        while (next_snap <= t + 1e-12) next_snap += cfg.snapshot_stride;
      }

      const double grow = err > 0.0 ? cfg.safety * std::pow(err, -0.2) : 5.0;
      dt *= std::clamp(grow, 0.2, 5.0);
    } else {
      ++rec.stats.rejected;
      const double shrink = cfg.safety * std::pow(err, -0.2);
      dt *= std::clamp(shrink, 0.2, 0.9);
    }
    dt = std::min(dt, cfg.dt_max);
    const bool finished = t >= t_end - 1e-14 * std::abs(t_end);
    if (!finished && dt < cfg.dt_min)
      throw NumericalFailure("cash_karp_propagate_raw: step size underflow (dt = " +
                             std::to_string(dt) + ") at t = " + std::to_string(t));
  }

  if (rec.times.back() != t) {
    rec.times.push_back(t);
    rec.snapshots.push_back(y);
  }
  return rec;
}

TrajectoryRecord propagate(const WaveFn& psi0, const PropagatorConfig& cfg) {
  if (cfg.rhs_kind != RhsKind::schrodinger_reference)
    throw InvalidInput("propagate(WaveFn): rhs_kind must be schrodinger_reference");
  WaveFn work{psi0.grid, {}};
  const RhsFn rhs = [&](double, std::span<const Complex> y, std::span<Complex> dydt) {
    work.values.assign(y.begin(), y.end());
    const WaveFn d = rhs_schrodinger(work, cfg);
    std::copy(d.values.begin(), d.values.end(), dydt.begin());
  };
  return cash_karp_propagate_raw(psi0.values, cfg, rhs);
}

TrajectoryRecord propagate(const PhaseField& qp0, const PropagatorConfig& cfg) {
  if (cfg.rhs_kind == RhsKind::schrodinger_reference)
    throw InvalidInput("propagate(PhaseField): rhs_kind must be a phase-space kind");
  PhaseField work{qp0.grid, {}};
  const RhsFn rhs = [&](double, std::span<const Complex> y, std::span<Complex> dydt) {
    work.values.assign(y.begin(), y.end());
    const PhaseField d = cfg.rhs_kind == RhsKind::phase_factorized
                             ? rhs_phase_factorized(work, cfg)
                             : rhs_phase_direct(work, cfg);
    std::copy(d.values.begin(), d.values.end(), dydt.begin());
  };
  TrajectoryRecord rec = cash_karp_propagate_raw(qp0.values, cfg, rhs);
  rec.rest_energy_rate = cfg.kinetic.rest_energy();
  return rec;
}

WaveFn wavefn_snapshot(const TrajectoryRecord& rec, std::size_t i, const Grid1D& grid) {
  if (i >= rec.snapshots.size()) throw InvalidInput("wavefn_snapshot: index out of range");
  if (rec.snapshots[i].size() != grid.n)
    throw InvalidInput("wavefn_snapshot: grid size mismatch");
  return WaveFn{grid, rec.snapshots[i]};
}

PhaseField phase_snapshot(const TrajectoryRecord& rec, std::size_t i, const PhaseGrid& grid) {
  if (i >= rec.snapshots.size()) throw InvalidInput("phase_snapshot: index out of range");
  if (rec.snapshots[i].size() != grid.size())
    throw InvalidInput("phase_snapshot: grid size mismatch");
  return PhaseField{grid, rec.snapshots[i]};
}

}  // namespace qpdyn
