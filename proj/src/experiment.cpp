#include "qpdyn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qpdyn/dynamics.hpp"
#include "qpdyn/errors.hpp"
#include "qpdyn/fft.hpp"
#include "qpdyn/observables.hpp"
#include "qpdyn/transforms.hpp"

namespace qpdyn {

bool ExperimentReport::all_pass() const {
  return std::all_of(gates.begin(), gates.end(), [](const GateResult& g) { return g.pass; });
}

std::string ExperimentReport::to_text() const {
  std::ostringstream os;
  os << "gates:\n";
  for (const GateResult& g : gates)
    os << "  [" << (g.pass ? "PASS" : "FAIL") << "] " << g.name << " = "
       << format_double(g.value) << " (tol " << format_double(g.tol) << ")\n";
  os << "metrics:\n";
  for (const auto& [k, v] : metrics) os << "  " << k << " = " << format_double(v) << "\n";
  os << (all_pass() ? "result: PASS\n" : "result: FAIL\n");
  return os.str();
}

namespace {

double wavefn_energy(const WaveFn& psi, const PotentialSpec& v, const KineticSpec& t) {
  const Grid1D p_axis = conjugate_momentum_grid(psi.grid);
  const WaveFn psi_p = fourier_q_to_p(psi, p_axis);
  double e = 0.0;
  for (std::size_t k = 0; k < p_axis.n; ++k)
    e += rhs_kinetic_value(t, p_axis.sample(k)) * std::norm(psi_p.values[k]) * p_axis.step;
  for (std::size_t j = 0; j < psi.grid.n; ++j)
    e += v.evaluate(psi.grid.sample(j)) * std::norm(psi.values[j]) * psi.grid.step;
  return e;
}

struct Emitter {
  const std::filesystem::path& dir;
  const Provenance& prov;
  bool csv;

  template <typename Field>
  void operator()(const Field& f, const std::string& name) const {
    write_field(f, dir / (name + ".fld"), prov);
    if (csv) write_csv(f, dir / (name + ".csv"));
  }
};

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir,
                                const Provenance& base_prov, std::ostream* log) {
  std::filesystem::create_directories(out_dir);
  Provenance prov = base_prov;
  prov.config_hash = cfg.hash;

  ExperimentReport report;
  auto gate = [&](const std::string& name, double value, std::optional<double> tol) {
    report.metrics[name] = value;
    if (tol) report.gates.push_back(GateResult{name, value, *tol, value <= *tol});
  };
  auto note = [&](const std::string& msg) {
    if (log) *log << msg << "\n";
  };

  const Grid1D q_axis = make_position_grid(cfg.n_q, cfg.q_min, cfg.q_max);
  const PhaseGrid pg = make_phase_grid(q_axis);

  // Initial state.
  std::vector<std::pair<Complex, WaveFn>> terms;
  for (const InitialTerm& t : cfg.terms) {
    BoundaryDiagnostic diag;
    WaveFn z = coherent_state(q_axis, CoherentStateSpec{t.q0, t.p0}, &diag);
    if (diag.truncated)
      note("warning: coherent state (" + format_double(t.q0) + ", " + format_double(t.p0) +
           ") has boundary amplitude " +
           format_double(std::max(diag.left_amp, diag.right_amp)) + " above " +
           format_double(kBoundaryAmplitudeThreshold) + " (truncation risk)");
    terms.emplace_back(t.coeff, std::move(z));
  }
  const Superposition init = superpose(terms);
  const WaveFn& psi0 = init.psi;
  report.metrics["normalization_constant"] = init.normalization;

  const PhaseField qp0 = psi_to_qp(psi0, pg, Impl::fast);

  const Emitter emit{out_dir, prov, cfg.csv};
  auto has_output = [&](const char* name) {
    return std::find(cfg.outputs.begin(), cfg.outputs.end(), name) != cfg.outputs.end();
  };

  auto emit_set = [&](const WaveFn& psi, const PhaseField& qp, const std::string& suffix) {
    if (has_output("psi_q")) emit(psi, "psi_q_" + suffix);
    if (has_output("psi_p")) emit(qp_to_psi_p(qp), "psi_p_" + suffix);
    if (has_output("qp")) emit(qp, "qp_" + suffix);
    if (has_output("kirkwood")) emit(qp_to_kirkwood(qp, Impl::fast), "kirkwood_" + suffix);
    if (has_output("wigner")) emit(qp_to_wigner_1d(qp, Impl::fast), "wigner_" + suffix);
    if (has_output("husimi")) emit(husimi(qp), "husimi_" + suffix);
  };

  emit_set(psi0, qp0, "t0");

  // Always-on structural gates.
  {
    const WaveFn back = qp_to_psi_q(qp0);
    gate("roundtrip_linf", diff_norms(back, psi0).linf, cfg.gate_roundtrip.value_or(1e-10));
    gate("trace_initial_abs", std::abs(trace_norm(qp0) - 1.0), cfg.gate_trace.value_or(1e-8));
  }

  if (!(cfg.t1 > 0.0)) {
    note("static run (t1 = 0): no propagation");
    const std::string text = report.to_text();
    std::ofstream(out_dir / "report.txt") << text;
    return report;
  }

  PropagatorConfig pc;
  pc.t0 = 0.0;
  pc.t1 = cfg.t1;
  pc.rtol = cfg.rtol;
  pc.atol = cfg.atol;
  pc.dt_init = cfg.dt_init;
  pc.dt_max = cfg.dt_max;
  pc.snapshot_stride = cfg.snapshot_stride;
  pc.kinetic = cfg.kinetic;
  pc.potential = cfg.potential;
  pc.rhs_kind = cfg.rhs_kind;

  const bool main_is_reference = cfg.rhs_kind == RhsKind::schrodinger_reference;

  // Main engine.
  WaveFn psi_final = psi0;
  PhaseField qp_final = qp0;
  if (main_is_reference) {
    const TrajectoryRecord rec = propagate(psi0, pc);
    note("reference engine: " + std::to_string(rec.stats.accepted) + " accepted / " +
         std::to_string(rec.stats.rejected) + " rejected steps");
    report.metrics["main_accepted_steps"] = static_cast<double>(rec.stats.accepted);
    report.metrics["main_rejected_steps"] = static_cast<double>(rec.stats.rejected);
    psi_final = wavefn_snapshot(rec, rec.snapshots.size() - 1, q_axis);
    qp_final = psi_to_qp(psi_final, pg, Impl::fast);

    double norm_drift = 0.0, energy_drift = 0.0;
    const double e0 = wavefn_energy(psi0, cfg.potential, cfg.kinetic);
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
      const WaveFn psi_i = wavefn_snapshot(rec, i, q_axis);
      norm_drift = std::max(norm_drift, std::abs(quadrature_norm(psi_i) - 1.0));
      energy_drift = std::max(
          energy_drift, std::abs(wavefn_energy(psi_i, cfg.potential, cfg.kinetic) - e0));
    }
    gate("trace_drift", norm_drift, cfg.gate_trace_drift);
    gate("energy_drift", energy_drift, cfg.gate_energy_drift);
  } else {
    const TrajectoryRecord rec = propagate(qp0, pc);
    note("phase engine (" + std::string(rhs_kind_name(cfg.rhs_kind)) + "): " +
         std::to_string(rec.stats.accepted) + " accepted / " +
         std::to_string(rec.stats.rejected) + " rejected steps");
    report.metrics["main_accepted_steps"] = static_cast<double>(rec.stats.accepted);
    report.metrics["main_rejected_steps"] = static_cast<double>(rec.stats.rejected);
    qp_final = phase_snapshot(rec, rec.snapshots.size() - 1, pg);
    psi_final = qp_to_psi_q(qp_final);

    // Conservation metrics track the propagated field itself: the trace from
    // |rho|^2 directly, the energy through the exactly-invertible psi(q)
    // reconstruction (the momentum-route reconstruction would fold its own
    // boundary-margin deficit into the drift and measure the map, not the
    // dynamics).
    double trace_drift = 0.0, energy_drift = 0.0;
    const double tr0 = trace_norm(qp0);
    const double e0 = wavefn_energy(qp_to_psi_q(qp0), cfg.potential, cfg.kinetic);
    for (std::size_t i = 0; i < rec.snapshots.size(); ++i) {
      const PhaseField qp_i = phase_snapshot(rec, i, pg);
      trace_drift = std::max(trace_drift, std::abs(trace_norm(qp_i) - tr0));
      energy_drift = std::max(
          energy_drift,
          std::abs(wavefn_energy(qp_to_psi_q(qp_i), cfg.potential, cfg.kinetic) - e0));
    }
    gate("trace_drift", trace_drift, cfg.gate_trace_drift);
    gate("energy_drift", energy_drift, cfg.gate_energy_drift);
  }

  emit_set(psi_final, qp_final, "t1");

  // Schrodinger reference for cross-validation.
  if (!main_is_reference && !cfg.kinetic.is_relativistic()) {
    PropagatorConfig ref_pc = pc;
    ref_pc.rhs_kind = RhsKind::schrodinger_reference;
    const TrajectoryRecord ref = propagate(psi0, ref_pc);
    note("reference engine: " + std::to_string(ref.stats.accepted) + " accepted / " +
         std::to_string(ref.stats.rejected) + " rejected steps");
    report.metrics["ref_accepted_steps"] = static_cast<double>(ref.stats.accepted);
    const WaveFn psi_ref = wavefn_snapshot(ref, ref.snapshots.size() - 1, q_axis);

    if (has_output("psi_q")) emit(psi_ref, "ref_psi_q_t1");
    const WaveFn psi_p_phase = qp_to_psi_p(qp_final);
    const WaveFn psi_p_ref = fourier_q_to_p(psi_ref, pg.p_axis);
    if (has_output("psi_p")) emit(psi_p_ref, "ref_psi_p_t1");

    const DiffNorms d_q = diff_norms(psi_final, psi_ref);
    const DiffNorms d_p = diff_norms(psi_p_phase, psi_p_ref);
    gate("compare_psi_q_l2", d_q.l2, cfg.gate_l2);
    gate("compare_psi_p_l2", d_p.l2, cfg.gate_l2);
    report.metrics["compare_psi_q_linf"] = d_q.linf;
    report.metrics["compare_psi_p_linf"] = d_p.linf;

    if (has_output("kirkwood")) {
      const PhaseField k_phase = qp_to_kirkwood(qp_final, Impl::fast);
      const PhaseField k_ref = psi_to_kirkwood(psi_ref, pg, Impl::fast);
      emit(k_ref, "ref_kirkwood_t1");
      const DiffNorms d = diff_norms(k_phase, k_ref);
      gate("compare_kirkwood_l2", d.l2, cfg.gate_l2);
      report.metrics["compare_kirkwood_linf"] = d.linf;
    }
    if (has_output("wigner")) {
      const RealField w_phase = qp_to_wigner_1d(qp_final, Impl::fast);
      const RealField w_ref = psi_to_wigner(psi_ref, pg, Impl::fast);
      emit(w_ref, "ref_wigner_t1");
      const DiffNorms d = diff_norms(w_phase, w_ref);
      gate("compare_wigner_l2", d.l2, cfg.gate_l2);
      report.metrics["compare_wigner_linf"] = d.linf;
    }
  } else if (cfg.kinetic.is_relativistic()) {
    note("relativistic kinetic: position-space reference comparison skipped");
  }

  // Mean-value return for periodic systems.
  if (cfg.gate_ehrenfest) {
    const ObservableSpec q_obs = ObservableSpec::position(pg.q_axis);
    const ObservableSpec p_obs = ObservableSpec::momentum(pg.p_axis);
    const double dq = std::abs(expectation_reduced(qp_final, q_obs) -
                               expectation_reduced(qp0, q_obs));
    const double dp = std::abs(expectation_reduced(qp_final, p_obs) -
                               expectation_reduced(qp0, p_obs));
    gate("ehrenfest_return_q", dq, cfg.gate_ehrenfest);
    gate("ehrenfest_return_p", dp, cfg.gate_ehrenfest);
  }

  const std::string text = report.to_text();
  std::ofstream(out_dir / "report.txt") << text;
  note(text);
  return report;
}

}  // namespace qpdyn
