// qpdyn: command-line front end for the phase-space quantum dynamics engine.
//
// Exit codes: 0 success, 1 tolerance-gate failure, 2 usage/config error,
// 3 numerical failure (NaN, step underflow, residue checks).

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "qpdyn/config.hpp"
#include "qpdyn/dynamics.hpp"
#include "qpdyn/errors.hpp"
#include "qpdyn/experiment.hpp"
#include "qpdyn/fft.hpp"
#include "qpdyn/field_io.hpp"
#include "qpdyn/montecarlo.hpp"
#include "qpdyn/observables.hpp"
#include "qpdyn/transforms.hpp"

using namespace qpdyn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitGateFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string join_args(int argc, char** argv) {
  std::ostringstream os;
  for (int i = 0; i < argc; ++i) {
    if (i) os << ' ';
    os << argv[i];
  }
  return os.str();
}

Impl parse_impl(const std::string& method) {
  if (method == "reference") return Impl::reference;
  if (method == "fast") return Impl::fast;
  throw InvalidInput("unknown --method '" + method + "' (expected reference|fast|both)");
}

PropagatorConfig propagator_from_config(const ExperimentConfig& cfg) {
  PropagatorConfig pc;
  pc.t1 = cfg.t1;
  pc.rtol = cfg.rtol;
  pc.atol = cfg.atol;
  pc.dt_init = cfg.dt_init;
  pc.dt_max = cfg.dt_max;
  pc.snapshot_stride = cfg.snapshot_stride;
  pc.kinetic = cfg.kinetic;
  pc.potential = cfg.potential;
  pc.rhs_kind = cfg.rhs_kind;
  return pc;
}

WaveFn state_from_config(const ExperimentConfig& cfg, std::ostream& log) {
  const Grid1D q_axis = make_position_grid(cfg.n_q, cfg.q_min, cfg.q_max);
  std::vector<std::pair<Complex, WaveFn>> terms;
  for (const InitialTerm& t : cfg.terms) {
    BoundaryDiagnostic diag;
    WaveFn z = coherent_state(q_axis, CoherentStateSpec{t.q0, t.p0}, &diag);
    if (diag.truncated)
      log << "warning: coherent state (" << format_double(t.q0) << ", " << format_double(t.p0)
          << ") has boundary amplitude " << format_double(std::max(diag.left_amp, diag.right_amp))
          << " above " << format_double(kBoundaryAmplitudeThreshold) << " (truncation risk)\n";
    terms.emplace_back(t.coeff, std::move(z));
  }
  return superpose(terms).psi;
}

ObservableSpec observable_by_name(const std::string& name, const PhaseGrid& pg,
                                  const ExperimentConfig* cfg) {
  if (name == "1") return ObservableSpec::identity(pg.q_axis);
  if (name == "q") return ObservableSpec::position(pg.q_axis);
  if (name == "p") return ObservableSpec::momentum(pg.p_axis);
  if (name == "q2")
    return ObservableSpec::position_fn(pg.q_axis, [](double q) { return q * q; });
  if (name == "p2")
    return ObservableSpec::momentum_fn(pg.p_axis, [](double p) { return p * p; });
  if (name == "V") {
    if (!cfg) throw InvalidInput("--obs V needs --config for the potential model");
    return ObservableSpec::potential(pg.q_axis, cfg->potential);
  }
  if (name == "T") {
    if (!cfg) throw InvalidInput("--obs T needs --config for the kinetic model");
    return ObservableSpec::kinetic(pg.p_axis, cfg->kinetic);
  }
  if (name == "H") {
    if (!cfg) throw InvalidInput("--obs H needs --config for the Hamiltonian model");
    return ObservableSpec::hamiltonian(pg, cfg->kinetic, cfg->potential);
  }
  throw InvalidInput("unknown observable '" + name + "' (expected 1|q|p|q2|p2|V|T|H)");
}

PhaseGrid grid_of(const PhaseField& f) {
  if (!is_conjugate_pair(f.grid))
    throw InvalidInput("input phase field is not on a conjugate (q,p) grid");
  return f.grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-space quantum dynamics engine"};
  app.require_subcommand(1);

  Provenance prov;
  prov.command = join_args(argc, argv);

  std::string in_path, in_b_path, out_path, config_path, method = "fast", obs_name = "q";
  std::string rhs_override, op_name, target;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 100000, batches = 50;
  bool emit_csv = false;

  // make-state
  CLI::App* make_state = app.add_subcommand("make-state", "build the configured initial state");
  make_state->add_option("--config", config_path)->required();
  make_state->add_option("--out", out_path)->required();

  // transform
  double q_min_flag = std::numeric_limits<double>::quiet_NaN();
  CLI::App* transform = app.add_subcommand("transform", "apply a phase-space transform");
  transform->add_option("--op", op_name,
                        "psi-to-qp|psi-p-to-qp|qp-to-psi-q|qp-to-psi-p|gabor-no-phase")
      ->required();
  transform->add_option("--in", in_path)->required();
  transform->add_option("--out", out_path)->required();
  transform->add_option("--method", method, "reference|fast|both");
  transform->add_option("--q-min", q_min_flag,
                        "position origin for psi-p-to-qp (not stored in momentum files)");
  transform->add_flag("--csv", emit_csv, "also write a CSV export");

  // propagate
  CLI::App* propagate_cmd = app.add_subcommand("propagate", "propagate a state in time");
  propagate_cmd->add_option("--config", config_path)->required();
  propagate_cmd->add_option("--in", in_path, "initial state file (default: from config)");
  propagate_cmd->add_option("--out", out_path)->required();
  propagate_cmd->add_option("--rhs", rhs_override, "phase-direct|phase-fact|schrodinger-ref");

  // wigner / kirkwood / husimi
  CLI::App* wigner_cmd = app.add_subcommand("wigner", "Wigner function of a state or field");
  wigner_cmd->add_option("--in", in_path)->required();
  wigner_cmd->add_option("--out", out_path)->required();
  wigner_cmd->add_option("--method", method);
  wigner_cmd->add_flag("--csv", emit_csv);

  CLI::App* kirkwood_cmd = app.add_subcommand("kirkwood", "Kirkwood-like density matrix");
  kirkwood_cmd->add_option("--in", in_path)->required();
  kirkwood_cmd->add_option("--out", out_path)->required();
  kirkwood_cmd->add_option("--method", method);
  kirkwood_cmd->add_flag("--csv", emit_csv);

  CLI::App* husimi_cmd = app.add_subcommand("husimi", "Husimi density |rho|^2");
  husimi_cmd->add_option("--in", in_path)->required();
  husimi_cmd->add_option("--out", out_path)->required();
  husimi_cmd->add_flag("--csv", emit_csv);

  // expect
  CLI::App* expect_cmd = app.add_subcommand("expect", "mean value of an observable");
  expect_cmd->add_option("--in", in_path)->required();
  expect_cmd->add_option("--obs", obs_name, "1|q|p|q2|p2|V|T|H");
  expect_cmd->add_option("--config", config_path, "model parameters for V/T/H");
  expect_cmd->add_option("--method", method, "direct|reduced|both");
  expect_cmd->add_option("--tol", tol, "with --method both: max |direct - reduced|");

  // mc
  CLI::App* mc_cmd = app.add_subcommand("mc", "Monte-Carlo estimators");
  CLI::App* mc_identity = mc_cmd->add_subcommand("identity", "estimate rho at a target point");
  mc_identity->add_option("--in", in_path)->required();
  mc_identity->add_option("--target", target, "q,p target point")->required();
  mc_identity->add_option("--samples", samples);
  mc_identity->add_option("--seed", seed);
  mc_identity->add_option("--batches", batches);
  CLI::App* mc_expect = mc_cmd->add_subcommand("expect", "estimate a mean value");
  mc_expect->add_option("--in", in_path)->required();
  mc_expect->add_option("--obs", obs_name);
  mc_expect->add_option("--config", config_path);
  mc_expect->add_option("--samples", samples);
  mc_expect->add_option("--seed", seed);
  mc_expect->add_option("--batches", batches);
  mc_cmd->require_subcommand(1);

  // identity-check
  CLI::App* identity_cmd =
      app.add_subcommand("identity-check", "apply the phase-space identity map and compare");
  identity_cmd->add_option("--in", in_path)->required();
  identity_cmd->add_option("--tol", tol, "pass/fail threshold on Linf");
  identity_cmd->add_option("--method", method);

  // compare
  CLI::App* compare_cmd = app.add_subcommand("compare", "compare two field files");
  compare_cmd->add_option("a", in_path)->required();
  compare_cmd->add_option("b", in_b_path)->required();
  compare_cmd->add_option("--tol", tol, "pass/fail threshold");
  std::string norms = "both";
  compare_cmd->add_option("--norms", norms, "linf|l2|both");

  // run-experiment
  CLI::App* run_cmd = app.add_subcommand("run-experiment", "full configured experiment");
  run_cmd->add_option("--config", config_path)->required();
  run_cmd->add_option("--out", out_path, "artifact directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*make_state) {
      const ExperimentConfig cfg = load_experiment_config(config_path);
      prov.config_hash = cfg.hash;
      const WaveFn psi = state_from_config(cfg, std::cerr);
      write_field(psi, out_path, prov);
      std::cout << "wrote " << out_path << " (norm " << format_double(quadrature_norm(psi))
                << ")\n";
      return kExitOk;
    }

    if (*transform) {
      const bool both = method == "both";
      const Impl impl = both ? Impl::fast : parse_impl(method);
      FieldVariant out;
      if (op_name == "psi-to-qp" || op_name == "gabor-no-phase") {
        const WaveFn psi = read_wavefn(in_path, AxisKind::position);
        const PhaseGrid pg = make_phase_grid(psi.grid);
        auto run = [&](Impl i) {
          return op_name == "psi-to-qp" ? psi_to_qp(psi, pg, i) : gabor_no_phase(psi, pg, i);
        };
        PhaseField f = run(impl);
        if (both) {
          const PhaseField r = run(Impl::reference);
          const DiffNorms d = diff_norms(f, r);
          std::cout << "fast vs reference: linf " << format_double(d.linf) << ", l2 "
                    << format_double(d.l2) << "\n";
        }
        out = std::move(f);
      } else if (op_name == "psi-p-to-qp") {
        const WaveFn psi_p = read_wavefn(in_path, AxisKind::momentum);
        if (std::isnan(q_min_flag))
          throw InvalidInput(
              "psi-p-to-qp needs --q-min: the position origin is not stored in momentum files");
        const std::size_t n = psi_p.grid.n;
        const double dq = 2.0 * std::numbers::pi / (static_cast<double>(n) * psi_p.grid.step);
        const Grid1D q_axis =
            make_position_grid(n, q_min_flag, q_min_flag + dq * static_cast<double>(n));
        const PhaseGrid pg{q_axis, psi_p.grid};
        if (!is_conjugate_pair(pg))
          throw InvalidInput("psi-p-to-qp: stored p axis is not conjugate to the implied q axis");
        PhaseField f = psi_p_to_qp(psi_p, pg, impl);
        if (both) {
          const PhaseField r = psi_p_to_qp(psi_p, pg, Impl::reference);
          const DiffNorms d = diff_norms(f, r);
          std::cout << "fast vs reference: linf " << format_double(d.linf) << ", l2 "
                    << format_double(d.l2) << "\n";
        }
        out = std::move(f);
      } else if (op_name == "qp-to-psi-q") {
        out = qp_to_psi_q(read_phase_field(in_path));
      } else if (op_name == "qp-to-psi-p") {
        out = qp_to_psi_p(read_phase_field(in_path));
      } else {
        throw InvalidInput("unknown --op '" + op_name + "'");
      }
      write_field(out, out_path, prov);
      if (emit_csv) write_csv(out, std::filesystem::path(out_path).replace_extension(".csv"));
      std::cout << "wrote " << out_path << "\n";
      return kExitOk;
    }

    if (*wigner_cmd) {
      const Impl impl = method == "both" ? Impl::fast : parse_impl(method);
      const FieldVariant in = read_field(in_path);
      RealField w{};
      if (const auto* psi = std::get_if<WaveFn>(&in)) {
        if (psi->space() != AxisKind::position)
          throw InvalidInput("wigner: expected a position-space wave function or a phase field");
        w = psi_to_wigner(*psi, make_phase_grid(psi->grid), impl);
      } else if (const auto* qp = std::get_if<PhaseField>(&in)) {
        w = qp_to_wigner_1d(*qp, impl);
      } else {
        throw InvalidInput("wigner: real fields have no Wigner transform");
      }
      write_field(w, out_path, prov);
      if (emit_csv) write_csv(w, std::filesystem::path(out_path).replace_extension(".csv"));
      std::cout << "wrote " << out_path << "\n";
      return kExitOk;
    }

    if (*kirkwood_cmd) {
      const Impl impl = method == "both" ? Impl::fast : parse_impl(method);
      const FieldVariant in = read_field(in_path);
      PhaseField p{};
      if (const auto* psi = std::get_if<WaveFn>(&in)) {
        if (psi->space() != AxisKind::position)
          throw InvalidInput("kirkwood: expected a position-space wave function or a phase field");
        p = psi_to_kirkwood(*psi, make_phase_grid(psi->grid), impl);
      } else if (const auto* qp = std::get_if<PhaseField>(&in)) {
        p = qp_to_kirkwood(*qp, impl);
      } else {
        throw InvalidInput("kirkwood: real fields have no Kirkwood transform");
      }
      write_field(p, out_path, prov);
      if (emit_csv) write_csv(p, std::filesystem::path(out_path).replace_extension(".csv"));
      std::cout << "wrote " << out_path << "\n";
      return kExitOk;
    }

    if (*husimi_cmd) {
      const RealField h = husimi(read_phase_field(in_path));
      write_field(h, out_path, prov);
      if (emit_csv) write_csv(h, std::filesystem::path(out_path).replace_extension(".csv"));
      std::cout << "wrote " << out_path << " (trace " << format_double(quadrature_sum(h))
                << ")\n";
      return kExitOk;
    }

    if (*expect_cmd) {
      const PhaseField rho = read_phase_field(in_path);
      std::optional<ExperimentConfig> cfg;
      if (!config_path.empty()) {
        cfg = load_experiment_config(config_path);
        prov.config_hash = cfg->hash;
      }
      const ObservableSpec obs =
          observable_by_name(obs_name, grid_of(rho), cfg ? &*cfg : nullptr);
      if (method == "direct" || method == "fast") {
        std::cout << "direct " << format_double(expectation_direct(rho, obs)) << "\n";
      } else if (method == "reduced" || method == "reference") {
        std::cout << "reduced " << format_double(expectation_reduced(rho, obs)) << "\n";
      } else if (method == "both") {
        const double d = expectation_direct(rho, obs);
        const double r = expectation_reduced(rho, obs);
        std::cout << "direct " << format_double(d) << "\nreduced " << format_double(r)
                  << "\n|direct - reduced| " << format_double(std::abs(d - r)) << "\n";
        if (tol > 0.0 && std::abs(d - r) > tol) {
          std::cout << "FAIL (tol " << format_double(tol) << ")\n";
          return kExitGateFailure;
        }
      } else {
        throw InvalidInput("expect: --method must be direct|reduced|both");
      }
      return kExitOk;
    }

    if (*mc_cmd) {
      McConfig mc;
      mc.sample_count = samples;
      mc.seed = seed;
      mc.batch = batches;
      prov.seed = seed;
      if (*mc_identity) {
        const PhaseField rho = read_phase_field(in_path);
        double tq = 0.0, tp = 0.0;
        if (std::sscanf(target.c_str(), "%lf,%lf", &tq, &tp) != 2)
          throw InvalidInput("mc identity: --target must be 'q,p'");
        const McEstimate e = mc_identity_estimate(rho, tq, tp, mc);
        std::cout << "estimate " << format_double(e.value.real()) << " "
                  << format_double(e.value.imag()) << "i\nstderr " << format_double(e.stderror)
                  << "\nsamples " << e.sample_count << "\nseed " << e.seed << "\n";
      } else {
        const PhaseField rho = read_phase_field(in_path);
        std::optional<ExperimentConfig> cfg;
        if (!config_path.empty()) cfg = load_experiment_config(config_path);
        const ObservableSpec obs =
            observable_by_name(obs_name, grid_of(rho), cfg ? &*cfg : nullptr);
        const McEstimate e = mc_expectation_estimate(rho, obs, mc);
        std::cout << "estimate " << format_double(e.value.real()) << " "
                  << format_double(e.value.imag()) << "i\nstderr " << format_double(e.stderror)
                  << "\nsamples " << e.sample_count << "\nseed " << e.seed << "\n";
      }
      return kExitOk;
    }

    if (*identity_cmd) {
      const Impl impl = method == "both" ? Impl::fast : parse_impl(method);
      const PhaseField rho = read_phase_field(in_path);
      const PhaseField out = phase_identity(rho, impl);
      const DiffNorms d = diff_norms(out, rho);
      std::cout << "linf " << format_double(d.linf) << "\nl2 " << format_double(d.l2) << "\n";
      if (tol > 0.0) {
        const bool pass = d.linf <= tol;
        std::cout << (pass ? "PASS" : "FAIL") << " (tol " << format_double(tol) << ")\n";
        return pass ? kExitOk : kExitGateFailure;
      }
      return kExitOk;
    }

    if (*compare_cmd) {
      const FieldVariant a = read_field(in_path);
      const FieldVariant b = read_field(in_b_path);
      if (field_kind(a) != field_kind(b))
        throw InvalidInput(std::string("compare: kind mismatch (") +
                           field_kind_name(field_kind(a)) + " vs " +
                           field_kind_name(field_kind(b)) + ")");
      DiffNorms d;
      if (const auto* wa = std::get_if<WaveFn>(&a))
        d = diff_norms(*wa, std::get<WaveFn>(b));
      else if (const auto* pa = std::get_if<PhaseField>(&a))
        d = diff_norms(*pa, std::get<PhaseField>(b));
      else
        d = diff_norms(std::get<RealField>(a), std::get<RealField>(b));
      if (norms == "linf" || norms == "both")
        std::cout << "linf " << format_double(d.linf) << "\n";
      if (norms == "l2" || norms == "both") std::cout << "l2 " << format_double(d.l2) << "\n";
      if (tol > 0.0) {
        bool pass = true;
        if (norms == "linf" || norms == "both") pass = pass && d.linf <= tol;
        if (norms == "l2" || norms == "both") pass = pass && d.l2 <= tol;
        std::cout << (pass ? "PASS" : "FAIL") << " (tol " << format_double(tol) << ")\n";
        return pass ? kExitOk : kExitGateFailure;
      }
      return kExitOk;
    }

    if (*propagate_cmd) {
      ExperimentConfig cfg = load_experiment_config(config_path);
      prov.config_hash = cfg.hash;
      if (!rhs_override.empty()) cfg.rhs_kind = parse_rhs_kind(rhs_override);
      const PropagatorConfig pc = propagator_from_config(cfg);
      if (!(pc.t1 > 0.0)) throw InvalidInput("propagate: config has t1 = 0 (nothing to do)");

      if (cfg.rhs_kind == RhsKind::schrodinger_reference) {
        const WaveFn psi0 = in_path.empty() ? state_from_config(cfg, std::cerr)
                                            : read_wavefn(in_path, AxisKind::position);
        const TrajectoryRecord rec = propagate(psi0, pc);
        const WaveFn psi1 = wavefn_snapshot(rec, rec.snapshots.size() - 1, psi0.grid);
        write_field(psi1, out_path, prov);
        std::cout << "wrote " << out_path << " after " << rec.stats.accepted
                  << " accepted steps (" << rec.stats.rejected << " rejected)\n";
      } else {
        PhaseField rho0;
        if (in_path.empty()) {
          const WaveFn psi0 = state_from_config(cfg, std::cerr);
          rho0 = psi_to_qp(psi0, make_phase_grid(psi0.grid), Impl::fast);
        } else {
          rho0 = read_phase_field(in_path);
        }
        const TrajectoryRecord rec = propagate(rho0, pc);
        const PhaseField rho1 = phase_snapshot(rec, rec.snapshots.size() - 1, rho0.grid);
        write_field(rho1, out_path, prov);
        std::cout << "wrote " << out_path << " after " << rec.stats.accepted
                  << " accepted steps (" << rec.stats.rejected << " rejected)";
        if (rec.rest_energy_rate != 0.0)
          std::cout << "; rest-energy rotating frame, removed phase rate "
                    << format_double(rec.rest_energy_rate);
        std::cout << "\n";
      }
      return kExitOk;
    }

    if (*run_cmd) {
      const ExperimentConfig cfg = load_experiment_config(config_path);
      prov.config_hash = cfg.hash;
      const ExperimentReport report = run_experiment(cfg, out_path, prov, &std::cout);
      return report.all_pass() ? kExitOk : kExitGateFailure;
    }
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
