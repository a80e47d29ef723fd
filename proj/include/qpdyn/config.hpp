#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>

#include "qpdyn/dynamics.hpp"
#include "qpdyn/grid.hpp"
#include "qpdyn/states.hpp"

namespace qpdyn {

struct InitialTerm {
  Complex coeff{1.0, 0.0};
  double q0 = 0.0;
  double p0 = 0.0;
};

/// Parsed experiment description. The file format is flat INI-style
/// sections ([grid], [initial_state], [potential], [kinetic], [propagation],
/// [outputs], [gates]) with `key = value` entries and `#` comments.
struct ExperimentConfig {
  std::size_t n_q = 0;
  double q_min = 0.0;
  double q_max = 0.0;

  std::vector<InitialTerm> terms;

  PotentialSpec potential = PotentialSpec::free_particle();
  KineticSpec kinetic = KineticSpec::non_relativistic(1.0);

  double t1 = 0.0;  // 0 means static (no propagation)
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_init = 1e-3;
  double dt_max = std::numeric_limits<double>::infinity();
  double snapshot_stride = 0.5;
  RhsKind rhs_kind = RhsKind::phase_factorized;

  std::vector<std::string> outputs;  // representation names
  bool csv = false;

  // Tolerance gates checked by run-experiment; disabled when unset.
  std::optional<double> gate_roundtrip;
  std::optional<double> gate_trace;
  std::optional<double> gate_l2;
  std::optional<double> gate_trace_drift;
  std::optional<double> gate_energy_drift;
  std::optional<double> gate_ehrenfest;

  std::string raw_text;
  std::string hash;  // FNV-1a of raw_text
};

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

RhsKind parse_rhs_kind(const std::string& name);  // phase-direct|phase-fact|schrodinger-ref
const char* rhs_kind_name(RhsKind kind);

}  // namespace qpdyn
