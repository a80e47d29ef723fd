#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "qpdyn/config.hpp"
#include "qpdyn/field_io.hpp"

namespace qpdyn {

struct GateResult {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
};

struct ExperimentReport {
  std::vector<GateResult> gates;
  std::map<std::string, double> metrics;

  bool all_pass() const;
  std::string to_text() const;
};

/// End-to-end experiment: builds the initial state, maps it to phase space,
/// propagates with the configured engine alongside the Schrodinger
/// reference, emits the requested representations as field files (plus CSV),
/// and evaluates every configured tolerance gate. Artifacts land in out_dir;
/// the returned report is also written there as report.txt.
ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir,
                                const Provenance& base_prov = {}, std::ostream* log = nullptr);

}  // namespace qpdyn
