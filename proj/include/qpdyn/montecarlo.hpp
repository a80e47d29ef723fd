#pragma once

#include <cstdint>
#include <utility>

#include "qpdyn/grid.hpp"
#include "qpdyn/observables.hpp"

namespace qpdyn {

/// Desk-scale stochastic estimators importance-sampling |rho(q,p)| over grid
/// cells. The deterministic quadrature on the same grid is the quantity being
/// estimated, so unbiasedness is exactly testable by cell enumeration.
struct McConfig {
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
  std::size_t batch = 50;  // number of batches for batch-means error bars
};

struct McEstimate {
  Complex value{0.0, 0.0};
  double stderror = 0.0;  // batch-means standard error (combined re/im)
  std::size_t sample_count = 0;
  std::uint64_t seed = 0;
};

struct PhaseSampleSet {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;  // (iq, ip)
  double mass = 0.0;  // S = sum |rho| dq dp
};

/// Counter-based per-batch stream: batch b of a run seeded with s draws from
/// an independent SplitMix64 sequence, so any thread schedule reproduces the
/// same estimates.
std::uint64_t mc_stream_seed(std::uint64_t seed, std::uint64_t batch_index);

/// Draws grid cells with probability |rho| / sum|rho|; deterministic for a
/// fixed seed. Throws InvalidInput on an identically zero field.
PhaseSampleSet sample_phase_points(const PhaseField& qp, const McConfig& cfg);

/// Single-sample estimator payloads (the algebra shared by the sampler and
/// the enumeration tests). `mass` is S from the sample set.
Complex mc_identity_payload(const PhaseField& qp, std::size_t cell, double q, double p,
                            double mass);
Complex mc_expectation_payload(const PhaseField& qp, std::size_t cell1, std::size_t cell2,
                               const ObservableSpec& obs, double mass);

/// Monte-Carlo estimate of the phase-space identity transform at (q, p):
/// mean over samples of S (4 pi)^(-1) phase(rho(q',p')) e^{i(q p' - q' p)/2};
/// unbiased for the deterministic quadrature of the identity map.
McEstimate mc_identity_estimate(const PhaseField& qp, double q, double p, const McConfig& cfg);

/// Monte-Carlo estimate of the mean value: draws independent cell pairs from
/// |rho| and averages S^2 (4 pi)^(-1) conj(phase(rho'')) phase(rho')
/// e^{i(q'' p' - q' p'')/2} O(midpoints).
McEstimate mc_expectation_estimate(const PhaseField& qp, const ObservableSpec& obs,
                                   const McConfig& cfg);

}  // namespace qpdyn
