#include "qpdyn/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "qpdyn/errors.hpp"
#include "qpdyn/parallel.hpp"

namespace qpdyn {

namespace {

struct SplitMix64 {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

void validate(const McConfig& cfg) {
  if (cfg.batch < 2) throw InvalidInput("McConfig: need batch >= 2");
  if (cfg.sample_count < cfg.batch)
    throw InvalidInput("McConfig: need sample_count >= batch");
}

struct SampleDist {
  std::vector<double> cum;  // cumulative |rho|
  double mass = 0.0;        // S = sum |rho| dq dp
};

SampleDist build_dist(const PhaseField& qp) {
  SampleDist d;
  d.cum.resize(qp.values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < qp.values.size(); ++i) {
    acc += std::abs(qp.values[i]);
    d.cum[i] = acc;
  }
  if (!(acc > 0.0)) throw InvalidInput("montecarlo: field is identically zero");
  d.mass = acc * qp.grid.q_axis.step * qp.grid.p_axis.step;
  return d;
}

std::size_t draw_cell(const SampleDist& d, SplitMix64& rng) {
  const double target = rng.uniform01() * d.cum.back();
  const auto it = std::upper_bound(d.cum.begin(), d.cum.end(), target);
  return std::min<std::size_t>(static_cast<std::size_t>(it - d.cum.begin()),
                               d.cum.size() - 1);
}

Complex unit_phase(Complex z) { return z / std::abs(z); }

// Batched estimate of the mean of `payload(rng)`; batches are independent
// streams combined in batch-index order so any schedule gives the same value.
McEstimate batched_estimate(const McConfig& cfg,
                            const std::function<Complex(SplitMix64&)>& payload) {
  const std::size_t per_batch = cfg.sample_count / cfg.batch;
  const std::size_t batches = cfg.batch;
  std::vector<Complex> means(batches);

  parallel_for_range(batches, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t b = lo; b < hi; ++b) {
      SplitMix64 rng{mc_stream_seed(cfg.seed, b)};
      Complex acc{0.0, 0.0};
      for (std::size_t s = 0; s < per_batch; ++s) acc += payload(rng);
      means[b] = acc / static_cast<double>(per_batch);
    }
  });

  Complex total{0.0, 0.0};
  for (const Complex& m : means) total += m;
  const Complex mean = total / static_cast<double>(batches);

  double var = 0.0;
  for (const Complex& m : means) var += std::norm(m - mean);
  const double stderror =
      std::sqrt(var / (static_cast<double>(batches) * (static_cast<double>(batches) - 1.0)));

  return McEstimate{mean, stderror, per_batch * batches, cfg.seed};
}

}  // namespace

std::uint64_t mc_stream_seed(std::uint64_t seed, std::uint64_t batch_index) {
  SplitMix64 mix{seed ^ (0xA076'1D64'78BD'642FULL * (batch_index + 1))};
  mix.next();
  return mix.next();
}

PhaseSampleSet sample_phase_points(const PhaseField& qp, const McConfig& cfg) {
  validate(cfg);
  const SampleDist dist = build_dist(qp);
  const std::size_t np = qp.grid.p_axis.n;

  PhaseSampleSet out;
  out.mass = dist.mass;
  out.cells.reserve(cfg.sample_count);
  SplitMix64 rng{mc_stream_seed(cfg.seed, 0)};
  for (std::size_t s = 0; s < cfg.sample_count; ++s) {
    const std::size_t cell = draw_cell(dist, rng);
    out.cells.emplace_back(static_cast<std::uint32_t>(cell / np),
                           static_cast<std::uint32_t>(cell % np));
  }
  return out;
}

Complex mc_identity_payload(const PhaseField& qp, std::size_t cell, double q, double p,
                            double mass) {
  const std::size_t np = qp.grid.p_axis.n;
  const double qc = qp.grid.q_axis.sample(cell / np);
  const double pc = qp.grid.p_axis.sample(cell % np);
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  return mass * inv4pi * unit_phase(qp.values[cell]) *
         std::polar(1.0, 0.5 * (q * pc - qc * p));
}

Complex mc_expectation_payload(const PhaseField& qp, std::size_t cell1, std::size_t cell2,
                               const ObservableSpec& obs, double mass) {
  const std::size_t np = qp.grid.p_axis.n;
  const std::size_t j1 = cell1 / np, l1 = cell1 % np;  // (q', p')
  const std::size_t j2 = cell2 / np, l2 = cell2 % np;  // (q'', p'')
  double o_mid = 0.0;
  if (obs.has_q()) o_mid += obs.q_mid_samples()[j1 + j2];
  if (obs.has_p()) o_mid += obs.p_mid_samples()[l1 + l2];
  const double q2p1 = qp.grid.q_axis.sample(j2) * qp.grid.p_axis.sample(l1);
  const double q1p2 = qp.grid.q_axis.sample(j1) * qp.grid.p_axis.sample(l2);
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  return mass * mass * inv4pi * std::conj(unit_phase(qp.values[cell2])) *
         unit_phase(qp.values[cell1]) * std::polar(1.0, 0.5 * (q2p1 - q1p2)) * o_mid;
}

McEstimate mc_identity_estimate(const PhaseField& qp, double q, double p, const McConfig& cfg) {
  validate(cfg);
  const SampleDist dist = build_dist(qp);
  return batched_estimate(cfg, [&](SplitMix64& rng) {
    const std::size_t cell = draw_cell(dist, rng);
    return mc_identity_payload(qp, cell, q, p, dist.mass);
  });
}

McEstimate mc_expectation_estimate(const PhaseField& qp, const ObservableSpec& obs,
                                   const McConfig& cfg) {
  validate(cfg);
  if (obs.has_q() && obs.q_axis() != qp.grid.q_axis)
    throw InvalidInput("mc_expectation_estimate: observable q axis does not match the field");
  if (obs.has_p() && obs.p_axis() != qp.grid.p_axis)
    throw InvalidInput("mc_expectation_estimate: observable p axis does not match the field");
  const SampleDist dist = build_dist(qp);
  return batched_estimate(cfg, [&](SplitMix64& rng) {
    const std::size_t c1 = draw_cell(dist, rng);
    const std::size_t c2 = draw_cell(dist, rng);
    return mc_expectation_payload(qp, c1, c2, obs, dist.mass);
  });
}

}  // namespace qpdyn
