#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>

#include "qpdyn/errors.hpp"
#include "qpdyn/montecarlo.hpp"
#include "qpdyn/transforms.hpp"
#include "test_helpers.hpp"

using namespace qpdyn;
using namespace qpdyn::testing;

TEST_SUITE_BEGIN("montecarlo");

namespace {

// Deterministic identity-map quadrature at an arbitrary target point;
// independent of the estimator implementation.
Complex identity_quadrature(const PhaseField& qp, double q, double p) {
  Complex s{0.0, 0.0};
  for (std::size_t m = 0; m < qp.grid.q_axis.n; ++m)
    for (std::size_t k = 0; k < qp.grid.p_axis.n; ++k) {
      const double qm = qp.grid.q_axis.sample(m), pk = qp.grid.p_axis.sample(k);
      s += qp.at(m, k) * std::polar(1.0, 0.5 * (q * pk - qm * p));
    }
  return s * qp.grid.q_axis.step * qp.grid.p_axis.step / (4.0 * std::numbers::pi);
}

PhaseField coherent_field(const PhaseGrid& pg, double q0, double p0) {
  return psi_to_qp(coherent_state(pg.q_axis, {q0, p0}), pg);
}

}  // namespace

TEST_CASE("sampler frequencies follow |rho| (uniform four-cell field)") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(2, 0.0, 2.0));
  PhaseField f = make_phase_field(pg);
  f.values = {Complex{1, 0}, Complex{0, 1}, Complex{-1, 0}, Complex{0.6, 0.8}};

  McConfig cfg;
  cfg.sample_count = 100000;
  cfg.seed = 12345;
  const PhaseSampleSet s = sample_phase_points(f, cfg);
  CHECK(s.cells.size() == cfg.sample_count);

  std::map<std::pair<std::uint32_t, std::uint32_t>, double> counts;
  for (const auto& c : s.cells) counts[c] += 1.0;
  REQUIRE(counts.size() == 4);
  double chi2 = 0.0;
  const double expect = cfg.sample_count / 4.0;
  for (const auto& [cell, n] : counts) chi2 += (n - expect) * (n - expect) / expect;
  CHECK(chi2 < 16.27);  // chi-squared df=3, p = 0.001
}

TEST_CASE("single nonzero cell takes every sample") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(8, -4.0, 4.0));
  PhaseField f = make_phase_field(pg);
  f.at(5, 2) = Complex{0.3, -0.4};
  McConfig cfg;
  cfg.sample_count = 1000;
  cfg.seed = 9;
  cfg.batch = 10;
  const PhaseSampleSet s = sample_phase_points(f, cfg);
  for (const auto& [iq, ip] : s.cells) {
    CHECK(iq == 5);
    CHECK(ip == 2);
  }
  // exact recovery of the deterministic quadrature; every sample carries the
  // same payload, so the spread is pure rounding
  const double q = pg.q_axis.sample(5), p = pg.p_axis.sample(2);
  const McEstimate e = mc_identity_estimate(f, q, p, cfg);
  CHECK(e.stderror < 1e-15);
  CHECK(std::abs(e.value - identity_quadrature(f, q, p)) < 1e-15);
}

TEST_CASE("sample mean of q matches the Husimi-amplitude marginal") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(64, -8.0, 8.0));
  const PhaseField rho = coherent_field(pg, 1.0, -1.0);
  McConfig cfg;
  cfg.sample_count = 100000;
  cfg.seed = 101;
  const PhaseSampleSet s = sample_phase_points(rho, cfg);
  double mean_q = 0.0;
  for (const auto& [iq, ip] : s.cells) mean_q += pg.q_axis.sample(iq);
  mean_q /= static_cast<double>(s.cells.size());
  // |rho| has q marginal of width sqrt(2)
  const double sigma = std::sqrt(2.0);
  CHECK(std::abs(mean_q - 1.0) < 3.0 * sigma / std::sqrt(100000.0));
}

TEST_CASE("zero field cannot be sampled") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(4, 0.0, 4.0));
  const PhaseField zero = make_phase_field(pg);
  McConfig cfg;
  cfg.sample_count = 100;
  CHECK_THROWS_AS(sample_phase_points(zero, cfg), InvalidInput);
  CHECK_THROWS_AS(mc_identity_estimate(zero, 0.0, 0.0, cfg), InvalidInput);
}

TEST_CASE("config validation") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(4, 0.0, 4.0));
  const PhaseField rho = coherent_field(pg, 2.0, 0.0);
  McConfig bad;
  bad.sample_count = 10;
  bad.batch = 20;
  CHECK_THROWS_AS(sample_phase_points(rho, bad), InvalidInput);
  bad.sample_count = 10;
  bad.batch = 1;
  CHECK_THROWS_AS(sample_phase_points(rho, bad), InvalidInput);
}

TEST_CASE("identity estimate brackets the quadrature value") {
  const PhaseGrid pg = make_phase_grid(figure_grid());
  const PhaseField rho = coherent_field(pg, 4.0, -2.0);
  McConfig cfg;
  cfg.sample_count = 100000;
  cfg.seed = 7;
  // at the state's own center the sample phases align and the estimate is
  // nearly deterministic
  const McEstimate center = mc_identity_estimate(rho, 4.0, -2.0, cfg);
  const Complex center_oracle = identity_quadrature(rho, 4.0, -2.0);
  CHECK(std::abs(center.value - center_oracle) < 1e-9);
  CHECK(std::abs(center_oracle - coherent_qp_oracle(4.0, -2.0, 4.0, -2.0)) < 1e-10);

  // off-center targets have genuinely random phases; the batch-means error
  // bar must bracket the deterministic value
  const McEstimate off = mc_identity_estimate(rho, 5.3, -1.2, cfg);
  const Complex off_oracle = identity_quadrature(rho, 5.3, -1.2);
  CHECK(off.stderror > 0.0);
  CHECK(std::abs(off.value - off_oracle) <= 3.0 * off.stderror);
}

TEST_CASE("identical seeds reproduce estimates bit for bit") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(32, -8.0, 8.0));
  const PhaseField rho = coherent_field(pg, 0.5, 1.0);
  McConfig cfg;
  cfg.sample_count = 5000;
  cfg.seed = 77;
  const McEstimate a = mc_identity_estimate(rho, 0.5, 1.0, cfg);
  const McEstimate b = mc_identity_estimate(rho, 0.5, 1.0, cfg);
  CHECK(a.value.real() == b.value.real());
  CHECK(a.value.imag() == b.value.imag());
  CHECK(a.stderror == b.stderror);
  McConfig other = cfg;
  other.seed = 78;
  const McEstimate c = mc_identity_estimate(rho, 0.5, 1.0, other);
  CHECK(a.value != c.value);
}

TEST_CASE("standard error halves when the sample count quadruples") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(32, -8.0, 8.0));
  const PhaseField rho = coherent_field(pg, 0.5, 1.0);
  double ratio_sum = 0.0;
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    McConfig small;
    small.sample_count = 20000;
    small.seed = 1000 + rep;
    McConfig big = small;
    big.sample_count = 80000;
    const double rs = mc_identity_estimate(rho, 1.8, 0.2, small).stderror;
    const double rb = mc_identity_estimate(rho, 1.8, 0.2, big).stderror;
    ratio_sum += rs / rb;
  }
  const double mean_ratio = ratio_sum / 10.0;
  CHECK(mean_ratio > 1.6);
  CHECK(mean_ratio < 2.4);
}

TEST_CASE("stderr scales like M^(-1/2)") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(32, -8.0, 8.0));
  const PhaseField rho = coherent_field(pg, 0.5, 1.0);
  std::vector<double> log_m, log_err;
  for (const std::size_t m : {1000u, 10000u, 100000u}) {
    McConfig cfg;
    cfg.sample_count = m;
    cfg.seed = 5;
    log_m.push_back(std::log(static_cast<double>(m)));
    log_err.push_back(std::log(mc_identity_estimate(rho, 1.8, 0.2, cfg).stderror));
  }
  // least-squares slope over the three points
  const double mx = (log_m[0] + log_m[1] + log_m[2]) / 3.0;
  const double my = (log_err[0] + log_err[1] + log_err[2]) / 3.0;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 3; ++i) {
    num += (log_m[i] - mx) * (log_err[i] - my);
    den += (log_m[i] - mx) * (log_m[i] - mx);
  }
  const double slope = num / den;
  CHECK(slope > -0.6);
  CHECK(slope < -0.4);
}

TEST_CASE("estimators are unbiased by full enumeration") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(16, -6.0, 6.0));
  const PhaseField rho = coherent_field(pg, 0.5, 0.5);
  const std::size_t cells = rho.values.size();

  double total_abs = 0.0;
  for (const Complex& v : rho.values) total_abs += std::abs(v);
  const double mass = total_abs * pg.q_axis.step * pg.p_axis.step;

  SUBCASE("identity estimator") {
    const double q = 0.7, p = -0.3;
    Complex expectation{0.0, 0.0};
    for (std::size_t c = 0; c < cells; ++c) {
      const double w = std::abs(rho.values[c]) / total_abs;
      if (w > 0.0) expectation += w * mc_identity_payload(rho, c, q, p, mass);
    }
    const Complex quadrature = identity_quadrature(rho, q, p);
    CHECK(std::abs(expectation - quadrature) < 1e-12);
  }

  SUBCASE("mean-value estimator") {
    const ObservableSpec obs = ObservableSpec::position(pg.q_axis);
    Complex expectation{0.0, 0.0};
    for (std::size_t c1 = 0; c1 < cells; ++c1) {
      const double w1 = std::abs(rho.values[c1]) / total_abs;
      if (w1 == 0.0) continue;
      for (std::size_t c2 = 0; c2 < cells; ++c2) {
        const double w2 = std::abs(rho.values[c2]) / total_abs;
        if (w2 == 0.0) continue;
        expectation += w1 * w2 * mc_expectation_payload(rho, c1, c2, obs, mass);
      }
    }
    // independent deterministic value: the literal quadruple sum
    Complex literal{0.0, 0.0};
    const std::size_t n = pg.q_axis.n;
    for (std::size_t j2 = 0; j2 < n; ++j2)
      for (std::size_t l2 = 0; l2 < n; ++l2)
        for (std::size_t j1 = 0; j1 < n; ++j1)
          for (std::size_t l1 = 0; l1 < n; ++l1) {
            const double o = obs.q_mid_samples()[j1 + j2];
            const double phase =
                0.5 * (pg.q_axis.sample(j2) * pg.p_axis.sample(l1) -
                       pg.q_axis.sample(j1) * pg.p_axis.sample(l2));
            literal += std::conj(rho.at(j2, l2)) * o * rho.at(j1, l1) * std::polar(1.0, phase);
          }
    literal *= pg.q_axis.step * pg.q_axis.step * pg.p_axis.step * pg.p_axis.step /
               (4.0 * std::numbers::pi);
    CHECK(std::abs(expectation - literal) < 1e-12);
  }
}

TEST_CASE("mean-value estimates bracket the analytic oracles") {
  const PhaseGrid pg = make_phase_grid(make_position_grid(64, -8.0, 8.0));
  McConfig cfg;
  cfg.sample_count = 100000;
  cfg.seed = 33;

  const PhaseField rho = coherent_field(pg, 4.0, -2.0);
  {
    const McEstimate e = mc_expectation_estimate(rho, ObservableSpec::identity(pg.q_axis), cfg);
    CHECK(std::abs(e.value - Complex{1.0, 0.0}) <= 3.0 * e.stderror);
  }
  {
    const McEstimate e = mc_expectation_estimate(rho, ObservableSpec::position(pg.q_axis), cfg);
    CHECK(std::abs(e.value - Complex{4.0, 0.0}) <= 3.0 * e.stderror);
  }
  {
    const PhaseField rho11 = coherent_field(pg, 1.0, 1.0);
    const ObservableSpec h = ObservableSpec::hamiltonian(pg, KineticSpec::non_relativistic(1.0),
                                                         PotentialSpec::harmonic(1.0, 1.0));
    const McEstimate e = mc_expectation_estimate(rho11, h, cfg);
    CHECK(std::abs(e.value - Complex{1.5, 0.0}) <= 3.0 * e.stderror);
  }
}

TEST_SUITE_END();
