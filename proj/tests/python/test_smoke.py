"""Smoke tests for the python bindings."""

import math

import numpy as np
import pytest

import qpdyn


@pytest.fixture()
def grid():
    return qpdyn.make_position_grid(64, -8.0, 8.0)


def test_grid_and_conjugate(grid):
    assert grid.n == 64
    assert grid.step == pytest.approx(0.25)
    p = qpdyn.conjugate_momentum_grid(grid)
    assert p.step == pytest.approx(2 * math.pi / 16.0)
    assert p.origin == pytest.approx(-math.pi / 0.25)
    samples = grid.samples()
    assert samples.shape == (64,)
    assert samples[0] == -8.0


def test_values_views_match_analytic_profile(grid):
    # guards the array views themselves: values must vary across the grid
    # and equal the sampled closed form, not just round-trip consistently
    psi, _ = qpdyn.coherent_state(grid, 1.0, -1.0)
    q = grid.samples()
    expected = np.pi**-0.25 * np.exp(1j * -1.0 * (q - 1.0) - (q - 1.0) ** 2 / 2)
    assert np.max(np.abs(psi.values - expected)) < 1e-14
    assert np.std(q) > 0


def test_coherent_state_and_roundtrip(grid):
    psi, diag = qpdyn.coherent_state(grid, 1.0, -1.0)
    assert not diag.truncated
    assert qpdyn.quadrature_norm(psi) == pytest.approx(1.0, abs=1e-12)
    assert np.sum(np.abs(psi.values) ** 2) * grid.step == pytest.approx(1.0, abs=1e-12)

    pg = qpdyn.make_phase_grid(grid)
    rho = qpdyn.psi_to_qp(psi, pg)
    assert rho.values.shape == (64, 64)
    back = qpdyn.qp_to_psi_q(rho)
    assert np.max(np.abs(back.values - psi.values)) < 1e-10

    assert qpdyn.trace_norm(rho) == pytest.approx(1.0, abs=1e-8)
    h = qpdyn.husimi(rho)
    assert h.values.min() >= 0.0
    assert h.values.max() == pytest.approx(1 / (2 * math.pi), rel=0.02)


def test_truncation_diagnostic():
    g = qpdyn.make_position_grid(256, -2.0, 50.0)
    _, diag = qpdyn.coherent_state(g, -7.0, -0.5)
    assert diag.truncated


def test_expectations(grid):
    psi, _ = qpdyn.coherent_state(grid, 1.0, -1.0)
    pg = qpdyn.make_phase_grid(grid)
    rho = qpdyn.psi_to_qp(psi, pg)
    oq = qpdyn.ObservableSpec.position(pg.q_axis)
    op = qpdyn.ObservableSpec.momentum(pg.p_axis)
    assert qpdyn.expectation_reduced(rho, oq) == pytest.approx(1.0, abs=1e-9)
    assert qpdyn.expectation_direct(rho, op) == pytest.approx(-1.0, abs=1e-8)
    h = qpdyn.ObservableSpec.hamiltonian(
        pg, qpdyn.KineticSpec.non_relativistic(1.0), qpdyn.PotentialSpec.harmonic(1.0, 1.0)
    )
    assert qpdyn.expectation_direct(rho, h) == pytest.approx(1.5, abs=1e-8)


def test_short_propagation(grid):
    psi, _ = qpdyn.coherent_state(grid, 1.0, 0.0)
    pg = qpdyn.make_phase_grid(grid)
    rho0 = qpdyn.psi_to_qp(psi, pg)

    cfg = qpdyn.PropagatorConfig()
    cfg.t1 = 0.2
    cfg.rtol = 1e-8
    cfg.atol = 1e-12
    cfg.potential = qpdyn.PotentialSpec.harmonic(1.0, 1.0)
    cfg.kinetic = qpdyn.KineticSpec.non_relativistic(1.0)
    cfg.rhs_kind = qpdyn.RhsKind.phase_factorized
    rec = qpdyn.propagate_phase(rho0, cfg)
    assert rec.stats.accepted > 0
    rho1 = rec.phase_snapshot(len(rec) - 1, pg)
    assert qpdyn.trace_norm(rho1) == pytest.approx(1.0, abs=1e-7)

    ref = qpdyn.PropagatorConfig()
    ref.t1 = 0.2
    ref.rtol = 1e-8
    ref.atol = 1e-12
    ref.potential = cfg.potential
    ref.kinetic = cfg.kinetic
    ref.rhs_kind = qpdyn.RhsKind.schrodinger_reference
    rec_ref = qpdyn.propagate_wavefn(psi, ref)
    psi_ref = rec_ref.wavefn_snapshot(len(rec_ref) - 1, grid)
    psi_phase = qpdyn.qp_to_psi_q(rho1)
    assert np.max(np.abs(psi_phase.values - psi_ref.values)) < 1e-7


def test_monte_carlo(grid):
    psi, _ = qpdyn.coherent_state(grid, 1.0, -1.0)
    pg = qpdyn.make_phase_grid(grid)
    rho = qpdyn.psi_to_qp(psi, pg)
    cfg = qpdyn.McConfig()
    cfg.sample_count = 20000
    cfg.seed = 11
    est = qpdyn.mc_expectation_estimate(rho, qpdyn.ObservableSpec.identity(pg.q_axis), cfg)
    assert abs(est.value - 1.0) <= 3.0 * est.stderror

    est2 = qpdyn.mc_expectation_estimate(rho, qpdyn.ObservableSpec.identity(pg.q_axis), cfg)
    assert est.value == est2.value  # identical seed, bit-identical result


def test_field_io_roundtrip(tmp_path, grid):
    psi, _ = qpdyn.coherent_state(grid, 0.5, 0.5)
    path = str(tmp_path / "psi.fld")
    qpdyn.write_field(psi, path)
    back = qpdyn.read_field(path)
    assert np.array_equal(back.values, psi.values)


def test_errors_map_to_python(grid):
    with pytest.raises(ValueError):
        qpdyn.make_position_grid(1, 0.0, 1.0)
    with pytest.raises(ValueError):
        qpdyn.PotentialSpec.morse(1.0, -0.1, 0.77, 4.0)
