import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import Polynomial

from wignerflow.flow import (
    continuity_residual,
    diffusion_constant,
    divergence,
    flow_damp,
    flow_decomposition,
    flow_diff,
    flow_duffing,
    flow_harmonic,
    moyal_coefficients,
)
from wignerflow.fock import coherent_state, fock_state
from wignerflow.lindblad import SystemParams, integrate
from wignerflow.wigner import PhaseSpaceGrid, ScalarField, VectorField, wigner_transform

GRID = PhaseSpaceGrid.square(6.0, 241)  # dx = 0.05, nodes at integers
E1 = np.exp(-1) / np.pi
TAU = 2 * np.pi


@pytest.fixture(scope="module")
def vacuum():
    xx, pp = GRID.mesh()
    return ScalarField(GRID, np.exp(-xx**2 - pp**2) / np.pi)


def at(field, x, p):
    i, j = int(round((x - GRID.x_min) / GRID.dx)), int(round((p - GRID.p_min) / GRID.dp))
    return field.jx[i, j], field.jp[i, j]


def test_harmonic_flow_values(vacuum):
    j = flow_harmonic(vacuum)
    assert at(j, 0, 0) == (0, 0)
    np.testing.assert_allclose(at(j, 1, 0), (0, -E1), atol=1e-15)
    np.testing.assert_allclose(at(j, 0, 2), (2 * np.exp(-4) / np.pi, 0), atol=1e-15)
    assert at(j, 0, 2)[0] == pytest.approx(0.011660, abs=1e-6)


def test_duffing_reduces_to_harmonic(vacuum):
    j1 = flow_duffing(vacuum, SystemParams(), 0.3)
    j2 = flow_harmonic(vacuum)
    np.testing.assert_array_equal(j1.jx, j2.jx)
    np.testing.assert_array_equal(j1.jp, j2.jp)


def test_duffing_quantum_term(vacuum):
    j = flow_duffing(vacuum, SystemParams(lam=0.05), 0.0)
    assert at(j, 1, 0)[1] == pytest.approx(-1.075 * E1, abs=2e-7)
    assert at(j, 1, 0)[1] == pytest.approx(-0.12587, abs=5e-5)  # quoted value is rounded


def test_duffing_drive_term(vacuum):
    p = SystemParams(drive_amplitude=0.092, drive_frequency=1.09)
    j = flow_duffing(vacuum, p, 0.0)
    assert at(j, 0, 0)[1] == pytest.approx(0.092 / np.pi, abs=1e-12)
    assert at(j, 0, 0)[1] == pytest.approx(0.029285, abs=1e-6)


def test_lambda_zero_is_harmonic_plus_drive(vacuum):
    p = SystemParams(drive_amplitude=0.3, drive_frequency=1.2)
    j = flow_duffing(vacuum, p, 0.7)
    h = flow_harmonic(vacuum)
    np.testing.assert_allclose(j.jp, h.jp + p.drive(0.7) * vacuum.values, atol=1e-16)


def test_moyal_series_terminates_for_quartic():
    c0, c1 = moyal_coefficients(Polynomial([0, -0.1, 0.5, 0, 0.0125]))
    np.testing.assert_allclose(c0.coef, [0.1, -1, 0, -0.05])
    np.testing.assert_allclose(c1.coef, [0, 0.0125])
    with pytest.raises(ValueError):
        moyal_coefficients(Polynomial([0, 0, 0, 0, 0, 0, 1.0]))


def test_damping_flow(vacuum):
    assert flow_damp(vacuum, SystemParams()).jx.max() == 0
    j = flow_damp(vacuum, SystemParams(gamma=0.01))
    np.testing.assert_allclose(at(j, 1, 0), (-0.005 * E1, 0), atol=1e-15)
    xx, pp = GRID.mesh()
    assert np.all(xx * j.jx + pp * j.jp <= 0)


def test_diffusion_flow(vacuum):
    j = flow_diff(vacuum, SystemParams(gamma=0.01))
    assert at(j, 1, 0)[0] == pytest.approx(5.855e-4, abs=1e-7)
    assert at(j, 1, 0)[0] > 0
    uniform = ScalarField(GRID, np.full(GRID.shape, 0.3))
    np.testing.assert_allclose(flow_diff(uniform, SystemParams(gamma=0.01)).jx, 0, atol=1e-12)
    hot = flow_diff(vacuum, SystemParams(gamma=0.01, nbar=2))
    np.testing.assert_allclose(hot.jx, 5 * j.jx, rtol=1e-14)
    assert diffusion_constant(SystemParams(gamma=0.01, nbar=2)) == pytest.approx(0.0125)


def test_divergence():
    const = VectorField(GRID, np.full(GRID.shape, 2.0), np.full(GRID.shape, -1.0))
    np.testing.assert_allclose(divergence(const).values, 0, atol=1e-10)
    xx, pp = GRID.mesh()
    lin = VectorField(GRID, 0.7 * xx, 0.7 * pp)
    np.testing.assert_allclose(divergence(lin).values[2:-2, 2:-2], 1.4, atol=1e-10)


def test_stationary_vacuum_has_no_divergence(vacuum):
    d = divergence(flow_harmonic(vacuum)).values
    assert np.max(np.abs(d)) < 1e-6


@given(st.floats(0, 0.1), st.floats(0, 3), st.floats(0, 0.2), st.floats(0, 5))
def test_total_is_exact_sum(gamma, nbar, lam, t):
    w = wigner_transform(coherent_state(20, 0.5 + 0.3j), PhaseSpaceGrid.square(5.0, 64))
    f = flow_decomposition(w, SystemParams(lam=lam, drive_amplitude=0.1, drive_frequency=1.0, gamma=gamma, nbar=nbar), t)
    np.testing.assert_array_equal(f.j_total.jx, f.j_sys.jx + f.j_damp.jx + f.j_diff.jx)
    np.testing.assert_array_equal(f.j_total.jp, f.j_sys.jp + f.j_damp.jp + f.j_diff.jp)
    with pytest.raises(KeyError):
        f.view("bogus")


def test_rotational_sense_harmonic():
    g = PhaseSpaceGrid()
    w = wigner_transform(fock_state(40, 2), g)
    j = flow_decomposition(w, SystemParams(gamma=0.01), 0.0).j_sys
    xx, pp = g.mesh()
    cross = xx * j.jp - pp * j.jx
    pos = w.values > 0.05 * w.values.max()
    neg = w.values < -0.05 * np.abs(w.values).max()
    assert np.all(cross[pos] <= 0)
    assert np.all(cross[neg] >= 0)


def test_continuity_residual_stationary_vacuum():
    traj = integrate(fock_state(10, 0), SystemParams(gamma=0.01), 0.2, 0.01, [0.0, 0.1, 0.2])
    assert continuity_residual(traj, PhaseSpaceGrid(), 1) <= 1e-6
    with pytest.raises(IndexError):
        continuity_residual(traj, PhaseSpaceGrid(), 0)


def test_continuity_residual_damped_coherent():
    dt = TAU / 500
    t = 10 * TAU
    delta = TAU / 100
    traj = integrate(coherent_state(40, 1.5 + 0.5j), SystemParams(gamma=0.01), t + delta, dt, [t - delta, t, t + delta])
    r = continuity_residual(traj, PhaseSpaceGrid(), 1)
    assert r <= 0.02
    fine = integrate(coherent_state(40, 1.5 + 0.5j), SystemParams(gamma=0.01), t + delta, dt / 2, [t - delta / 2, t, t + delta / 2])
    assert continuity_residual(fine, PhaseSpaceGrid().refined(2), 1) < r


def test_continuity_residual_rejects_asymmetric():
    traj = integrate(fock_state(10, 1), SystemParams(gamma=0.01), 1.0, 0.01, [0.0, 0.2, 1.0])
    with pytest.raises(ValueError):
        continuity_residual(traj, PhaseSpaceGrid(), 1)
