import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from wignerflow.fock import DensityMatrix, annihilation, coherent_state, fock_state, thermal_state
from wignerflow.lindblad import (
    LindbladGenerator,
    MissingSnapshotError,
    SystemParams,
    TruncationError,
    hamiltonian,
    integrate,
    lindblad_rhs,
    steady_state_check,
    thermal_occupation,
)

from oracles import duffing_hamiltonian_literal, lindblad_literal

TAU = 2 * np.pi
DUFFING = dict(lam=0.05, drive_amplitude=0.092, drive_frequency=1.09, gamma=0.01)


def random_density(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return DensityMatrix(rho / np.trace(rho))


def test_params_validation():
    with pytest.raises(ValueError):
        SystemParams(gamma=-0.1)
    with pytest.raises(ValueError):
        SystemParams(nbar=-1)
    with pytest.raises(ValueError):
        SystemParams(drive_amplitude=0.1, drive_frequency=0)


def test_thermal_occupation():
    assert thermal_occupation(0) == 0
    assert thermal_occupation(2) == pytest.approx(1 / (np.exp(0.5) - 1))
    assert thermal_occupation(2) == pytest.approx(1.5415, abs=1e-4)


def test_harmonic_hamiltonian_diagonal():
    np.testing.assert_allclose(hamiltonian(5, SystemParams(), 0.0), np.diag(np.arange(5) + 0.5))


def test_quartic_vacuum_energy():
    h = hamiltonian(20, SystemParams(lam=0.05), 1.3)
    assert h[0, 0].real == pytest.approx(0.509375, abs=1e-14)


def test_drive_term():
    p = SystemParams(drive_amplitude=0.092, drive_frequency=1.09)
    a = annihilation(10)
    x = (a + a.conj().T) / np.sqrt(2)
    np.testing.assert_allclose(hamiltonian(10, p, 0.0) - hamiltonian(10, SystemParams(), 0.0), -0.092 * x)


@pytest.mark.parametrize("t", [0.0, 0.7, 3.1])
def test_hamiltonian_matches_literal(t):
    p = SystemParams(**DUFFING)
    ref = duffing_hamiltonian_literal(15, p.lam, p.drive_amplitude, p.drive_frequency, t)
    np.testing.assert_allclose(hamiltonian(15, p, t), ref, atol=1e-12)


@pytest.mark.parametrize("nbar", [0.0, 1.5415])
def test_rhs_matches_literal_master_equation(nbar):
    p = SystemParams(**DUFFING, nbar=nbar)
    rho = random_density(14, 3)
    for t in (0.0, 2.2):
        h = hamiltonian(14, p, t)
        ref = lindblad_literal(rho.entries, h, p.gamma, p.nbar, 14)
        np.testing.assert_allclose(lindblad_rhs(rho, p, t), ref, atol=1e-12)


def test_rhs_vacuum_fixed_point():
    np.testing.assert_allclose(lindblad_rhs(fock_state(8, 0), SystemParams(gamma=0.01), 0.0), 0, atol=1e-15)


def test_rhs_rate_equations():
    d = lindblad_rhs(fock_state(6, 1), SystemParams(gamma=0.01), 0.0)
    assert d[1, 1].real == pytest.approx(-0.01)
    assert d[0, 0].real == pytest.approx(0.01)


@given(st.integers(0, 10_000), st.floats(0, 3), st.floats(0, 0.2), st.floats(0, 10))
def test_rhs_hermitian_and_traceless(seed, nbar, gamma, t):
    p = SystemParams(lam=0.05, drive_amplitude=0.1, drive_frequency=1.1, gamma=gamma, nbar=nbar)
    d = lindblad_rhs(random_density(10, seed), p, t)
    assert abs(np.trace(d)) < 1e-12
    np.testing.assert_allclose(d, d.conj().T, atol=1e-12)


def test_thermal_state_is_fixed_point():
    nbar = thermal_occupation(2.0)
    d = lindblad_rhs(thermal_state(40, nbar), SystemParams(gamma=0.01, nbar=nbar), 0.0)
    assert np.linalg.norm(d) <= 1e-10


def test_vacuum_stays_vacuum():
    traj = integrate(fock_state(10, 0), SystemParams(gamma=0.01), 20.0, 0.05, [0, 10, 20])
    for s in traj.states:
        np.testing.assert_allclose(s.entries, fock_state(10, 0).entries, atol=1e-14)


def test_fock_one_decay():
    traj = integrate(fock_state(6, 1), SystemParams(gamma=0.01), 100.0, TAU / 500, [100.0])
    # the snapshot sits on the step nearest t = 100 and is compared at that time
    assert abs(traj.times[-1] - 100.0) <= TAU / 1000
    assert abs(traj.states[-1].entries[1, 1].real - np.exp(-0.01 * traj.times[-1])) < 1e-5


def test_damped_coherent_mean_field():
    traj = integrate(coherent_state(30, 1.0), SystemParams(gamma=0.01), TAU, TAU / 500, [TAU])
    mean = traj.states[-1].expect(annihilation(30))
    assert abs(mean - np.exp(-2j * np.pi) * np.exp(-0.01 * np.pi)) < 1e-5


def test_integration_matches_scipy():
    dim = 12
    p = SystemParams(**DUFFING, nbar=0.3)
    rho0 = coherent_state(dim, 0.6 + 0.2j)
    gen = LindbladGenerator(dim, p)

    def f(t, y):
        return gen(t, y.reshape(dim, dim)).ravel()

    ref = solve_ivp(f, (0, 5.0), rho0.entries.ravel(), rtol=1e-11, atol=1e-13, method="DOP853").y[:, -1]
    traj = integrate(rho0, p, 5.0, 0.0025, [5.0])
    np.testing.assert_allclose(traj.states[-1].entries, ref.reshape(dim, dim), atol=1e-9)


def test_rk4_convergence_order():
    p = SystemParams(gamma=0.05, drive_amplitude=0.1, drive_frequency=1.09)
    rho0 = coherent_state(16, 1.0)
    t_final = TAU
    h = TAU / 60

    def final(dt):
        return integrate(rho0, p, t_final, dt, [t_final]).states[-1].entries

    ref = final(h / 4)
    e1 = np.max(np.abs(final(h) - ref))
    e2 = np.max(np.abs(final(h / 2) - ref))
    assert e1 / e2 >= 12


def test_snapshots_land_on_grid():
    traj = integrate(fock_state(5, 0), SystemParams(), 1.0, 0.1, [0.0, 0.26, 1.0])
    np.testing.assert_allclose(traj.times, [0.0, 0.3, 1.0])
    with pytest.raises(ValueError):
        integrate(fock_state(5, 0), SystemParams(), 1.0, 0.1, [0.3, 0.31])
    with pytest.raises(ValueError):
        integrate(fock_state(5, 0), SystemParams(), 1.0, 0.1, [1.5])


def test_truncation_error_on_top_level():
    # a coherent state pushed by a strong resonant drive into a tiny space
    p = SystemParams(drive_amplitude=1.0, drive_frequency=1.0)
    with pytest.raises(TruncationError) as err:
        integrate(fock_state(8, 0), p, 30.0, 0.01, [30.0])
    assert err.value.diagnostic == "top_level_occupancy"


def test_unstable_step_rejected():
    with pytest.raises(ValueError, match="unstable"):
        integrate(fock_state(60, 0), SystemParams(lam=0.2), 1.0, 0.01, [1.0])


def test_purity_non_increasing_from_fock():
    times = np.linspace(0, 60, 31)
    traj = integrate(fock_state(10, 3), SystemParams(gamma=0.05), 60.0, 0.02, times)
    purity = [s.purity() for s in traj.states]
    assert np.all(np.diff(purity)[: np.argmin(purity)] <= 1e-12)


def test_trace_drift_tracked():
    traj = integrate(coherent_state(40, 1.5), SystemParams(**DUFFING), 20.0, 0.005, [20.0])
    assert traj.max_trace_drift <= 1e-6
    assert traj.max_top_occupancy < 1e-8


def test_steady_state_check():
    traj = integrate(fock_state(8, 0), SystemParams(gamma=0.01), 2 * TAU, TAU / 100, [TAU, 2 * TAU])
    ok, d = steady_state_check(traj, TAU, 1e-12)
    assert ok and d == 0
    with pytest.raises(MissingSnapshotError):
        steady_state_check(traj, 0.5 * TAU, 1e-3)


def test_cat_not_steady_early():
    from wignerflow.fock import cat_state

    traj = integrate(cat_state(40, 6.0), SystemParams(gamma=0.01), 2 * TAU, TAU / 500, [TAU, 2 * TAU])
    ok, d = steady_state_check(traj, TAU, 1e-3)
    assert not ok and d > 1e-3


@pytest.mark.slow
def test_fock_two_steady_after_hundred_periods():
    traj = integrate(fock_state(40, 2), SystemParams(gamma=0.01), 101 * TAU, TAU / 500, [100 * TAU, 101 * TAU])
    ok, d = steady_state_check(traj, TAU, 1e-3)
    assert ok, d
