import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wignerflow.classical import (
    ClassicalState,
    amplitude_scan,
    classical_rhs,
    cluster,
    initial_basket,
    lorentzian_amplitude,
    mechanical_energy,
    steady_amplitudes,
)
from wignerflow.integrators import rk4_step
from wignerflow.lindblad import SystemParams

PRESET = SystemParams(lam=0.05, drive_amplitude=0.092, drive_frequency=1.09, gamma=0.01)


def test_rhs_examples():
    assert classical_rhs(ClassicalState(0, 0, 3.0), SystemParams(lam=0.05, gamma=0.01)) == (0, 0)
    assert classical_rhs(ClassicalState(1, 0), SystemParams(lam=0.05))[1] == pytest.approx(-1.05)
    assert classical_rhs(ClassicalState(0, 0, 0), PRESET)[1] == pytest.approx(0.092)
    with pytest.raises(ValueError):
        classical_rhs(ClassicalState(0, 0), PRESET, convention="viscous")


def test_basket_shape():
    b = initial_basket()
    assert b.shape == (2, 16)
    r = np.hypot(*b)
    assert r[0] == 0 and r[-1] == pytest.approx(4.0)


def test_cluster():
    assert cluster([0.51, 0.52, 2.45, 2.46, 2.455]) == pytest.approx([0.515, 2.455])
    assert cluster([]) == []


def test_preset_bistability():
    amps = steady_amplitudes(PRESET)
    assert len(amps) == 2
    assert amps[0] == pytest.approx(0.52, rel=0.02)
    assert amps[1] == pytest.approx(2.46, rel=0.02)


def test_friction_convention_gives_same_branches():
    amps = steady_amplitudes(PRESET, convention="friction")
    assert amps == pytest.approx([0.52, 2.46], rel=0.02)


def test_each_branch_reached():
    scan = amplitude_scan(PRESET)
    assert scan.converged.all()
    small = np.abs(scan.amplitudes - 0.52) < 0.05
    assert small.any() and (~small).any()


def test_undriven_decays_to_rest():
    p = SystemParams(lam=0.05, gamma=0.05)
    amps = steady_amplitudes(p, periods=400)
    assert amps == pytest.approx([0.0], abs=0.02)


@pytest.mark.parametrize("convention", ["flow", "friction"])
def test_linear_response(convention):
    p = SystemParams(drive_amplitude=0.01, drive_frequency=1.2, gamma=0.1)
    amps = steady_amplitudes(p, convention=convention, periods=300)
    assert len(amps) == 1
    assert amps[0] == pytest.approx(lorentzian_amplitude(p, convention), rel=0.02)
    if convention == "friction":
        assert amps[0] == pytest.approx(0.01 / np.hypot(1 - 1.44, 0.12), rel=0.02)


def test_steady_amplitudes_need_damping():
    with pytest.raises(ValueError):
        steady_amplitudes(SystemParams(lam=0.05, drive_amplitude=0.1, drive_frequency=1.0))


def test_nonconvergence_warns():
    with pytest.warns(RuntimeWarning):
        amplitude_scan(PRESET, periods=20)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_energy_decreases_without_drive(x, p):
    params = SystemParams(lam=0.05, gamma=0.05)
    y = np.array([[x], [p]])
    e0 = mechanical_energy(x, p, params)

    def f(t, y):
        return np.array(classical_rhs((y[0], y[1], t), params))

    energies = [e0]
    for k in range(50):
        y = rk4_step(f, 0.05 * k, y, 0.05)
        energies.append(mechanical_energy(y[0, 0], y[1, 0], params))
    if e0 > 1e-9:
        assert np.all(np.diff(energies) < 0)
