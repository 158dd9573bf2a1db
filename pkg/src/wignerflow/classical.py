"""Deterministic classical Duffing dynamics, used as the bistability reference.

Two damping conventions are available:

``"flow"``      x' = p - (gamma/2) x,   p' = -x - lam x^3 + F cos(wt) - (gamma/2) p
                (the W-independent drift of the damping and system Wigner flows)
``"friction"``  x' = p,                 p' = -x - lam x^3 + F cos(wt) - gamma p
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .integrators import rk4_step
from .lindblad import SystemParams

CONVENTIONS = ("flow", "friction")


@dataclass(frozen=True)
class ClassicalState:
    x: float
    p: float
    t: float = 0.0


def classical_rhs(state, params: SystemParams, convention: str = "flow"):
    """(dx/dt, dp/dt); ``state`` is a ClassicalState or an (x, p, t) triple of arrays."""
    if isinstance(state, ClassicalState):
        x, p, t = state.x, state.p, state.t
    else:
        x, p, t = state
    force = -x - params.lam * x**3 + params.drive(t)
    if convention == "flow":
        half = 0.5 * params.gamma
        return p - half * x, force - half * p
    if convention == "friction":
        return p, force - params.gamma * p
    raise ValueError(f"unknown damping convention {convention!r}")


def initial_basket(n: int = 16, r_max: float = 4.0) -> np.ndarray:
    """n starting points spiralling out from the origin to radius r_max, shape (2, n)."""
    r = np.linspace(0.0, r_max, n)
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.vstack([r * np.cos(theta), r * np.sin(theta)])


@dataclass(frozen=True)
class AmplitudeScan:
    amplitudes: np.ndarray  # steady max|x| per initial condition
    drift: np.ndarray  # spread of per-period max|x| over the final periods
    converged: np.ndarray
    initial: np.ndarray


def amplitude_scan(
    params: SystemParams,
    *,
    convention: str = "flow",
    periods: int = 600,
    steps_per_period: int = 200,
    final_periods: int = 10,
    initial: np.ndarray | None = None,
    drift_tol: float = 0.01,
) -> AmplitudeScan:
    if params.drive_frequency <= 0:
        raise ValueError("drive_frequency must be positive")
    y0 = initial_basket() if initial is None else np.asarray(initial, dtype=float)
    period = 2.0 * np.pi / params.drive_frequency
    dt = period / steps_per_period

    def f(t, y):
        return np.array(classical_rhs((y[0], y[1], t), params, convention))

    y = y0.copy()
    per_period = []
    step = 0
    for k in range(periods):
        peak = np.zeros(y.shape[1])
        for _ in range(steps_per_period):
            y = rk4_step(f, step * dt, y, dt)
            step += 1
            peak = np.maximum(peak, np.abs(y[0]))
        if k >= periods - final_periods:
            per_period.append(peak)
    per_period = np.array(per_period)
    drift = per_period.max(axis=0) - per_period.min(axis=0)
    converged = drift <= drift_tol
    for i in np.flatnonzero(~converged):
        warnings.warn(f"initial condition {i} not steady (amplitude drift {drift[i]:.3g})", RuntimeWarning, stacklevel=2)
    return AmplitudeScan(per_period.max(axis=0), drift, converged, y0)


def cluster(values, tol: float = 0.02) -> list[float]:
    """Group sorted values whose neighbours differ by <= tol; return cluster means."""
    values = np.sort(np.asarray(values, dtype=float))
    if values.size == 0:
        return []
    groups = [[values[0]]]
    for v in values[1:]:
        if v - groups[-1][-1] <= tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return [float(np.mean(g)) for g in groups]


def steady_amplitudes(params: SystemParams, *, convention: str = "flow", tol: float = 0.02, **kwargs) -> list[float]:
    """Distinct steady oscillation amplitudes reached from the initial basket, ascending."""
    if params.gamma <= 0:
        raise ValueError("steady amplitudes need gamma > 0")
    scan = amplitude_scan(params, convention=convention, **kwargs)
    return cluster(scan.amplitudes, tol)


def lorentzian_amplitude(params: SystemParams, convention: str = "flow") -> float:
    """Steady amplitude of the linear (lam = 0) driven damped oscillator."""
    w, g, f = params.drive_frequency, params.gamma, params.drive_amplitude
    # flow convention: x'' + g x' + (1 + g^2/4) x = F cos(wt)
    w0sq = 1.0 + 0.25 * g * g if convention == "flow" else 1.0
    return f / np.hypot(w0sq - w * w, g * w)


def mechanical_energy(x, p, params: SystemParams):
    return 0.5 * (x * x + p * p) + 0.25 * params.lam * x**4
