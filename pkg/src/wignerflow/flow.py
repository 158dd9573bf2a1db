"""Wigner flow fields and the phase-space continuity equation dW/dt + div J = 0.

The system flow follows from the Moyal expansion of the potential
V'(x) = x^2/2 + (lam/4) x^4 - x F cos(omega_d t):

    J_p = -sum_n (-1)^n (1/2)^{2n} / (2n+1)! * d^{2n+1}V'/dx^{2n+1} * d^{2n}W/dp^{2n}

which for a quartic potential stops after n = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np
from numpy.polynomial import Polynomial

from .lindblad import SystemParams, Trajectory
from .wigner import (
    PhaseSpaceGrid,
    ScalarField,
    VectorField,
    derivative,
    partial_pp,
    partial_p,
    partial_x,
    wigner_transform,
)

STATIONARY_FLOOR = 1e-6

FLOW_VIEWS = ("total", "sys", "damp", "diff")


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    j_sys: VectorField
    j_damp: VectorField
    j_diff: VectorField
    j_total: VectorField
    t: float
    params: SystemParams

    def view(self, name: str) -> VectorField:
        if name not in FLOW_VIEWS:
            raise KeyError(f"unknown flow view {name!r}; choose from {FLOW_VIEWS}")
        return getattr(self, f"j_{name}")


def flow_harmonic(w: ScalarField) -> VectorField:
    xx, pp = w.grid.mesh()
    return VectorField(w.grid, pp * w.values, -xx * w.values)


def potential_polynomial(params: SystemParams, t: float) -> Polynomial:
    """V'(x) = x^2/2 + (lam/4) x^4 - x F cos(omega_d t)."""
    return Polynomial([0.0, -params.drive(t), 0.5, 0.0, params.lam / 4.0])


def moyal_coefficients(potential: Polynomial, max_order: int = 1) -> list[Polynomial]:
    """Coefficient polynomials c_n(x) of d^{2n}W/dp^{2n} in J_p, n = 0..max_order.

    Raises if the series would continue past ``max_order``.
    """
    coeffs = []
    for n in range(max_order + 1):
        dv = potential.deriv(2 * n + 1)
        coeffs.append(-((-1) ** n) * 0.25**n / factorial(2 * n + 1) * dv)
    tail = potential.deriv(2 * max_order + 3)
    if np.any(tail.coef != 0):
        raise ValueError("Moyal series does not terminate at the supported order")
    return coeffs


def flow_duffing(w: ScalarField, params: SystemParams, t: float) -> VectorField:
    xx, pp = w.grid.mesh()
    c0, c1 = moyal_coefficients(potential_polynomial(params, t))
    jp = c0(xx) * w.values
    if params.lam:
        jp = jp + c1(xx) * partial_pp(w).values
    return VectorField(w.grid, pp * w.values, jp)


def flow_sys(w: ScalarField, params: SystemParams, t: float) -> VectorField:
    if params.is_harmonic:
        return flow_harmonic(w)
    return flow_duffing(w, params, t)


def flow_damp(w: ScalarField, params: SystemParams) -> VectorField:
    xx, pp = w.grid.mesh()
    c = -0.5 * params.gamma
    return VectorField(w.grid, c * xx * w.values, c * pp * w.values)


def diffusion_constant(params: SystemParams) -> float:
    return 0.5 * params.gamma * (params.nbar + 0.5)


def flow_diff(w: ScalarField, params: SystemParams) -> VectorField:
    c = -diffusion_constant(params)
    return VectorField(w.grid, c * partial_x(w).values, c * partial_p(w).values)


def flow_decomposition(w: ScalarField, params: SystemParams, t: float) -> FlowDecomposition:
    j_sys = flow_sys(w, params, t)
    j_damp = flow_damp(w, params)
    j_diff = flow_diff(w, params)
    return FlowDecomposition(j_sys, j_damp, j_diff, j_sys + j_damp + j_diff, t, params)


def divergence(j: VectorField) -> ScalarField:
    g = j.grid
    return ScalarField(g, derivative(j.jx, g.dx, axis=0) + derivative(j.jp, g.dp, axis=1))


def _interior(a: np.ndarray, margin: int) -> np.ndarray:
    return a[margin:-margin, margin:-margin]


def continuity_residual(
    traj: Trajectory,
    grid: PhaseSpaceGrid,
    snapshot_index: int,
    *,
    relative: bool | None = None,
    margin: int = 2,
) -> float:
    """RMS residual of dW/dt + div J at one snapshot.

    dW/dt is the centred difference of the neighbouring snapshots. The result
    is normalized by the RMS of div J unless that is below STATIONARY_FLOOR
    (or ``relative=False``), in which case the absolute residual is returned.
    """
    i = snapshot_index
    if i < 1 or i + 1 >= len(traj):
        raise IndexError(f"snapshot {i} lacks a neighbour on each side")
    t_prev, t, t_next = traj.times[i - 1 : i + 2]
    if abs((t_next - t) - (t - t_prev)) > 0.5 * traj.dt + 1e-12:
        raise ValueError("neighbouring snapshots are not symmetric about the centre")
    delta = 0.5 * (t_next - t_prev)
    fields = [wigner_transform(traj.states[k], grid) for k in (i - 1, i, i + 1)]
    return residual_from_fields(*fields, delta, traj.params, t, relative=relative, margin=margin)


def residual_from_fields(
    w_prev: ScalarField,
    w_mid: ScalarField,
    w_next: ScalarField,
    delta: float,
    params: SystemParams,
    t: float,
    *,
    relative: bool | None = None,
    margin: int = 2,
    flows: FlowDecomposition | None = None,
) -> float:
    """Continuity residual from three Wigner fields spaced ``delta`` apart."""
    dwdt = (w_next.values - w_prev.values) / (2.0 * delta)
    if flows is None:
        flows = flow_decomposition(w_mid, params, t)
    div = divergence(flows.j_total).values
    resid = np.sqrt(np.mean(_interior(dwdt + div, margin) ** 2))
    scale = np.sqrt(np.mean(_interior(div, margin) ** 2))
    if relative is None:
        relative = scale > STATIONARY_FLOOR
    return float(resid / scale) if relative else float(resid)
