"""Lindblad master equation for a driven, damped Duffing mode.

    drho/dt = -i[H(t), rho] + (gamma/2)(nbar+1)(2 a rho a^dag - a^dag a rho - rho a^dag a)
                            + (gamma/2) nbar   (2 a^dag rho a - a a^dag rho - rho a a^dag)

with H(t) = (x^2 + p^2)/2 + (lam/4) x^4 - x F cos(omega_d t), all dimensionless.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .fock import DensityMatrix, FockSpace, annihilation, position, position_power
from .integrators import rk4_step

logger = logging.getLogger(__name__)

TRAJECTORY_TRACE_TOL = 1e-6


class TruncationError(RuntimeError):
    """The Fock truncation (or the integrator) can no longer be trusted."""

    def __init__(self, diagnostic: str, value: float, t: float):
        self.diagnostic = diagnostic
        self.value = value
        self.t = t
        super().__init__(f"{diagnostic} = {value:.3e} at t = {t:.6g}")


class MissingSnapshotError(LookupError):
    pass


def thermal_occupation(temperature: float) -> float:
    """Bose-Einstein occupation for a bath at k_B T / (hbar omega_0) = temperature."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return 0.0
    return float(1.0 / np.expm1(1.0 / temperature))


@dataclass(frozen=True)
class SystemParams:
    lam: float = 0.0
    drive_amplitude: float = 0.0
    drive_frequency: float = 1.0
    gamma: float = 0.0
    nbar: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.nbar < 0:
            raise ValueError("nbar must be non-negative")
        if self.drive_amplitude != 0 and self.drive_frequency <= 0:
            raise ValueError("drive_frequency must be positive when driven")

    @property
    def is_harmonic(self) -> bool:
        return self.lam == 0 and self.drive_amplitude == 0

    def drive(self, t: float) -> float:
        return self.drive_amplitude * np.cos(self.drive_frequency * t)

    def as_dict(self) -> dict:
        return {
            "lam": self.lam,
            "drive_amplitude": self.drive_amplitude,
            "drive_frequency": self.drive_frequency,
            "gamma": self.gamma,
            "nbar": self.nbar,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list
    params: SystemParams
    dt: float
    max_trace_drift: float = 0.0
    max_top_occupancy: float = 0.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if len(times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")
        object.__setattr__(self, "times", times)

    def __len__(self):
        return len(self.times)

    def index_of(self, t: float, tol: float | None = None) -> int:
        """Index of the snapshot at time ``t`` (default tolerance: half a step)."""
        tol = 0.5 * self.dt + 1e-12 if tol is None else tol
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > tol:
            raise MissingSnapshotError(f"no snapshot within {tol:.3g} of t = {t:.6g}")
        return i

    def state_at(self, t: float, tol: float | None = None) -> DensityMatrix:
        return self.states[self.index_of(t, tol)]


def hamiltonian(space: FockSpace, params: SystemParams, t: float) -> np.ndarray:
    dim = space.dim if isinstance(space, FockSpace) else int(space)
    h = np.diag(np.arange(dim) + 0.5).astype(np.complex128)
    if params.lam:
        h = h + (params.lam / 4.0) * position_power(dim, 4)
    if params.drive_amplitude:
        h = h - params.drive(t) * position(dim)
    return h


class LindbladGenerator:
    """Precomputed pieces of the Lindblad right-hand side for one (dim, params).

    Writes drho/dt = K rho + (K rho)^dag + jump terms, where
    K(t) = -i H(t) - (gamma/2)[(nbar+1) a^dag a + nbar a a^dag]. The jump terms
    a rho a^dag and a^dag rho a are index shifts of rho scaled by sqrt(i j).
    """

    def __init__(self, dim: int, params: SystemParams):
        self.dim = dim
        self.params = params
        a = annihilation(dim)
        ad = a.conj().T
        g, nb = params.gamma, params.nbar
        h0 = hamiltonian(dim, SystemParams(lam=params.lam), 0.0)
        self.k0 = -1j * h0 - 0.5 * g * ((nb + 1.0) * (ad @ a) + nb * (a @ ad))
        self.ix = 1j * position(dim)
        sq = np.sqrt(np.arange(1, dim, dtype=float))
        self.down = g * (nb + 1.0) * np.outer(sq, sq)
        self.up = g * nb * np.outer(sq, sq)

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        p = self.params
        if p.drive_amplitude:
            k = self.k0 + p.drive(t) * self.ix
        else:
            k = self.k0
        m = k @ rho
        out = m + m.conj().T
        if p.gamma:
            out[:-1, :-1] += self.down * rho[1:, 1:]
            if p.nbar:
                out[1:, 1:] += self.up * rho[:-1, :-1]
        return out


RK4_IMAG_LIMIT = 2.0 * np.sqrt(2.0)


def check_step_stability(gen: LindbladGenerator, dt: float) -> float:
    """Bound dt * (largest Liouvillian frequency) against the RK4 imaginary-axis limit.

    The truncated x^4 term pushes the top of the spectrum far above the
    physically populated levels, so this is the binding constraint on dt.
    """
    h = hamiltonian(gen.dim, SystemParams(lam=gen.params.lam), 0.0)
    e = np.linalg.eigvalsh(h)
    spread = e[-1] - e[0] + 2.0 * abs(gen.params.drive_amplitude) * np.linalg.norm(position(gen.dim), 2)
    z = dt * spread
    if z > RK4_IMAG_LIMIT:
        raise ValueError(
            f"dt = {dt:.3g} is unstable for this truncation (dt * spectral width = {z:.2f} > {RK4_IMAG_LIMIT:.2f})"
        )
    return z


def lindblad_rhs(rho: DensityMatrix, params: SystemParams, t: float) -> np.ndarray:
    matrix = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    return LindbladGenerator(matrix.shape[0], params)(t, matrix)


def integrate(
    rho0: DensityMatrix,
    params: SystemParams,
    t_final: float,
    dt: float,
    snapshot_times,
    *,
    trace_tol: float = 1e-4,
    top_tol: float = 1e-6,
) -> Trajectory:
    """Fixed-step RK4 from t = 0 to t_final.

    Snapshots land on the step grid point nearest each requested time and are
    recorded at that grid time. Raises :class:`TruncationError` once the trace
    drifts by more than ``trace_tol`` or the top Fock level holds more than
    ``top_tol`` population.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if t_final < 0:
        raise ValueError("t_final must be non-negative")
    n_steps = int(round(t_final / dt))
    requested = np.asarray(sorted(snapshot_times), dtype=float)
    if requested.size and (requested[0] < -0.5 * dt or requested[-1] > t_final + 0.5 * dt):
        raise ValueError("snapshot times must lie in [0, t_final]")
    idx = np.clip(np.rint(requested / dt).astype(int), 0, n_steps)
    if np.any(np.diff(idx) == 0):
        raise ValueError("two snapshot times map to the same integration step; reduce dt")
    wanted = {int(i): k for k, i in enumerate(idx)}

    gen = LindbladGenerator(rho0.dim, params)
    check_step_stability(gen, dt)
    rho = np.array(rho0.entries)
    states: list = [None] * len(idx)
    max_drift = 0.0
    max_top = float(rho[-1, -1].real)

    def record(step):
        states[wanted[step]] = DensityMatrix(rho, trace_tol=TRAJECTORY_TRACE_TOL)

    if 0 in wanted:
        record(0)
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        rho = rk4_step(gen, t, rho, dt)
        rho = 0.5 * (rho + rho.conj().T)
        drift = abs(np.trace(rho).real - 1.0)
        top = rho[-1, -1].real
        max_drift = max(max_drift, drift)
        max_top = max(max_top, top)
        if drift > trace_tol:
            raise TruncationError("trace_drift", drift, step * dt)
        if top > top_tol:
            raise TruncationError("top_level_occupancy", top, step * dt)
        if step in wanted:
            record(step)
    logger.debug("integrated %d steps, max trace drift %.2e, max top occupancy %.2e", n_steps, max_drift, max_top)
    return Trajectory(
        times=idx * dt,
        states=states,
        params=params,
        dt=dt,
        max_trace_drift=max_drift,
        max_top_occupancy=max_top,
    )


def steady_state_check(traj: Trajectory, period: float, tol: float, t: float | None = None):
    """Compare the snapshot at ``t`` (default: last) with the one a period earlier.

    Returns ``(converged, distance)`` with distance the max entrywise
    difference of the two density matrices.
    """
    t = traj.times[-1] if t is None else t
    tol_t = traj.dt + 1e-12
    later = traj.state_at(t, tol_t)
    earlier = traj.state_at(t - period, tol_t)
    distance = float(np.max(np.abs(later.entries - earlier.entries)))
    return distance <= tol, distance
