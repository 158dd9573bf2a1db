"""Truncated Fock space: ladder operators, quadratures and canonical states.

Units are dimensionless (hbar = m = omega_0 = 1), so x = (a + a^dag)/sqrt(2)
and p = -i (a - a^dag)/sqrt(2). Operators are plain complex ``ndarray``s;
states are wrapped in :class:`DensityMatrix`.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass
from math import lgamma

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8


@dataclass(frozen=True)
class FockSpace:
    """Basis |0>, ..., |dim-1>."""

    dim: int

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"Fock truncation must be an integer >= 2, got {self.dim}")


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace state in a truncated Fock space.

    ``trace_tol`` is only used at construction; trajectories pass a looser
    value so that integration drift can be reported rather than rejected.
    """

    entries: np.ndarray
    trace_tol: InitVar[float] = TRACE_TOL

    def __post_init__(self, trace_tol):
        rho = np.array(self.entries, dtype=np.complex128)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] < 2:
            raise ValueError(f"density matrix must be square with dim >= 2, got {rho.shape}")
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(rho)
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr.real:.12f} deviates from 1")
        rho.flags.writeable = False
        object.__setattr__(self, "entries", rho)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def space(self) -> FockSpace:
        return FockSpace(self.dim)

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def purity(self) -> float:
        # tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        return float(np.sum(np.abs(self.entries) ** 2))

    def top_occupancy(self) -> float:
        """Population of the highest retained level (truncation diagnostic)."""
        return float(self.entries[-1, -1].real)

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.trace(self.entries @ op))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])

    def is_positive(self, tol: float = 1e-8) -> bool:
        return self.min_eigenvalue() >= -tol


def _space(space) -> FockSpace:
    return space if isinstance(space, FockSpace) else FockSpace(int(space))


def annihilation(space: FockSpace) -> np.ndarray:
    dim = _space(space).dim
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(np.complex128)


def creation(space: FockSpace) -> np.ndarray:
    return annihilation(space).conj().T


def number(space: FockSpace) -> np.ndarray:
    dim = _space(space).dim
    return np.diag(np.arange(dim, dtype=float)).astype(np.complex128)


def position(space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    return (a + a.conj().T) / np.sqrt(2.0)


def momentum(space: FockSpace) -> np.ndarray:
    a = annihilation(space)
    return -1j * (a - a.conj().T) / np.sqrt(2.0)


def position_power(space: FockSpace, k: int) -> np.ndarray:
    """x^k with matrix elements exact for every retained pair (m, n).

    Multiplying truncated x matrices corrupts the last few rows; the product is
    formed in a padded space and cut back instead.
    """
    dim = _space(space).dim
    big = position(dim + k)
    return np.linalg.matrix_power(big, k)[:dim, :dim].copy()


def fock_state(space: FockSpace, n: int) -> DensityMatrix:
    dim = _space(space).dim
    if not 0 <= n < dim:
        raise IndexError(f"Fock level {n} outside truncation 0..{dim - 1}")
    rho = np.zeros((dim, dim), dtype=np.complex128)
    rho[n, n] = 1.0
    return DensityMatrix(rho)


def coherent_amplitudes(dim: int, alpha: complex) -> np.ndarray:
    """Raw (unrenormalized) <n|alpha> for n < dim, evaluated in log space."""
    n = np.arange(dim)
    alpha = complex(alpha)
    if alpha == 0:
        out = np.zeros(dim, dtype=np.complex128)
        out[0] = 1.0
        return out
    log_mag = -0.5 * abs(alpha) ** 2 + n * np.log(abs(alpha)) - 0.5 * np.array([lgamma(k + 1) for k in n])
    return np.exp(log_mag) * np.exp(1j * n * np.angle(alpha))


def _check_amplitude(dim: int, alpha: complex):
    if abs(alpha) ** 2 > dim / 4:
        raise ValueError(
            f"|alpha|^2 = {abs(alpha) ** 2:.3f} exceeds dim/4 = {dim / 4:.3f}; raise the truncation"
        )


def coherent_state(space: FockSpace, alpha: complex) -> DensityMatrix:
    dim = _space(space).dim
    _check_amplitude(dim, alpha)
    psi = coherent_amplitudes(dim, alpha)
    psi /= np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def cat_state(space: FockSpace, separation: float) -> DensityMatrix:
    """Even superposition N(|alpha> + |-alpha>) with peaks at x = +-separation/2."""
    dim = _space(space).dim
    if separation <= 0:
        raise ValueError("cat separation must be positive")
    alpha = separation / (2.0 * np.sqrt(2.0))
    _check_amplitude(dim, alpha)
    psi = coherent_amplitudes(dim, alpha) + coherent_amplitudes(dim, -alpha)
    # 2(1 + <alpha|-alpha>) with the overlap exp(-2|alpha|^2); renormalizing
    # the truncated vector afterwards absorbs the tail loss.
    psi /= np.sqrt(2.0 * (1.0 + np.exp(-2.0 * alpha**2)))
    psi /= np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def thermal_state(space: FockSpace, nbar: float) -> DensityMatrix:
    dim = _space(space).dim
    if nbar < 0:
        raise ValueError("nbar must be non-negative")
    if nbar == 0:
        return fock_state(dim, 0)
    n = np.arange(dim)
    pops = (nbar / (nbar + 1.0)) ** n
    return DensityMatrix(np.diag(pops / pops.sum()).astype(np.complex128))
