"""Wigner function on a rectangular phase-space grid, and grid derivatives.

Arrays are indexed ``[ix, ip]`` (x-major). The transform sums closed-form
Fock-basis kernels; for the off-diagonal |m><m+k| terms it runs the
three-term Laguerre recurrence upward in m at fixed order k, normalized so
that no factorials are ever formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import trapezoid

from .fock import DensityMatrix

BOUNDARY_TOL = 1e-6


class WignerBoundaryWarning(UserWarning):
    """The Wigner function has not decayed at the grid edge."""


@dataclass(frozen=True)
class PhaseSpaceGrid:
    x_min: float = -6.0
    x_max: float = 6.0
    p_min: float = -6.0
    p_max: float = 6.0
    nx: int = 256
    n_p: int = 256

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.p_max > self.p_min):
            raise ValueError("grid bounds must satisfy max > min")
        if self.nx < 16 or self.n_p < 16:
            raise ValueError("grid needs at least 16 points per axis")

    @classmethod
    def square(cls, half_width: float = 6.0, n: int = 256) -> "PhaseSpaceGrid":
        return cls(-half_width, half_width, -half_width, half_width, n, n)

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.nx - 1)

    @property
    def dp(self) -> float:
        return (self.p_max - self.p_min) / (self.n_p - 1)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.n_p)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    @property
    def p(self) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return _mesh(self)

    def quadrature_weights(self) -> np.ndarray:
        """Tensor trapezoid weights (halved on the edges)."""
        wx = np.full(self.nx, self.dx)
        wx[[0, -1]] *= 0.5
        wp = np.full(self.n_p, self.dp)
        wp[[0, -1]] *= 0.5
        return np.outer(wx, wp)

    def refined(self, factor: int = 2) -> "PhaseSpaceGrid":
        return PhaseSpaceGrid(
            self.x_min, self.x_max, self.p_min, self.p_max,
            (self.nx - 1) * factor + 1, (self.n_p - 1) * factor + 1,
        )

    def to_index(self, x, p):
        """Fractional (ix, ip) index of phase-space points."""
        return (np.asarray(x) - self.x_min) / self.dx, (np.asarray(p) - self.p_min) / self.dp

    def as_dict(self) -> dict:
        return {
            "x_min": self.x_min, "x_max": self.x_max,
            "p_min": self.p_min, "p_max": self.p_max,
            "nx": self.nx, "n_p": self.n_p,
        }


@lru_cache(maxsize=8)
def _mesh(grid: PhaseSpaceGrid):
    xx, pp = np.meshgrid(grid.x, grid.p, indexing="ij")
    xx.flags.writeable = False
    pp.flags.writeable = False
    return xx, pp


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: PhaseSpaceGrid
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"field shape {v.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        return float(np.sum(self.values * self.grid.quadrature_weights()))

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def at(self, x: float, p: float) -> float:
        """Value at the grid node nearest (x, p)."""
        i = int(round((x - self.grid.x_min) / self.grid.dx))
        j = int(round((p - self.grid.p_min) / self.grid.dp))
        return float(self.values[i, j])


@dataclass(frozen=True, eq=False)
class VectorField:
    grid: PhaseSpaceGrid
    jx: np.ndarray
    jp: np.ndarray

    def __post_init__(self):
        jx, jp = _frozen(self.jx), _frozen(self.jp)
        if jx.shape != self.grid.shape or jp.shape != self.grid.shape:
            raise ValueError("vector components do not match grid shape")
        if not (np.all(np.isfinite(jx)) and np.all(np.isfinite(jp))):
            raise ValueError("vector field contains non-finite values")
        object.__setattr__(self, "jx", jx)
        object.__setattr__(self, "jp", jp)

    def __add__(self, other: "VectorField") -> "VectorField":
        if other.grid != self.grid:
            raise ValueError("cannot add fields on different grids")
        return VectorField(self.grid, self.jx + other.jx, self.jp + other.jp)

    def scaled(self, c: float) -> "VectorField":
        return VectorField(self.grid, c * self.jx, c * self.jp)


def wigner_transform(rho: DensityMatrix, grid: PhaseSpaceGrid, *, return_imag: bool = False):
    """Wigner function W(x, p) of ``rho`` sampled on ``grid``.

    W = sum_m rho_mm K_mm + 2 Re sum_{k>=1} sum_m rho_{m,m+k} conj(K_{m,m+k}), with
    K_{m,m+k} = ((-1)^m / pi) sqrt(m!/(m+k)!) e^{-r^2} (sqrt2 (x - ip))^k L_m^k(2 r^2).

    With ``return_imag`` the imaginary residue of the full (unsymmetrized)
    kernel sum is returned as a second array; it vanishes for Hermitian rho.
    """
    matrix = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=np.complex128)
    dim = matrix.shape[0]
    xx, pp = grid.mesh()
    u = 2.0 * (xx * xx + pp * pp)
    z = np.sqrt(2.0) * (xx + 1j * pp)
    signs = (-1.0) ** np.arange(dim)

    # prefactor for diagonal k: e^{-u/2} (sqrt2 (x+ip))^k / sqrt(k!)
    pref = np.exp(-0.5 * u).astype(np.complex128)
    w = np.zeros(grid.shape)
    imag = np.zeros(grid.shape) if return_imag else None
    for k in range(dim):
        if k > 0:
            pref = pref * z / np.sqrt(k)
        upper = signs[: dim - k] * np.diagonal(matrix, k)
        lower = signs[: dim - k] * np.diagonal(matrix, -k)
        acc_re, acc_im = _laguerre_sum(u, k, upper)
        if k == 0:
            w += pref.real * acc_re
            if return_imag:
                imag += pref.real * acc_im
            continue
        w += 2.0 * (pref.real * acc_re - pref.imag * acc_im)
        if return_imag:
            d_re, d_im = _laguerre_sum(u, k, upper - lower.conj())
            imag += pref.real * d_im + pref.imag * d_re
    w /= np.pi
    if return_imag:
        imag /= np.pi
    field = ScalarField(grid, w)
    edge = field.boundary_max()
    if edge > BOUNDARY_TOL:
        warnings.warn(
            f"|W| reaches {edge:.2e} on the grid boundary; enlarge the grid",
            WignerBoundaryWarning,
            stacklevel=2,
        )
    return (field, imag) if return_imag else field


def _laguerre_sum(u: np.ndarray, k: int, coeffs: np.ndarray):
    """sum_m coeffs[m] * sqrt(m! k!/(m+k)!) L_m^k(u), real and imaginary parts."""
    acc_re = np.zeros_like(u)
    acc_im = np.zeros_like(u)
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        return acc_re, acc_im
    coeffs = coeffs[: nonzero[-1] + 1]
    prev = None
    cur = np.ones_like(u)
    for m, c in enumerate(coeffs):
        if m == 1:
            prev, cur = cur, (k + 1.0 - u) * cur / np.sqrt(k + 1.0)
        elif m > 1:
            j = m - 1
            nxt = ((2 * j + k + 1.0 - u) * cur - np.sqrt(j * (j + k)) * prev) / np.sqrt((j + 1.0) * (j + k + 1.0))
            prev, cur = cur, nxt
        if c.real:
            acc_re += c.real * cur
        if c.imag:
            acc_im += c.imag * cur
    return acc_re, acc_im


def marginals(w: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """(x-density, p-density) by trapezoidal integration over the other axis."""
    x_density = trapezoid(w.values, dx=w.grid.dp, axis=1)
    p_density = trapezoid(w.values, dx=w.grid.dx, axis=0)
    return x_density, p_density


# ---------------------------------------------------------------------------
# finite differences


def _fd_weights(offsets, order: int) -> np.ndarray:
    """Stencil weights for the ``order``-th derivative at 0 from unit-spaced ``offsets``."""
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    vander = np.vander(offsets, n, increasing=True).T
    rhs = np.zeros(n)
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


def _build_stencils(order: int):
    width = 5 if order == 1 else 6
    central = _fd_weights([-2, -1, 0, 1, 2], order)
    left = [_fd_weights(np.arange(width) - i, order) for i in (0, 1)]
    return central, left, width


_STENCILS = {1: _build_stencils(1), 2: _build_stencils(2)}


def derivative(values: np.ndarray, h: float, axis: int, order: int = 1) -> np.ndarray:
    """Fourth-order finite-difference derivative along ``axis``.

    Five-point central stencil in the interior; one-sided fourth-order
    stencils on the two outermost nodes at each end.
    """
    central, left, width = _STENCILS[order]
    f = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    n = f.shape[0]
    if n < width:
        raise ValueError(f"need at least {width} nodes along the derivative axis")
    out = np.empty_like(f)
    out[2:-2] = sum(c * f[2 + s : n - 2 + s] for c, s in zip(central, range(-2, 3)))
    sign = 1.0 if order % 2 == 0 else -1.0
    for i, weights in enumerate(left):
        out[i] = sum(c * f[j] for j, c in enumerate(weights))
        out[n - 1 - i] = sign * sum(c * f[n - 1 - j] for j, c in enumerate(weights))
    return np.moveaxis(out / h**order, 0, axis)


def partial_x(w: ScalarField) -> ScalarField:
    return ScalarField(w.grid, derivative(w.values, w.grid.dx, axis=0))


def partial_p(w: ScalarField) -> ScalarField:
    return ScalarField(w.grid, derivative(w.values, w.grid.dp, axis=1))


def partial_pp(w: ScalarField) -> ScalarField:
    return ScalarField(w.grid, derivative(w.values, w.grid.dp, axis=1, order=2))
