"""Negative Wigner regions: detection, geometry and boundary-flux rates.

Because W vanishes on the boundary of a negative region A(t), the only flows
crossing it are the ones not proportional to W, so

    d/dt int_A W = (lam/4) oint ds n.(0, -x) d2W/dp2 + (gamma/2)(nbar + 1/2) oint ds n.grad W

with n the outward unit normal. Boundaries are zero-level polylines found by
marching squares; each loop is oriented so that n points from W < 0 to W > 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from skimage.measure import find_contours

from .flow import diffusion_constant
from .lindblad import SystemParams, Trajectory
from .wigner import PhaseSpaceGrid, ScalarField, partial_p, partial_pp, partial_x, wigner_transform

DUST_VOLUME = 1e-8
MIN_SEGMENTS = 8


class RegionTooSmallError(ValueError):
    """Boundary has too few segments to resolve a line integral."""


class TrackingError(LookupError):
    """A region cannot be followed unambiguously between snapshots."""


@dataclass(frozen=True, eq=False)
class NegativeRegion:
    cells: np.ndarray  # (n, 2) integer (ix, ip) indices
    boundary: list  # closed (m, 2) polylines in (x, p), oriented with outward normal on the right
    area: float
    volume: float
    centroid: tuple
    closed: bool = True

    def cell_ids(self, grid: PhaseSpaceGrid) -> np.ndarray:
        return np.ravel_multi_index((self.cells[:, 0], self.cells[:, 1]), grid.shape)

    @property
    def n_loops(self) -> int:
        return len(self.boundary)


@dataclass(frozen=True)
class NegativityRate:
    quantum_term: float
    diffusion_term: float
    fd_check: float = float("nan")
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.quantum_term + self.diffusion_term)

    @property
    def mismatch(self) -> float:
        """|total - fd_check| / max(|total|, |fd_check|)."""
        scale = max(abs(self.total), abs(self.fd_check))
        return abs(self.total - self.fd_check) / scale if scale else 0.0

    def as_dict(self) -> dict:
        return {
            "quantum_term": self.quantum_term,
            "diffusion_term": self.diffusion_term,
            "total": self.total,
            "fd_check": self.fd_check,
        }


@dataclass(frozen=True)
class BoundarySegments:
    midpoints: np.ndarray  # (n, 2) in (x, p)
    normals: np.ndarray  # (n, 2) outward unit normals
    lengths: np.ndarray  # (n,)


def sample(values: np.ndarray, grid: PhaseSpaceGrid, points: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of a grid array at (x, p) points."""
    ix, ip = grid.to_index(points[:, 0], points[:, 1])
    return ndimage.map_coordinates(values, [ix, ip], order=1, mode="nearest")


def _loop_segments(loop: np.ndarray):
    d = np.diff(loop, axis=0)
    length = np.hypot(d[:, 0], d[:, 1])
    keep = length > 0
    d, length = d[keep], length[keep]
    mid = (0.5 * (loop[:-1] + loop[1:]))[keep]
    normal = np.column_stack([d[:, 1], -d[:, 0]]) / length[:, None]
    return mid, normal, length


def boundary_segments(region: NegativeRegion) -> BoundarySegments:
    parts = [_loop_segments(loop) for loop in region.boundary]
    if not parts:
        return BoundarySegments(np.empty((0, 2)), np.empty((0, 2)), np.empty(0))
    mid, normal, length = (np.concatenate(a) for a in zip(*parts))
    return BoundarySegments(mid, normal, length)


def _shoelace(loop: np.ndarray) -> float:
    x, p = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.sum(x[:-1] * p[1:] - x[1:] * p[:-1]))


def _orient(loop: np.ndarray, gx: np.ndarray, gp: np.ndarray, grid: PhaseSpaceGrid) -> np.ndarray:
    """Reverse ``loop`` if needed so its right-hand normal points up the gradient."""
    mid, normal, length = _loop_segments(loop)
    if len(length) == 0:
        return loop
    flux = np.sum(length * (normal[:, 0] * sample(gx, grid, mid) + normal[:, 1] * sample(gp, grid, mid)))
    return loop if flux >= 0 else loop[::-1].copy()


def negativity_volume(w: ScalarField) -> float:
    """Trapezoidal integral of W over every grid node with W < 0."""
    v = w.values
    return float(np.sum(np.where(v < 0, v, 0.0) * w.grid.quadrature_weights()))


def find_negative_regions(
    w: ScalarField,
    threshold: float = 0.0,
    *,
    min_volume: float = DUST_VOLUME,
) -> list[NegativeRegion]:
    """Connected (4-neighbour) components of {W < threshold}, largest |volume| first."""
    if threshold > 0:
        raise ValueError("threshold must be <= 0")
    grid = w.grid
    values = w.values
    labels, count = ndimage.label(values < threshold)
    if count == 0:
        return []
    weights = grid.quadrature_weights()
    gx = partial_x(w).values
    gp = partial_p(w).values
    xx, pp = grid.mesh()
    volumes = ndimage.sum_labels(values * weights, labels, index=np.arange(1, count + 1))
    slices = ndimage.find_objects(labels)
    regions = []
    for k, (vol, sl) in enumerate(zip(volumes, slices), start=1):
        if abs(vol) < min_volume:
            continue
        i0 = max(sl[0].start - 1, 0)
        i1 = min(sl[0].stop + 1, grid.nx)
        j0 = max(sl[1].start - 1, 0)
        j1 = min(sl[1].stop + 1, grid.n_p)
        lab = labels[i0:i1, j0:j1]
        patch = values[i0:i1, j0:j1].copy()
        others = (lab != 0) & (lab != k)
        patch[others] = np.abs(patch[others])
        own = lab == k
        closed = not (
            sl[0].start == 0 or sl[1].start == 0 or sl[0].stop == grid.nx or sl[1].stop == grid.n_p
        )
        loops = []
        for c in find_contours(patch, level=threshold, fully_connected="high"):
            loop = np.column_stack([grid.x_min + (c[:, 0] + i0) * grid.dx, grid.p_min + (c[:, 1] + j0) * grid.dp])
            if not np.allclose(loop[0], loop[-1]):
                closed = False
            loops.append(_orient(loop, gx, gp, grid))
        cells = np.argwhere(own) + [i0, j0]
        wt = -values[cells[:, 0], cells[:, 1]] * weights[cells[:, 0], cells[:, 1]]
        cx = float(np.sum(wt * xx[cells[:, 0], cells[:, 1]]) / np.sum(wt))
        cp = float(np.sum(wt * pp[cells[:, 0], cells[:, 1]]) / np.sum(wt))
        if closed and loops:
            area = float(sum(_shoelace(loop) for loop in loops))
        else:
            area = len(cells) * grid.dx * grid.dp
        regions.append(NegativeRegion(cells, loops, area, float(vol), (cx, cp), closed))
    regions.sort(key=lambda r: r.volume)
    return regions


def negativity_rate(w: ScalarField, params: SystemParams, region: NegativeRegion) -> NegativityRate:
    """Boundary-integral decomposition of d/dt (region volume)."""
    if not region.closed:
        raise ValueError("region boundary is open (touches the grid edge)")
    seg = boundary_segments(region)
    if len(seg.lengths) < MIN_SEGMENTS:
        raise RegionTooSmallError(f"only {len(seg.lengths)} boundary segments")
    grid = w.grid
    n, ds = seg.normals, seg.lengths
    gx = sample(partial_x(w).values, grid, seg.midpoints)
    gp = sample(partial_p(w).values, grid, seg.midpoints)
    diffusion = diffusion_constant(params) * float(np.sum(ds * (n[:, 0] * gx + n[:, 1] * gp)))
    if params.lam:
        wpp = sample(partial_pp(w).values, grid, seg.midpoints)
        quantum = 0.25 * params.lam * float(np.sum(ds * n[:, 1] * (-seg.midpoints[:, 0]) * wpp))
    else:
        quantum = 0.0
    return NegativityRate(quantum, diffusion)


def match_region(
    ref: NegativeRegion,
    candidates: list[NegativeRegion],
    grid: PhaseSpaceGrid,
    radius_cells: float = 3.0,
) -> NegativeRegion:
    """Follow ``ref`` into ``candidates`` by centroid proximity, else by cell overlap."""
    if not candidates:
        raise TrackingError("no negative regions to match against")
    h = max(grid.dx, grid.dp)
    ref_ids = ref.cell_ids(grid)
    overlaps = np.array([np.intersect1d(ref_ids, c.cell_ids(grid)).size for c in candidates])
    if np.count_nonzero(overlaps) > 1:
        raise TrackingError("region split between snapshots")
    dist = np.array([np.hypot(c.centroid[0] - ref.centroid[0], c.centroid[1] - ref.centroid[1]) for c in candidates])
    best = int(np.argmin(dist))
    if dist[best] < radius_cells * h:
        return candidates[best]
    if overlaps.max() > 0:
        return candidates[int(np.argmax(overlaps))]
    raise TrackingError("region appeared or vanished between snapshots")


def rate_consistency_check(
    traj: Trajectory,
    grid: PhaseSpaceGrid,
    params: SystemParams,
    t: float,
    delta: float,
    *,
    region_index: int = 0,
    threshold: float = 0.0,
) -> NegativityRate:
    """Boundary-integral rate at ``t`` alongside a centred difference of the region volume."""
    tol = 0.5 * traj.dt + 1e-12
    fields = [wigner_transform(traj.state_at(s, tol), grid) for s in (t - delta, t, t + delta)]
    regions = [find_negative_regions(f, threshold) for f in fields]
    if len(regions[1]) <= region_index:
        raise TrackingError(f"no negative region #{region_index} at t = {t:.6g}")
    ref = regions[1][region_index]
    before = match_region(ref, regions[0], grid)
    after = match_region(ref, regions[2], grid)
    for side in (before, after):
        ids = side.cell_ids(grid)
        hits = sum(np.intersect1d(ids, r.cell_ids(grid)).size > 0 for r in regions[1])
        if hits > 1:
            raise TrackingError("regions merged between snapshots")
    t_lo = traj.times[traj.index_of(t - delta, tol)]
    t_hi = traj.times[traj.index_of(t + delta, tol)]
    rate = negativity_rate(fields[1], params, ref)
    fd = (after.volume - before.volume) / (t_hi - t_lo)
    return NegativityRate(rate.quantum_term, rate.diffusion_term, fd)


@dataclass(frozen=True)
class NegativityOnset:
    t: float
    volume: float
    centroid: tuple
    quadrant: str


def quadrant(x: float, p: float) -> str:
    vertical = "upper" if p > 0 else "lower"
    horizontal = "right" if x > 0 else "left"
    return f"{vertical}-{horizontal}"


def first_negativity_time(
    traj: Trajectory,
    grid: PhaseSpaceGrid,
    volume_threshold: float = -1e-4,
) -> NegativityOnset | None:
    """Earliest snapshot whose total negativity volume falls below ``volume_threshold``."""
    for t, state in zip(traj.times, traj.states):
        w = wigner_transform(state, grid)
        vol = negativity_volume(w)
        if vol < volume_threshold:
            regions = find_negative_regions(w)
            cx, cp = regions[0].centroid
            return NegativityOnset(float(t), vol, (cx, cp), quadrant(cx, cp))
    return None
