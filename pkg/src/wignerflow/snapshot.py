"""Per-snapshot analysis records and the ``.wfs`` binary container.

Layout of a ``.wfs`` file (all integers little-endian)::

    offset 0        8 bytes   magic  b"WFSNAP01"
    offset 8        8 bytes   uint64 H, length of the header in bytes
    offset 16       H bytes   UTF-8 JSON header
    offset 16 + H   payload   float64 arrays, little-endian, back to back

The header's ``arrays`` entry lists the payload arrays in order; each is
``nx * n_p`` values stored x-major (index ``ix * n_p + ip``). The first is
always ``W``, followed by ``Jx:<view>``, ``Jp:<view>`` for every stored
flow view. The header also carries the grid, time, parameters,
diagnostics and a table of negative regions.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .flow import FlowDecomposition
from .lindblad import SystemParams
from .negativity import NegativeRegion, NegativityRate
from .wigner import PhaseSpaceGrid, ScalarField, VectorField

MAGIC = b"WFSNAP01"
FORMAT_VERSION = 1
_LE_F8 = np.dtype("<f8")


class SnapshotFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SnapshotRecord:
    t: float
    wigner: ScalarField
    flows: FlowDecomposition
    regions: list
    diagnostics: dict
    rates: list = field(default_factory=list)  # NegativityRate or None, aligned with regions
    views: tuple = ("total",)

    def __post_init__(self):
        if abs(self.diagnostics.get("trace", 1.0) - 1.0) > 1e-6:
            raise ValueError(f"snapshot trace {self.diagnostics['trace']} drifted from 1")

    @property
    def grid(self) -> PhaseSpaceGrid:
        return self.wigner.grid

    @property
    def params(self) -> SystemParams:
        return self.flows.params

    def flow(self, view: str) -> VectorField:
        if view not in self.views:
            raise KeyError(f"view {view!r} not stored in this snapshot (have {self.views})")
        return self.flows.view(view)

    def region_table(self) -> list[dict]:
        rows = []
        for k, region in enumerate(self.regions):
            rate = self.rates[k] if k < len(self.rates) else None
            rows.append(region_summary(region, rate))
        return rows


def region_summary(region: NegativeRegion, rate: NegativityRate | None) -> dict:
    return {
        "area": region.area,
        "volume": region.volume,
        "centroid": list(region.centroid),
        "closed": region.closed,
        "n_loops": region.n_loops,
        "n_cells": int(len(region.cells)),
        "rate": None if rate is None else rate.as_dict(),
    }


@dataclass(frozen=True, eq=False)
class SnapshotData:
    """A snapshot read back from disk: the fields plus the header as stored."""

    header: dict
    wigner: ScalarField
    flows: dict  # view -> VectorField

    @property
    def t(self) -> float:
        return self.header["t"]

    @property
    def grid(self) -> PhaseSpaceGrid:
        return self.wigner.grid

    @property
    def views(self) -> tuple:
        return tuple(self.flows)

    @property
    def params(self) -> SystemParams:
        return SystemParams(**self.header["params"])

    @property
    def diagnostics(self) -> dict:
        return self.header["diagnostics"]

    def flow(self, view: str) -> VectorField:
        if view not in self.flows:
            raise KeyError(f"view {view!r} not stored in this snapshot (have {self.views})")
        return self.flows[view]


def _json_safe(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return _json_safe(value.item())
    return value


def build_header(record: SnapshotRecord, extra: dict | None = None) -> dict:
    arrays = ["W"]
    for view in record.views:
        arrays += [f"Jx:{view}", f"Jp:{view}"]
    header = {
        "format": "wfs",
        "version": FORMAT_VERSION,
        "grid": record.grid.as_dict(),
        "t": float(record.t),
        "params": record.params.as_dict(),
        "diagnostics": dict(record.diagnostics),
        "regions": record.region_table(),
        "views": list(record.views),
        "arrays": arrays,
        "dtype": "<f8",
        "order": "x-major",
    }
    if extra:
        header["extra"] = extra
    return _json_safe(header)


def _payload(record: SnapshotRecord) -> list[np.ndarray]:
    out = [record.wigner.values]
    for view in record.views:
        j = record.flow(view)
        out += [j.jx, j.jp]
    return out


def export_snapshot(record: SnapshotRecord, path, *, extra: dict | None = None) -> Path:
    path = Path(path)
    header = json.dumps(build_header(record, extra), sort_keys=True).encode("utf-8")
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for a in _payload(record):
            fh.write(np.ascontiguousarray(a, dtype=_LE_F8).tobytes(order="C"))
    return path


def read_header(path) -> tuple[dict, int]:
    """(header, payload offset) without reading the arrays."""
    with Path(path).open("rb") as fh:
        magic = fh.read(len(MAGIC))
        if magic != MAGIC:
            raise SnapshotFormatError(f"{path}: not a wignerflow snapshot (bad magic {magic!r})")
        (n,) = struct.unpack("<Q", fh.read(8))
        raw = fh.read(n)
    if len(raw) != n:
        raise SnapshotFormatError(f"{path}: truncated header")
    return json.loads(raw.decode("utf-8")), len(MAGIC) + 8 + n


def import_snapshot(path) -> SnapshotData:
    header, offset = read_header(path)
    if header.get("version") != FORMAT_VERSION:
        raise SnapshotFormatError(f"unsupported snapshot version {header.get('version')}")
    grid = PhaseSpaceGrid(**header["grid"])
    names = header["arrays"]
    data = np.fromfile(path, dtype=_LE_F8, offset=offset)
    size = grid.nx * grid.n_p
    if data.size != size * len(names):
        raise SnapshotFormatError(f"{path}: payload has {data.size} values, expected {size * len(names)}")
    arrays = {name: data[k * size : (k + 1) * size].reshape(grid.shape) for k, name in enumerate(names)}
    flows = {v: VectorField(grid, arrays[f"Jx:{v}"], arrays[f"Jp:{v}"]) for v in header["views"]}
    return SnapshotData(header, ScalarField(grid, arrays["W"]), flows)


def payload_bytes(path) -> int:
    _, offset = read_header(path)
    return Path(path).stat().st_size - offset

