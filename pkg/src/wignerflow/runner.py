"""Experiment pipeline: integrate, analyse every snapshot, persist, report."""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classical import steady_amplitudes
from .config import ExperimentConfig
from .flow import FLOW_VIEWS, flow_decomposition, residual_from_fields
from .fock import DensityMatrix
from .lindblad import SystemParams, Trajectory, integrate
from .negativity import (
    RegionTooSmallError,
    find_negative_regions,
    negativity_rate,
    negativity_volume,
)
from .render import render_figure
from .snapshot import SnapshotRecord, export_snapshot
from .wigner import PhaseSpaceGrid, wigner_transform

logger = logging.getLogger(__name__)

OUTPUT_ENV = "WIGNERFLOW_OUTPUT_DIR"
REPORT_NAME = "report.json"
CLASSICAL_CONVENTION = "flow"


@dataclass(eq=False)
class RunResult:
    config: ExperimentConfig
    trajectory: Trajectory
    records: list
    report: dict
    output_dir: Path | None = None

    def record_at(self, t: float) -> SnapshotRecord:
        return self.records[self.trajectory.index_of(t)]


def resolve_output_dir(config: ExperimentConfig, override=None) -> Path:
    if override is not None:
        return Path(override)
    env = os.environ.get(OUTPUT_ENV)
    if env:
        return Path(env) / config.name
    return Path(config.output_dir)


def analyse_snapshot(
    state: DensityMatrix,
    t: float,
    params: SystemParams,
    grid: PhaseSpaceGrid,
    views=FLOW_VIEWS,
    threshold: float = 0.0,
) -> SnapshotRecord:
    w = wigner_transform(state, grid)
    flows = flow_decomposition(w, params, t)
    regions = find_negative_regions(w, threshold)
    rates = []
    for region in regions:
        try:
            rates.append(negativity_rate(w, params, region) if region.closed else None)
        except RegionTooSmallError:
            rates.append(None)
    diagnostics = {
        "trace": float(state.trace().real),
        "purity": float(state.purity()),
        "top_level_occupancy": float(state.top_occupancy()),
        "negativity_volume": negativity_volume(w),
        "max_abs_w": float(np.max(np.abs(w.values))),
        "boundary_max_abs_w": w.boundary_max(),
        "wigner_integral": w.integral(),
        "n_regions": len(regions),
    }
    return SnapshotRecord(t, w, flows, regions, diagnostics, rates, tuple(views))


def _symmetric_neighbours(times: np.ndarray, dt: float) -> list[int]:
    out = []
    for i in range(1, len(times) - 1):
        if abs((times[i + 1] - times[i]) - (times[i] - times[i - 1])) <= 0.5 * dt + 1e-12:
            out.append(i)
    return out


def continuity_table(records: list, trajectory: Trajectory) -> dict:
    """Continuity residual for every snapshot with equally spaced neighbours."""
    times = trajectory.times
    table = {}
    for i in _symmetric_neighbours(times, trajectory.dt):
        delta = 0.5 * (times[i + 1] - times[i - 1])
        r = records[i]
        table[i] = {
            "delta": float(delta),
            "residual": residual_from_fields(
                records[i - 1].wigner, r.wigner, records[i + 1].wigner, delta,
                trajectory.params, r.t, flows=r.flows,
            ),
        }
    return table


def strobe_distances(trajectory: Trajectory, period: float) -> list[dict]:
    """Max-entry density-matrix distance between snapshots one ``period`` apart."""
    out = []
    times = trajectory.times
    tol = trajectory.dt + 1e-12
    for j, t in enumerate(times):
        i = int(np.argmin(np.abs(times - (t - period))))
        if i != j and abs(times[i] - (t - period)) <= tol:
            d = np.max(np.abs(trajectory.states[j].entries - trajectory.states[i].entries))
            out.append({"t_from": float(times[i]), "t_to": float(t), "distance": float(d)})
    return out


def _classical_reference(params: SystemParams) -> dict | None:
    if params.lam == 0 or params.drive_amplitude == 0 or params.gamma <= 0:
        return None
    amps = steady_amplitudes(params, convention=CLASSICAL_CONVENTION)
    return {"convention": CLASSICAL_CONVENTION, "amplitudes": amps}


def build_report(config: ExperimentConfig, trajectory: Trajectory, records: list, files=None, figures=None) -> dict:
    continuity = continuity_table(records, trajectory)
    snaps = []
    for i, r in enumerate(records):
        snaps.append({
            "index": i,
            "t": r.t,
            "t_units": config.in_units(r.t),
            "file": None if files is None else str(files[i].name),
            "diagnostics": r.diagnostics,
            "regions": r.region_table(),
            "continuity": continuity.get(i),
        })
    report = {
        "config": config.summary(),
        "trajectory": {
            "n_snapshots": len(trajectory),
            "max_trace_drift": trajectory.max_trace_drift,
            "max_top_occupancy": trajectory.max_top_occupancy,
        },
        "snapshots": snaps,
        "strobe": [],
        "figures": figures or [],
    }
    if config.strobe_period:
        report["strobe"] = strobe_distances(trajectory, config.strobe_period)
    if config.system == "duffing":
        report["classical_reference"] = _classical_reference(config.params)
    return report


def _clean(value):
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.generic):
        return _clean(value.item())
    return value


def write_report(report: dict, out_dir: Path) -> Path:
    path = Path(out_dir) / REPORT_NAME
    path.write_text(json.dumps(_clean(report), indent=2, sort_keys=True))
    return path


def load_report(run_dir) -> dict:
    return json.loads((Path(run_dir) / REPORT_NAME).read_text())


def _title(config: ExperimentConfig, t: float, view: str) -> str:
    unit = "" if config.time_unit == "1" else f" {config.time_unit}"
    return f"{config.name}: t = {config.in_units(t):.4g}{unit}, J_{view}"


def run(
    config: ExperimentConfig,
    *,
    output_dir=None,
    write: bool = True,
    figures: bool = True,
    workers: int = 1,
    trajectory: Trajectory | None = None,
) -> RunResult:
    """Integrate ``config`` and analyse every snapshot.

    Snapshot post-processing is independent per time and may use a thread
    pool (``workers`` > 1); results are identical either way. Pass a
    precomputed ``trajectory`` to re-analyse without integrating again.
    """
    if trajectory is None:
        logger.info("integrating %s: dim %d, %d steps", config.name, config.truncation, round(config.t_final / config.dt))
        trajectory = integrate(config.initial_density(), config.params, config.t_final, config.dt, config.snapshot_times)

    def job(k):
        return analyse_snapshot(
            trajectory.states[k], float(trajectory.times[k]), config.params, config.grid,
            config.flow_views, config.region_threshold,
        )

    indices = range(len(trajectory))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            records = list(pool.map(job, indices))
    else:
        records = [job(k) for k in indices]

    out_dir = None
    files = figs = None
    if write:
        out_dir = resolve_output_dir(config, output_dir)
        (out_dir / "snapshots").mkdir(parents=True, exist_ok=True)
        files = [
            export_snapshot(r, out_dir / "snapshots" / f"snap_{k:04d}.wfs", extra={"t_units": config.in_units(r.t), "time_unit": config.time_unit})
            for k, r in enumerate(records)
        ]
        figs = []
        if figures:
            for t in config.render.figure_times:
                k = trajectory.index_of(t)
                for view in config.flow_views:
                    path = out_dir / "figures" / f"{config.name}_t{config.in_units(t):08.3f}_{view}.png"
                    render_figure(
                        records[k], view, path, vmax_fraction=config.render.vmax_fraction,
                        quiver_max=config.render.quiver_max, title=_title(config, records[k].t, view),
                    )
                    figs.append({"t": records[k].t, "view": view, "file": str(path.relative_to(out_dir))})
    report = build_report(config, trajectory, records, files, figs)
    if out_dir is not None:
        write_report(report, out_dir)
    return RunResult(config, trajectory, records, report, out_dir)


@dataclass(eq=False)
class StrobeResult:
    frames: list  # (t, path or None)
    distances: list = field(default_factory=list)


def strobe(config: ExperimentConfig, period: float, *, result: RunResult | None = None, view: str | None = None) -> StrobeResult:
    """Figures at every snapshot t = k * period, plus period-to-period distances.

    ``period`` is in dimensionless time. The distances are appended to the
    run report (and report.json rewritten when the run was persisted).
    """
    if period <= 0:
        raise ValueError("period must be positive")
    if result is None:
        result = run(config, figures=False)
    traj = result.trajectory
    tol = 0.5 * traj.dt + 1e-12
    k = np.rint(traj.times / period)
    on_beat = np.flatnonzero(np.abs(traj.times - k * period) <= tol)
    if on_beat.size == 0:
        raise ValueError(f"no snapshot falls on a multiple of the period {period:.6g}")
    view = view or config.flow_views[0]
    frames = []
    for i in on_beat:
        path = None
        if result.output_dir is not None:
            path = result.output_dir / "strobe" / f"frame_{int(k[i]):05d}.png"
            render_figure(
                result.records[i], view, path, vmax_fraction=config.render.vmax_fraction,
                quiver_max=config.render.quiver_max, title=_title(config, result.records[i].t, view),
            )
        frames.append((float(traj.times[i]), path))
    distances = []
    for a, b in zip(on_beat[:-1], on_beat[1:]):
        if k[b] - k[a] == 1:
            d = np.max(np.abs(traj.states[b].entries - traj.states[a].entries))
            distances.append({"t_from": float(traj.times[a]), "t_to": float(traj.times[b]), "distance": float(d), "period": period})
    result.report.setdefault("strobe_frames", []).extend(
        {"t": t, "file": None if p is None else str(p.relative_to(result.output_dir))} for t, p in frames
    )
    seen = {(e["t_from"], e["t_to"]) for e in result.report["strobe"]}
    result.report["strobe"].extend(d for d in distances if (d["t_from"], d["t_to"]) not in seen)
    if result.output_dir is not None:
        write_report(result.report, result.output_dir)
    return StrobeResult(frames, distances)
