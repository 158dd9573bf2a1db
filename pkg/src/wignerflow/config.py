"""Experiment configuration: YAML files, shipped presets and validation.

Times in a config are given in the unit named by ``time_unit``:
``tau`` (2 pi, one free oscillation period), ``tau_d`` (2 pi / omega_d,
one drive period) or ``1`` (bare dimensionless time). Everything is
converted to dimensionless time on load.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .flow import FLOW_VIEWS
from .fock import DensityMatrix, cat_state, coherent_state, fock_state
from .lindblad import SystemParams, thermal_occupation
from .wigner import PhaseSpaceGrid

SYSTEMS = ("harmonic", "duffing")
TIME_UNITS = ("tau", "tau_d", "1")
DEFAULT_QUIVER_MAX = 24


class ConfigError(ValueError):
    """The experiment description is incomplete or inconsistent."""


@dataclass(frozen=True)
class RenderSettings:
    vmax_fraction: float = 1.0  # colour scale clips at this fraction of max|W|
    quiver_max: int = DEFAULT_QUIVER_MAX
    figure_times: tuple = ()


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    name: str
    system: str
    initial_state: dict
    params: SystemParams
    truncation: int
    grid: PhaseSpaceGrid
    dt: float
    t_final: float
    snapshot_times: tuple
    flow_views: tuple = ("total",)
    output_dir: Path = Path("runs")
    time_unit: str = "1"
    time_scale: float = 1.0
    strobe_period: float | None = None
    region_threshold: float = 0.0
    render: RenderSettings = field(default_factory=RenderSettings)
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"system must be one of {SYSTEMS}, got {self.system!r}")
        if self.system == "harmonic" and not self.params.is_harmonic:
            raise ConfigError("harmonic system cannot have lam or drive_amplitude set")
        if self.truncation < 2:
            raise ConfigError("truncation must be >= 2")
        if self.dt <= 0 or self.t_final < 0:
            raise ConfigError("need dt > 0 and t_final >= 0")
        times = np.asarray(self.snapshot_times, dtype=float)
        if times.size == 0:
            raise ConfigError("snapshot_times is empty")
        if np.any(np.diff(times) <= 0):
            raise ConfigError("snapshot_times must be strictly increasing")
        if times[0] < 0 or times[-1] > self.t_final + 0.5 * self.dt:
            raise ConfigError("snapshot_times must lie in [0, t_final]")
        bad = [v for v in self.flow_views if v not in FLOW_VIEWS]
        if bad:
            raise ConfigError(f"unknown flow views {bad}; choose from {FLOW_VIEWS}")
        if self.render.figure_times and not self.flow_views:
            raise ConfigError("flow_views must be non-empty when figures are requested")
        for t in self.render.figure_times:
            if np.min(np.abs(times - t)) > 0.5 * self.dt:
                raise ConfigError(f"figure time {t:.6g} is not a snapshot time")
        if self.region_threshold > 0:
            raise ConfigError("region_threshold must be <= 0")

    def initial_density(self) -> DensityMatrix:
        spec = self.initial_state
        kind = spec["kind"]
        if kind == "fock":
            return fock_state(self.truncation, int(spec["n"]))
        if kind == "coherent":
            return coherent_state(self.truncation, _complex(spec.get("alpha", 0.0)))
        if kind == "cat":
            return cat_state(self.truncation, float(spec["separation"]))
        raise ConfigError(f"unknown initial state kind {kind!r}")

    def in_units(self, t: float) -> float:
        return t / self.time_scale

    def integration_key(self) -> tuple:
        """Everything that determines the trajectory (not the post-processing)."""
        return (
            tuple(sorted(self.initial_state.items())),
            tuple(sorted(self.params.as_dict().items())),
            self.truncation,
            self.dt,
            self.t_final,
            tuple(self.snapshot_times),
        )

    def with_overrides(self, **changes) -> "ExperimentConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return ExperimentConfig(**values)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "system": self.system,
            "initial_state": dict(self.initial_state),
            "params": self.params.as_dict(),
            "truncation": self.truncation,
            "grid": self.grid.as_dict(),
            "dt": self.dt,
            "t_final": self.t_final,
            "time_unit": self.time_unit,
            "time_scale": self.time_scale,
            "flow_views": list(self.flow_views),
            "strobe_period": self.strobe_period,
        }


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        re, im = value
        return complex(re, im)
    if isinstance(value, str):
        return complex(value.replace(" ", ""))
    return complex(value)


def _time_scale(unit: str, params: SystemParams) -> float:
    if unit == "tau":
        return 2.0 * np.pi
    if unit == "tau_d":
        if params.drive_frequency <= 0:
            raise ConfigError("tau_d needs a positive drive_frequency")
        return 2.0 * np.pi / params.drive_frequency
    if unit == "1":
        return 1.0
    raise ConfigError(f"time_unit must be one of {TIME_UNITS}, got {unit!r}")


def _params(raw: dict) -> SystemParams:
    raw = dict(raw or {})
    if "temperature" in raw:
        if "nbar" in raw:
            raise ConfigError("give either temperature or nbar, not both")
        raw["nbar"] = thermal_occupation(float(raw.pop("temperature")))
    if "lambda" in raw:
        raw["lam"] = raw.pop("lambda")
    unknown = set(raw) - set(SystemParams.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown params {sorted(unknown)}")
    try:
        return SystemParams(**{k: float(v) for k, v in raw.items()})
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _grid(raw: dict | None) -> PhaseSpaceGrid:
    raw = dict(raw or {})
    try:
        if "half_width" in raw or "n" in raw:
            return PhaseSpaceGrid.square(float(raw.get("half_width", 6.0)), int(raw.get("n", 256)))
        return PhaseSpaceGrid(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc


def _schedule(raw) -> list[float]:
    """A list of times, or {start, stop, step} for an evenly spaced schedule."""
    if isinstance(raw, dict):
        start, stop, step = float(raw["start"]), float(raw["stop"]), float(raw["step"])
        n = int(round((stop - start) / step))
        return [start + k * step for k in range(n + 1)]
    return [float(t) for t in raw]


def config_from_dict(raw: dict, *, name: str | None = None) -> ExperimentConfig:
    raw = copy.deepcopy(raw)
    try:
        system = raw["system"]
        params = _params(raw.get("params"))
        unit = str(raw.get("time_unit", "1"))
        scale = _time_scale(unit, params)
        initial = dict(raw["initial_state"])
        if "kind" not in initial:
            raise ConfigError("initial_state needs a 'kind'")
        render_raw = dict(raw.get("render") or {})
        figure_times = tuple(scale * t for t in _schedule(raw.get("figure_times", [])))
        render = RenderSettings(
            vmax_fraction=float(render_raw.get("vmax_fraction", 1.0)),
            quiver_max=int(render_raw.get("quiver_max", DEFAULT_QUIVER_MAX)),
            figure_times=figure_times,
        )
        strobe = raw.get("strobe_period")
        return ExperimentConfig(
            name=name or str(raw.get("name", "experiment")),
            system=system,
            initial_state=initial,
            params=params,
            truncation=int(raw["truncation"]),
            grid=_grid(raw.get("grid")),
            dt=scale * float(raw["dt"]),
            t_final=scale * float(raw["t_final"]),
            snapshot_times=tuple(scale * t for t in _schedule(raw["snapshot_times"])),
            flow_views=tuple(raw.get("flow_views", ["total"])),
            output_dir=Path(raw.get("output_dir", Path("runs") / (name or raw.get("name", "experiment")))),
            time_unit=unit,
            time_scale=scale,
            strobe_period=None if strobe is None else scale * float(strobe),
            region_threshold=float(raw.get("region_threshold", 0.0)),
            render=render,
            source=raw,
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at top level")
    return config_from_dict(raw, name=raw.get("name", path.stem))


def _preset_dir():
    return resources.files("wignerflow") / "presets"


def list_presets() -> list[str]:
    return sorted(p.name[: -len(".yaml")] for p in _preset_dir().iterdir() if p.name.endswith(".yaml"))


def load_preset(name: str) -> ExperimentConfig:
    entry = _preset_dir() / f"{name}.yaml"
    if not entry.is_file():
        raise ConfigError(f"no preset named {name!r}; available: {', '.join(list_presets())}")
    raw = yaml.safe_load(entry.read_text())
    return config_from_dict(raw, name=name)
