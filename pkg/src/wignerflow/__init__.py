"""Wigner functions and Wigner flows of a damped, driven oscillator mode."""

from .classical import amplitude_scan, classical_rhs, steady_amplitudes
from .config import ConfigError, ExperimentConfig, list_presets, load_config, load_preset
from .flow import (
    FLOW_VIEWS,
    FlowDecomposition,
    continuity_residual,
    divergence,
    flow_damp,
    flow_decomposition,
    flow_diff,
    flow_duffing,
    flow_harmonic,
    flow_sys,
)
from .fock import (
    DensityMatrix,
    FockSpace,
    annihilation,
    cat_state,
    coherent_state,
    creation,
    fock_state,
    momentum,
    number,
    position,
    thermal_state,
)
from .lindblad import (
    SystemParams,
    Trajectory,
    TruncationError,
    hamiltonian,
    integrate,
    lindblad_rhs,
    steady_state_check,
    thermal_occupation,
)
from .negativity import (
    NegativeRegion,
    NegativityRate,
    find_negative_regions,
    first_negativity_time,
    negativity_rate,
    negativity_volume,
    rate_consistency_check,
)
from .snapshot import SnapshotRecord, export_snapshot, import_snapshot
from .wigner import PhaseSpaceGrid, ScalarField, VectorField, marginals, wigner_transform

__version__ = "0.1.0"


def __getattr__(name):
    # runner and render pull in matplotlib; load them only when asked for
    if name in ("run", "strobe", "RunResult"):
        from . import runner

        return getattr(runner, name)
    if name == "render_figure":
        from .render import render_figure

        return render_figure
    raise AttributeError(f"module 'wignerflow' has no attribute {name!r}")
