"""Static figures: Wigner density with a quiver of one flow view."""

from __future__ import annotations

import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .config import DEFAULT_QUIVER_MAX  # noqa: E402

# RdBu runs red -> white -> blue, so with a symmetric norm W > 0 is blue and W < 0 red.
CMAP = "RdBu"


def quiver_stride(n: int, max_arrows: int = DEFAULT_QUIVER_MAX) -> int:
    return max(1, int(np.ceil(n / max_arrows)))


def _nice(value: float) -> float:
    """Round down to 1, 2 or 5 times a power of ten."""
    if value <= 0:
        return 1.0
    exp = np.floor(np.log10(value))
    mant = value / 10**exp
    step = 5.0 if mant >= 5 else 2.0 if mant >= 2 else 1.0
    return float(step * 10**exp)


def color_limit(w: np.ndarray, vmax_fraction: float = 1.0) -> float:
    vmax = float(np.max(np.abs(w))) * vmax_fraction
    return vmax if vmax > 0 else 1.0


def render_figure(record, view: str, path, *, vmax_fraction: float = 1.0, quiver_max: int = DEFAULT_QUIVER_MAX, title=None) -> Path:
    """Write a PNG (or any matplotlib format, by suffix) of W with the ``view`` flow.

    ``record`` is a SnapshotRecord or a SnapshotData read back from disk.
    The colour scale is symmetric about zero and clipped at
    ``vmax_fraction * max|W|``; the limits are stored in the image metadata.
    """
    j = record.flow(view)
    w = record.wigner
    g = w.grid
    vmax = color_limit(w.values, vmax_fraction)

    fig, ax = plt.subplots(figsize=(5.2, 5.0), dpi=120)
    ax.imshow(
        w.values.T, origin="lower", extent=(g.x_min, g.x_max, g.p_min, g.p_max),
        cmap=CMAP, vmin=-vmax, vmax=vmax, interpolation="bilinear", aspect="equal",
    )
    sx, sp = quiver_stride(g.nx, quiver_max), quiver_stride(g.n_p, quiver_max)
    off_x, off_p = sx // 2, sp // 2
    xs, ps = g.x[off_x::sx], g.p[off_p::sp]
    jx, jp = j.jx[off_x::sx, off_p::sp], j.jp[off_x::sx, off_p::sp]
    mag = float(np.max(np.hypot(jx, jp)))
    ref = _nice(mag) if mag > 0 else 1.0
    q = ax.quiver(xs, ps, jx.T, jp.T, color="k", scale=ref * 12, scale_units="width", width=0.003)
    ax.quiverkey(q, 0.1, 0.94, ref, f"|J| = {ref:.3g}", labelpos="E", coordinates="axes", color="k")

    side = 1.0
    ax.add_patch(Rectangle((g.x_max - 0.6 - side, g.p_min + 0.6), side, side, fill=False, lw=1.2, ec="k"))
    ax.set_xlabel("x")
    ax.set_ylabel("p")
    ax.set_xlim(g.x_min, g.x_max)
    ax.set_ylim(g.p_min, g.p_max)
    ax.set_title(title if title is not None else f"t = {record.t:.4g}, J_{view}")

    meta = {
        "t": record.t,
        "view": view,
        "vmin": -vmax,
        "vmax": vmax,
        "vmax_fraction": vmax_fraction,
        "quiver_stride": [sx, sp],
        "arrow_reference": ref,
        "colormap": CMAP,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    save_kw = {}
    if path.suffix.lower() == ".png":
        save_kw["metadata"] = {"Description": json.dumps(meta)}
    fig.savefig(path, **save_kw)
    plt.close(fig)
    return path


def figure_metadata(path) -> dict:
    """Normalization metadata stored by :func:`render_figure` in a PNG."""
    from PIL import Image

    with Image.open(path) as im:
        return json.loads(im.info["Description"])
