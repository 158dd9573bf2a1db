"""
Wigner functions of a few reference states
==========================================

Fock, coherent and cat states on the standard 256 x 256 grid over
[-6, 6]^2, with their negative regions and marginals.
"""

from pathlib import Path

import numpy as np

from wignerflow import PhaseSpaceGrid, SystemParams, cat_state, coherent_state, fock_state, wigner_transform
from wignerflow.negativity import find_negative_regions, negativity_volume
from wignerflow.render import render_figure
from wignerflow.runner import analyse_snapshot
from wignerflow.wigner import marginals

out = Path("demo_output")
out.mkdir(exist_ok=True)
grid = PhaseSpaceGrid()

# N=2: positive centre, negative annulus, positive outer ring
w2 = wigner_transform(fock_state(40, 2), grid)
(annulus,) = find_negative_regions(w2)
print(f"N=2 annulus: area {annulus.area:.4f} (pi*sqrt(2) = {np.pi * np.sqrt(2):.4f}), {annulus.n_loops} boundary loops")
print(f"N=2 negativity volume {negativity_volume(w2):.4f}")

# the x marginal is an ordinary probability density even when W is not
xm, _ = marginals(w2)
print(f"x marginal: min {xm.min():.2e}, integral {np.sum(xm) * grid.dx:.6f}")

# a coherent state is a displaced Gaussian, nowhere negative
wc = wigner_transform(coherent_state(40, 1.5 - 0.5j), grid)
print(f"coherent: {len(find_negative_regions(wc))} negative regions, max W {wc.values.max():.4f} (1/pi = {1 / np.pi:.4f})")

# an even cat with peaks at x = +-3 and fringes between them
# (its tails reach about 2e-5 at the grid edge, which triggers a boundary warning)
cat = cat_state(40, 6.0)
wcat = wigner_transform(cat, grid)
print(f"cat: {len(find_negative_regions(wcat))} negative fringes, volume {negativity_volume(wcat):.4f}")

for name, state in (("fock2", fock_state(40, 2)), ("cat", cat)):
    rec = analyse_snapshot(state, 0.0, SystemParams(gamma=0.01), grid, ("total",))
    print("wrote", render_figure(rec, "total", out / f"{name}.png", title=f"{name}, t = 0"))
