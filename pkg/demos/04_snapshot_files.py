"""
Run files, snapshot containers and the command line
===================================================

A small YAML experiment, run through the same code path as the CLI,
then read back from the .wfs snapshot files. The equivalent shell
session is::

    wignerflow run demo_output/small.yaml --strobe
    wignerflow report demo_output/small
    wignerflow render demo_output/small/snapshots/snap_0002.wfs --view diff --out diff.png
"""

from pathlib import Path

from wignerflow.cli import main
from wignerflow.negativity import negativity_volume
from wignerflow.snapshot import import_snapshot, payload_bytes, read_header

out = Path("demo_output")
out.mkdir(exist_ok=True)
cfg = out / "small.yaml"
cfg.write_text("""\
name: small
system: harmonic
initial_state: {kind: fock, n: 1}
params: {gamma: 0.05, temperature: 0.5}
truncation: 20
grid: {half_width: 5, n: 128}
time_unit: tau
dt: 0.005
t_final: 3
snapshot_times: [0, 0.99, 1, 1.01, 2, 3]
figure_times: [0, 1]
flow_views: [total, diff]
strobe_period: 1
output_dir: demo_output/small
""")

assert main(["run", str(cfg), "--strobe"]) == 0
assert main(["report", "demo_output/small"]) == 0

snap = out / "small" / "snapshots" / "snap_0002.wfs"
header, offset = read_header(snap)
print("arrays:", header["arrays"], "at byte", offset, "payload", payload_bytes(snap), "bytes")
data = import_snapshot(snap)
print("stored volume", data.diagnostics["negativity_volume"], "recomputed", negativity_volume(data.wigner))
for row in header["regions"]:
    print("region area", round(row["area"], 4), "rate terms", row["rate"])

assert main(["render", str(snap), "--view", "diff", "--out", str(out / "small_diff.png"), "--vmax-fraction", "0.5"]) == 0
