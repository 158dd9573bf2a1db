"""Command-line entry point.

    wignerflow run <config-path | preset-name> [--out DIR] [--workers N] [--strobe]
    wignerflow render <snapshot.wfs> --view total --out fig.png
    wignerflow report <run-dir>
    wignerflow presets list

Exit codes: 0 success, 2 configuration error, 3 truncation failure, 4 I/O error.
The output directory may be overridden with WIGNERFLOW_OUTPUT_DIR.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, list_presets, load_config, load_preset
from .flow import FLOW_VIEWS
from .lindblad import TruncationError
from .snapshot import SnapshotFormatError, import_snapshot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TRUNCATION = 3
EXIT_IO = 4


def _load(target: str):
    path = Path(target)
    if path.suffix in (".yaml", ".yml") or path.exists():
        if not path.is_file():
            raise ConfigError(f"config file {target} not found")
        return load_config(path)
    return load_preset(target)


def cmd_run(args) -> int:
    from .runner import run, strobe

    config = _load(args.config)
    result = run(config, output_dir=args.out, workers=args.workers)
    if args.strobe:
        if config.strobe_period is None:
            raise ConfigError("--strobe needs strobe_period in the config")
        strobe(config, config.strobe_period, result=result)
    print(f"{config.name}: {len(result.records)} snapshots written to {result.output_dir}")
    return EXIT_OK


def cmd_render(args) -> int:
    from .render import render_figure

    data = import_snapshot(args.snapshot)
    if args.view not in data.views:
        raise ConfigError(f"view {args.view!r} not stored in {args.snapshot} (have {', '.join(data.views)})")
    extra = data.header.get("extra", {})
    title = None
    if "t_units" in extra:
        title = f"t = {extra['t_units']:.4g} {extra.get('time_unit', '')}, J_{args.view}"
    path = render_figure(data, args.view, args.out, vmax_fraction=args.vmax_fraction, title=title)
    print(path)
    return EXIT_OK


def _fmt(value, spec=".3e"):
    return "-" if value is None else format(value, spec)


def cmd_report(args) -> int:
    from .runner import load_report

    report = load_report(args.run_dir)
    if args.json:
        print(json.dumps(report, indent=2))
        return EXIT_OK
    cfg = report["config"]
    print(f"{cfg['name']} ({cfg['system']}), dim {cfg['truncation']}, time unit {cfg['time_unit']}")
    print(f"max trace drift {report['trajectory']['max_trace_drift']:.2e}, "
          f"max top occupancy {report['trajectory']['max_top_occupancy']:.2e}")
    print(f"{'t':>10} {'trace':>12} {'purity':>8} {'neg. vol':>11} {'regions':>7} {'continuity':>10}")
    for s in report["snapshots"]:
        d = s["diagnostics"]
        cont = s["continuity"]["residual"] if s["continuity"] else None
        print(f"{s['t_units']:10.3f} {d['trace']:12.9f} {d['purity']:8.4f} {d['negativity_volume']:11.3e} "
              f"{d['n_regions']:7d} {_fmt(cont, '10.3e'):>10}")
    for e in report.get("strobe", []):
        print(f"strobe {e['t_from']:.4f} -> {e['t_to']:.4f}: distance {e['distance']:.2e}")
    ref = report.get("classical_reference")
    if ref:
        amps = ", ".join(f"{a:.3f}" for a in ref["amplitudes"])
        print(f"classical steady amplitudes ({ref['convention']} damping): {amps}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in list_presets():
        cfg = load_preset(name)
        print(f"{name:6s} {cfg.system:8s} {cfg.initial_state}  t_final={cfg.in_units(cfg.t_final):g} {cfg.time_unit}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerflow", description="Wigner flow simulations of an open oscillator mode.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config or named preset")
    p.add_argument("config")
    p.add_argument("--out", default=None, help="output directory (overrides config and environment)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strobe", action="store_true", help="also emit strobe frames at the config's strobe_period")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("render", help="render a snapshot file")
    p.add_argument("snapshot")
    p.add_argument("--view", choices=FLOW_VIEWS, default="total")
    p.add_argument("--out", required=True)
    p.add_argument("--vmax-fraction", type=float, default=1.0)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("report", help="summarize a run directory")
    p.add_argument("run_dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("presets", help="shipped experiment presets")
    p.add_argument("action", choices=["list"])
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"truncation failure: {exc.diagnostic} = {exc.value:.3e} at t = {exc.t:.6g}", file=sys.stderr)
        return EXIT_TRUNCATION
    except (OSError, SnapshotFormatError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # remaining ValueErrors come from validating the experiment (dt, states, schedule)
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
