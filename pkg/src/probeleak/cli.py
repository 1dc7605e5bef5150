"""Command-line interface: one-off laws, sampling, decoding, sweeps, scans,
the coupling predictor, SVG rendering, and the HTTP service.

Exit codes are stable: 0 success, 1 input error (including bad flags),
2 capacity error, 3 internal-consistency error. Angles are radians unless
--pi-units is given, which multiplies angle-valued inputs by pi.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .analysis import blind_spot_scan, envelope, theta_star
from .decode import law_table, ml_decode, position_mean_matrix, per_position_decode
from .errors import CapacityError, InputError, InternalConsistencyError
from .fileio import curve_to_csv, read_histogram, read_sweep_config, write_json
from .laws import (
    DEFAULT_ORDER,
    GateSequence,
    ObservationLaw,
    StepOrder,
    exact_law,
    sample_histogram,
)
from .qcore import GateLabel
from .render import RenderSpec, render_heatmap
from .sweep import parse_results_csv, run_sweep_to_files


class _Parser(argparse.ArgumentParser):
    """argparse variant whose usage errors exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _angle(args, value: float) -> float:
    return value * math.pi if args.pi_units else value


def _order(tag: str) -> StepOrder:
    try:
        return StepOrder(tag)
    except ValueError:
        raise InputError(f"unknown step order {tag!r}; expected gncm or gcmn") from None


def _emit(args, text: str):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _cmd_law(args) -> int:
    seq = GateSequence.from_string(args.seq)
    law = exact_law(seq, _angle(args, args.theta), args.lam, _order(args.order))
    _emit(args, json.dumps(law.to_dict()))
    return 0


def _cmd_sample(args) -> int:
    seq = GateSequence.from_string(args.seq)
    law = exact_law(seq, _angle(args, args.theta), args.lam, _order(args.order))
    hist = sample_histogram(law, args.shots, args.seed)
    _emit(args, json.dumps(hist.to_dict(seed=args.seed)))
    return 0


def _cmd_decode(args) -> int:
    hist = read_histogram(args.hist)
    table = law_table(hist.depth, _angle(args, args.theta), args.lam, _order(args.order))
    if args.decoder == "ml":
        out = ml_decode(hist, table).to_dict()
    else:
        from .analysis import ClassMeans

        matrix = position_mean_matrix(table)
        means = [
            ClassMeans(t + 1, hist.depth,
                       {g: ObservationLaw(hist.depth, matrix[t, g.value]) for g in GateLabel})
            for t in range(hist.depth)
        ]
        out = {"sequence": str(per_position_decode(hist, means)),
               "log_likelihood": None, "runner_up_margin": None}
    _emit(args, json.dumps(out))
    return 0


def _cmd_sweep(args) -> int:
    config = read_sweep_config(args.config)
    csv_path = args.out or config.out
    if not csv_path:
        raise InputError("no output path: set 'out' in the config or pass --out")
    run_sweep_to_files(config, csv_path, jobs=args.jobs, timings=args.timings)
    print(csv_path)
    return 0


def _cmd_blindspots(args) -> int:
    try:
        lo, hi = (float(x) for x in args.window.split(","))
    except ValueError:
        raise InputError(f"--window expects 'LOW,HIGH', got {args.window!r}") from None
    scan = blind_spot_scan(
        (_angle(args, lo), _angle(args, hi)),
        grid_points=args.grid,
        depth=args.k,
        lam=args.lam,
    )
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(curve_to_csv(scan.thetas, scan.values))
    print(json.dumps({
        "angles": list(scan.angles),
        "min_separation": float(scan.values.min()),
        "window": [_angle(args, lo), _angle(args, hi)],
        "grid_points": args.grid,
    }))
    return 0


def _cmd_predictor(args) -> int:
    print(repr(theta_star(args.k)))
    return 0


def _cmd_envelope(args) -> int:
    thetas = np.linspace(_angle(args, args.theta_min), _angle(args, args.theta_max), args.grid)
    curve = envelope(args.k, thetas)
    _emit(args, curve_to_csv(curve.thetas, curve.values))
    return 0


def _cmd_render(args) -> int:
    with open(args.csv) as fh:
        results = parse_results_csv(fh.read())
    if args.overlay == "auto":
        star = theta_star(results[0].depth)
        overlays = (star, 2 * math.pi - star)
    elif args.overlay == "none":
        overlays = ()
    else:
        overlays = tuple(float(x) for x in args.overlay.split(","))
    spec = RenderSpec(cmap=args.cmap, vmin=args.vmin, vmax=args.vmax,
                      overlay_angles=overlays, inputs=(args.csv,), out=args.out)
    svg = render_heatmap(spec, results)
    with open(args.out, "w") as fh:
        fh.write(svg)
    print(args.out)
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def _add_angle_flags(p):
    p.add_argument("--theta", type=float, required=True, help="coupling angle in radians")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   help="per-step depolarizing rate in [0, 1]")
    p.add_argument("--order", choices=[o.value for o in StepOrder],
                   default=DEFAULT_ORDER.value, help="step order within a timestep")
    p.add_argument("--pi-units", action="store_true",
                   help="interpret angle inputs as multiples of pi")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="probeleak",
        description="Probe side-channel simulator: exact laws, sampling, "
        "decoding, sweeps, and rendering.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("law", help="print the exact observation law for a sequence",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--seq", required=True, help="comma-separated gates, e.g. G1,G3,G2")
    _add_angle_flags(p)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_law)

    p = sub.add_parser("sample", help="sample a finite-shot histogram from a law",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--seq", required=True, help="comma-separated gates, e.g. G1,G3,G2")
    _add_angle_flags(p)
    p.add_argument("--shots", type=int, required=True, help="number of shots (>= 1)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("decode", help="decode a histogram file to a gate sequence",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--hist", required=True, help="histogram JSON file")
    _add_angle_flags(p)
    p.add_argument("--decoder", choices=["ml", "perpos"], default="ml")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("sweep", help="run a sweep from a JSON config",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--config", required=True, help="SweepConfig JSON file")
    p.add_argument("--out", help="CSV output path (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--timings", action="store_true",
                   help="record measured wall_ms (breaks byte reproducibility)")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("blindspots", help="scan a coupling window for blind spots",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--window", required=True, help="scan window LOW,HIGH in radians")
    p.add_argument("--grid", type=int, default=4096, help="number of scan grid points")
    p.add_argument("--k", type=int, default=2, help="sequence depth")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--pi-units", action="store_true")
    p.add_argument("--out", help="also write the scanned curve as CSV (theta,value)")
    p.set_defaults(func=_cmd_blindspots)

    p = sub.add_parser("predictor", help="print the coupling-band predictor angle",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--k", type=int, required=True, help="sequence depth")
    p.set_defaults(func=_cmd_predictor)

    p = sub.add_parser("envelope", help="emit the leakage-proxy curve as CSV",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--k", type=int, required=True, help="sequence depth")
    p.add_argument("--grid", type=int, default=512, help="number of grid points")
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=2 * math.pi)
    p.add_argument("--pi-units", action="store_true")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_envelope)

    p = sub.add_parser("render", help="render a sweep CSV as an SVG cascade",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--csv", required=True, help="sweep results CSV")
    p.add_argument("--out", required=True, help="SVG output path")
    p.add_argument("--cmap", default="viridis", help="color map name")
    p.add_argument("--vmin", type=float, default=0.0)
    p.add_argument("--vmax", type=float, default=1.0)
    p.add_argument("--overlay", default="auto",
                   help="'auto' (predictor lines), 'none', or comma-separated angles")
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 2
    except InternalConsistencyError as exc:
        print(f"internal consistency error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
