"""Command-line front end: ``underlay {tradeoff,sensitivity,validate,solve}``.

Every command writes CSV (to ``--out`` or stdout).  When ``--out`` is given
a JSON line describing the run is appended to ``manifest.jsonl`` in the same
directory and the CSV names that manifest entry in its first line.  The run
id hashes the command, resolved scenario and arguments, so repeated runs
produce byte-identical CSV files.

Exit codes: 0 ok, 1 validation-suite failure, 2 input error, 3 numeric error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from . import analytic, tradeoff, validation
from ._quadrature import QuadratureError
from .params import DEFAULTS, ChannelModel, load_scenario, validate
from .specfun import ConvergenceError

EXIT_OK, EXIT_CHECKS_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_SEED = 7
DEFAULT_GRIDS = {ChannelModel.PATH_LOSS: "2:20:0.5", ChannelModel.FADING: "log:0.01:10:31"}
DEFAULT_VALUES = {"snr": "-15:10:1", "accuracy": "0.015:0.055:0.005"}


class InputError(ValueError):
    pass


def _version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


# -- argument parsing helpers ---------------------------------------------------

def parse_range(text, *, what="range"):
    """``lo:hi:step`` (inclusive), ``log:lo:hi:points`` or ``a,b,c``."""
    text = text.strip()
    try:
        if text.startswith("log:"):
            lo, hi, pts = text[4:].split(":")
            lo, hi, pts = float(lo), float(hi), int(pts)
            if pts < 1 or lo <= 0 or hi < lo:
                return []
            return [float(v) for v in np.geomspace(lo, hi, pts)]
        if ":" in text:
            lo, hi, step = (float(v) for v in text.split(":"))
            if step <= 0 or hi < lo:
                return []
            count = int(math.floor((hi - lo) / step + 1e-9)) + 1
            # rounding keeps 2 + 3 * 0.5 from drifting to 3.4999999999999996
            return [round(lo + i * step, 12) for i in range(count)]
        if not text:
            return []
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise InputError(f"malformed {what} {text!r}") from None


def _resolve_params(args):
    params = load_scenario(args.scenario) if args.scenario else DEFAULTS
    if args.model:
        params = params.with_(channel=ChannelModel.parse(args.model))
    return validate(params)


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else format(float(v), ".10g")
    return str(v)


# -- manifest -------------------------------------------------------------------

class Run:
    """Collects output paths and appends the manifest entry on completion."""

    def __init__(self, command, args, params):
        self.command = command
        self.args = args
        self.params = params
        self.started = time.perf_counter()
        self.outputs = []
        ident = {
            "command": command,
            "params": params.to_db(),
            "args": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "plot")},
        }
        digest = hashlib.sha256(json.dumps(ident, sort_keys=True, default=str).encode()).hexdigest()
        self.run_id = digest[:16]

    @property
    def manifest_path(self):
        return Path(self.args.out).parent / "manifest.jsonl" if self.args.out else None

    def header(self, units):
        ref = f"{self.manifest_path.name}#{self.run_id}" if self.args.out else "none"
        return f"# underlay {self.command}; {units}; manifest={ref}\n"

    def emit(self, text, suffix=None):
        if not self.args.out:
            sys.stdout.write(text)
            return None
        path = Path(self.args.out)
        if suffix:
            path = path.with_suffix(suffix)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.outputs.append(str(path))
        return path

    def figure_path(self):
        return Path(self.args.out).with_suffix(".png")

    def finish(self):
        if not self.args.out:
            return
        entry = {
            "run_id": self.run_id,
            "command": self.command,
            "scenario": str(self.args.scenario) if self.args.scenario else None,
            "params": self.params.to_db(),
            "seed": getattr(self.args, "seed", None),
            "outputs": self.outputs,
            "version": _version(),
            "duration_s": round(time.perf_counter() - self.started, 3),
            "units": "tau in ms; powers in mW; rates in bits/s/Hz; probabilities and K linear",
        }
        with open(self.manifest_path, "a") as fh:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


def _require_plot_target(args):
    if getattr(args, "plot", False) and not args.out:
        raise InputError("--plot needs --out so the figure has a place to go")


# -- commands ---------------------------------------------------------------------

TRADEOFF_COLUMNS = ["tau_ms", "n", "k", "pc", "pc_minus3db", "pc_plus3db", "e_rs", "conventional_rate"]


def _solution_fields(sol):
    out = {
        "delta_db": sol.delta_sigma_db,
        "feasible": sol.feasible,
        "tau_star_ms": sol.tau_star * 1e3 if sol.feasible else None,
        "max_e_rs": sol.max_e_rs,
        "beta": sol.beta,
        "pc_star": sol.pc_star,
    }
    if sol.pc_saturation is not None:
        out["pc_saturation"] = sol.pc_saturation
        out["regime_boundary_ms"] = sol.regime_boundary_tau * 1e3
    return out


def cmd_tradeoff(args):
    params = _resolve_params(args)
    _require_plot_target(args)
    model = params.channel
    grid = parse_range(DEFAULT_GRIDS[model] if args.grid is None else args.grid, what="grid")
    if not grid:
        raise InputError("the tau grid is empty")
    taus = [g * 1e-3 for g in grid]
    delta = float(args.uncertainty_db)
    if not 0.0 <= delta <= 10.0:
        raise InputError("--uncertainty-db must lie in [0, 10]")
    run = Run("tradeoff", args, params)
    try:
        mid = tradeoff.sweep(params, model, taus)
        low = tradeoff.sweep(params, model, taus, delta_sigma_db=-delta)
        high = tradeoff.sweep(params, model, taus, delta_sigma_db=delta)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    conv = analytic.conventional_rate(params, model)
    rows = []
    for p, lo, hi in zip(mid, low, high):
        rows.append({"tau_ms": p.tau * 1e3, "n": p.n, "k": p.k_factor, "pc": p.pc,
                     "pc_minus3db": lo.pc, "pc_plus3db": hi.pc, "e_rs": p.e_rs,
                     "conventional_rate": conv})
    solutions = tradeoff.bounds(params, model, rho_db=delta) if delta else (tradeoff.solve(params, model),)

    buf = io.StringIO()
    buf.write(run.header(f"tau_ms in ms; k, pc linear; e_rs and conventional_rate in bits/s/Hz; "
                         f"pc_minus3db/pc_plus3db at noise offset -/+{delta:g} dB"))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRADEOFF_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in TRADEOFF_COLUMNS])
    for sol in solutions:
        buf.write("#solution," + ",".join(f"{k}={_fmt(v)}" for k, v in _solution_fields(sol).items()) + "\n")
    failed = [p for p in mid + low + high if p.failed]
    for p in failed:
        buf.write(f"#point_error,tau_ms={_fmt(p.tau * 1e3)},delta_db={_fmt(p.delta_sigma_db)},{p.error}\n")
    run.emit(buf.getvalue())
    if args.plot:
        from . import plotting
        nominal = next(s for s in solutions if s.delta_sigma_db == 0.0)
        run.outputs.append(str(plotting.plot_tradeoff(rows, nominal, run.figure_path(), delta)))
    run.finish()
    return EXIT_OK


SENSITIVITY_COLUMNS = ["axis_value", "pc_bar", "tau_star_ms", "max_e_rs", "beta", "feasible"]


def cmd_sensitivity(args):
    params = _resolve_params(args)
    _require_plot_target(args)
    if args.axis not in tradeoff.SENSITIVITY_AXES:
        raise InputError(f"unknown axis {args.axis!r}; expected one of {', '.join(tradeoff.SENSITIVITY_AXES)}")
    values = parse_range(DEFAULT_VALUES[args.axis] if args.values is None else args.values, what="values")
    pc_bars = parse_range(args.pc_bars, what="pc-bars")
    if not values or not pc_bars:
        raise InputError("empty value or pc_bar list")
    if any(not 0.0 <= b < 1.0 for b in pc_bars):
        raise InputError("pc_bar values must lie in [0, 1)")
    run = Run("sensitivity", args, params)
    rows = []
    for pcb in pc_bars:
        results = tradeoff.sensitivity(params, params.channel, args.axis, values, pc_bar=pcb)
        for v, sol in results:
            rows.append({"axis_value": v, "pc_bar": pcb,
                         "tau_star_ms": sol.tau_star * 1e3 if sol.feasible else None,
                         "max_e_rs": sol.max_e_rs, "beta": sol.beta, "feasible": sol.feasible})
    buf = io.StringIO()
    unit = "axis_value in dB (received SNR)" if args.axis == "snr" else "axis_value is mu (linear)"
    buf.write(run.header(f"axis={args.axis}; {unit}; tau_star_ms in ms; max_e_rs and beta in bits/s/Hz"))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SENSITIVITY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SENSITIVITY_COLUMNS])
    run.emit(buf.getvalue())
    if args.plot:
        from . import plotting
        run.outputs.append(str(plotting.plot_sensitivity(rows, args.axis, run.figure_path())))
    run.finish()
    return EXIT_OK


def cmd_validate(args):
    params = _resolve_params(args)
    _require_plot_target(args)
    if args.frames < validation.MIN_FRAMES:
        raise InputError(f"--frames must be >= {validation.MIN_FRAMES}")
    if args.k_scale <= 0:
        raise InputError("--k-scale must be positive")
    run = Run("validate", args, params)
    keep = {} if args.plot else None
    checks = validation.run_checks(params, params.channel, frames=args.frames, seed=args.seed,
                                   k_scale=args.k_scale, workers=args.workers, keep=keep)
    report = validation.format_report(checks)
    sys.stdout.write(report)
    if args.out:
        run.emit(run.header("statistic and threshold share units per check (KS distance, z-score, "
                            "probability)") + validation.checks_csv(checks))
    if args.plot:
        from . import plotting
        curves = {}
        for n, (rep, dist) in keep.items():
            cdf, grid = validation.analytic_pp_cdf_interp(dist, rep.pp_sorted)
            x = np.geomspace(rep.pp_sorted[0], rep.pp_sorted[-1], 400)
            curves[n] = (x, rep.ecdf_pp(x), cdf(x))
        run.outputs.append(str(plotting.plot_ecdf(curves, run.figure_path())))
    run.finish()
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECKS_FAILED


def cmd_solve(args):
    params = _resolve_params(args)
    run = Run("solve", args, params)
    delta = float(args.uncertainty_db)
    if not 0.0 <= delta <= 10.0:
        raise InputError("--uncertainty-db must lie in [0, 10]")
    sols = tradeoff.bounds(params, params.channel, rho_db=delta) if delta else (tradeoff.solve(params),)
    fields = list(_solution_fields(sols[0]).keys())
    for s in sols[1:]:
        fields += [k for k in _solution_fields(s) if k not in fields]
    buf = io.StringIO()
    buf.write(run.header("tau_star_ms in ms; max_e_rs and beta in bits/s/Hz"))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields + ["conventional_rate"])
    conv = analytic.conventional_rate(params)
    for s in sols:
        f = _solution_fields(s)
        w.writerow([_fmt(f.get(k)) for k in fields] + [_fmt(conv)])
    run.emit(buf.getvalue())
    run.finish()
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario file (key = value, dB units)")
    common.add_argument("--model", choices=["pathloss", "fading"],
                        help="channel model (default: the scenario's)")
    common.add_argument("--out", help="CSV output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="underlay",
                                     description="Estimation-throughput tradeoff for underlay spectrum sharing.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tradeoff", parents=[common], help="sweep the estimation time")
    p.add_argument("--grid", help="tau grid in ms: lo:hi:step or log:lo:hi:points")
    p.add_argument("--uncertainty-db", type=float, default=3.0,
                   help="noise-uncertainty offset for the bound columns (dB, default 3)")
    p.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    p.set_defaults(func=cmd_tradeoff)

    p = sub.add_parser("sensitivity", parents=[common], help="maximum throughput along one axis")
    p.add_argument("--axis", default="snr", help="snr (gamma in dB) or accuracy (mu)")
    p.add_argument("--values", help="axis values: lo:hi:step, log:lo:hi:points or a,b,c")
    p.add_argument("--pc-bars", default="0.92,0.95,0.97", help="confidence targets, comma separated")
    p.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("validate", parents=[common], help="analytic vs Monte Carlo check suite")
    p.add_argument("--frames", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--k-scale", type=float, default=1.0,
                   help="multiply K before simulating (deliberate corruption for testing)")
    p.add_argument("--plot", action="store_true", help="also write a PNG next to the CSV")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", parents=[common], help="optimal estimation time")
    p.add_argument("--uncertainty-db", type=float, default=0.0,
                   help="also solve at -/+ this noise offset (dB)")
    p.set_defaults(func=cmd_solve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        # InputError and ParamsError are ValueErrors; OSError covers unreadable scenario files
        print(f"underlay {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (QuadratureError, ConvergenceError, ArithmeticError, FloatingPointError) as exc:
        print(f"underlay {args.command}: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
