"""Command-line interface: ``randepth depth|bound|plan|simulate``.

Exit status is 0 on success (an unachievable plan included), 2 on invalid
input or arguments and 1 on an unexpected internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import bounds as B
from . import sim
from .depth import (
    ProjectionDepthSpec,
    approx_projection_depths,
    empirical_counts,
    exact_projection_depth,
)
from .io import InputError, iter_points, read_model, read_points
from .models import Dataset, GaussianStd, PSymmetric, UniformSphere
from .sphere import sample_directions

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE = 0, 1, 2

QUERY_CHUNK = 4096


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(float(t)) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _count(text: str) -> int:
    """Integer flag that also accepts 1e5-style literals."""
    try:
        v = float(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from exc
    if v != int(v):
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


class Writer:
    """Emits rows as CSV or JSON with a fixed column order."""

    def __init__(self, columns, fmt: str, precision: int, out, comment: Optional[str] = None, fixed: bool = False):
        self.columns = list(columns)
        self.fixed = fixed
        self.fmt = fmt
        self.precision = precision
        self.out = out
        self.records = []
        self.comment = comment
        self._started = False
        if fmt == "csv":
            self._csv = csv.writer(out, lineterminator="\n")

    def _start(self):
        # the header goes out with the first row, so early input errors leave stdout empty
        if self.fmt == "csv" and not self._started:
            if self.comment:
                self.out.write(f"# {self.comment}\n")
            self._csv.writerow(self.columns)
        self._started = True

    def _num(self, v: float) -> str:
        if self.fixed and math.isfinite(v):
            return f"{v:.{self.precision}f}"
        return format_number(v, self.precision)

    def _cell(self, v):
        if v is None:
            return "---"
        if isinstance(v, (float, np.floating)):
            return self._num(float(v))
        return v

    def row(self, values):
        self._start()
        if self.fmt == "csv":
            self._csv.writerow([self._cell(v) for v in values])
        else:
            rec = {}
            for k, v in zip(self.columns, values):
                if isinstance(v, (float, np.floating)):
                    # same rounding as the CSV cells, so the two formats agree
                    v = float(self._num(float(v))) if math.isfinite(v) else None
                elif isinstance(v, np.integer):
                    v = int(v)
                rec[k] = v
            self.records.append(rec)

    def close(self, meta: Optional[dict] = None):
        self._start()
        if self.fmt == "json":
            payload = {"columns": self.columns, "rows": self.records}
            if meta:
                payload["meta"] = meta
            json.dump(payload, self.out, indent=1)
            self.out.write("\n")


def format_number(v: float, precision: int) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{precision}g}"


def _writer(args, columns, comment=None):
    return Writer(columns, args.format, args.precision, sys.stdout, comment)


# --------------------------------------------------------------------------
# depth


def cmd_depth(args) -> int:
    if args.n < 1:
        raise InputError("--n must be positive")
    if args.kind == "projection" and args.k < 1:
        raise InputError("--k must be a positive integer")
    if args.data:
        target = Dataset(read_points(args.data, args.header))
        model = None
    else:
        model = read_model(args.model)
        target = model
    d = target.d
    if d < 2:
        raise InputError("points must have at least two coordinates")
    dirs = sample_directions(args.n, d, args.seed)
    spec = ProjectionDepthSpec(k=args.k)
    if model is not None and args.kind == "projection":
        try:
            exact_projection_depth(model, np.zeros(d), spec)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    cols = ["index", "depth", "n", "seed"] + (["exact", "gap"] if model is not None else [])
    w = _writer(args, cols)

    def flush(chunk, start):
        X = np.vstack(chunk)
        if args.kind == "halfspace":
            if model is None:
                # integer counts avoid rounding in the empirical depth
                vals = empirical_counts(target, X, dirs.directions).min(axis=1) / target.N
            else:
                vals = target.phi_matrix(X, dirs.directions).min(axis=1)
            exact = model.exact_depths(X) if model is not None else None
        else:
            vals = approx_projection_depths(target, X, dirs, spec)
            exact = np.array([exact_projection_depth(model, x, spec) for x in X]) if model is not None else None
        for i in range(X.shape[0]):
            row = [start + i, float(vals[i]), args.n, args.seed]
            if exact is not None:
                row += [float(exact[i]), float(vals[i] - exact[i])]
            w.row(row)

    chunk, start = [], 0
    for x in iter_points(args.query, args.header, d):
        chunk.append(x)
        if len(chunk) == QUERY_CHUNK:
            flush(chunk, start)
            start += len(chunk)
            chunk = []
    if chunk:
        flush(chunk, start)
    elif start == 0:
        raise InputError(f"{args.query}: no query rows")
    w.close({"n": args.n, "seed": args.seed, "kind": args.kind})
    return EXIT_OK


# --------------------------------------------------------------------------
# bound and plan


def _modulus_for(name: str, d: int, model, p: float) -> B.Modulus:
    if name == "ellipt1":
        return B.Elliptical1()
    if name == "ellipt2":
        return B.Elliptical2()
    if name in ("psym1", "psym2"):
        if isinstance(model, PSymmetric):
            p = model.p
        return (B.PSym1 if name == "psym1" else B.PSym2)(p, d)
    if name == "tight":
        if model is None:
            raise InputError("the tight modulus needs --model")
        try:
            return B.Tight(model.with_dimension(d))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    if name == "default":
        if model is None:
            raise InputError("the default modulus needs --model")
        try:
            return B.default_modulus(model.with_dimension(d))
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    raise InputError(f"unknown modulus {name!r}")


def cmd_bound(args) -> int:
    if args.table1:
        n_list = args.n_list or list(B.TABLE1_N)
        d_list = args.d_list or list(B.TABLE1_D)
        prec = args.precision if args.precision_set else 5
        cols = ["block", "n"] + [f"d={d}" for d in d_list]
        # fixed decimals, as in the published table
        w = Writer(cols, args.format, prec, sys.stdout, fixed=True)
        for label, n, vals in B.table1(n_list, d_list):
            w.row([label, n] + vals)
        w.close()
        return EXIT_OK
    model = read_model(args.model) if args.model else None
    n_list = args.n_list or [10**2, 10**3, 10**4, 10**5]
    d_list = args.d_list or ([model.d] if model is not None else [2, 3, 5, 10, 20])
    for n in n_list:
        if n < B.MIN_N:
            raise InputError(f"n must be at least {B.MIN_N}")
    mods = {d: _modulus_for(args.modulus, d, model, args.p) for d in d_list}
    w = _writer(args, ["modulus", "n"] + [f"d={d}" for d in d_list])
    for n in n_list:
        w.row([args.modulus, n] + [B.error_bound(n, d, mods[d]).bound for d in d_list])
    w.close()
    return EXIT_OK


def cmd_plan(args) -> int:
    if not 0 < args.eps < 0.5:
        raise InputError("--eps must lie in (0, 1/2)")
    if args.d < 2:
        raise InputError("--d must be at least 2")
    if args.n_max < B.MIN_N:
        raise InputError(f"--n-max must be at least {B.MIN_N}")
    model = read_model(args.model) if args.model else None
    m = _modulus_for(args.modulus, args.d, model, args.p)
    res = B.plan_directions(args.eps, args.d, m, args.n_max)
    w = _writer(args, ["eps", "d", "modulus", "n", "bound", "n_max"])
    w.row([args.eps, args.d, res.modulus, res.n_required if res.achievable else "unachievable", res.achieved_bound, res.n_max])
    w.close()
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate

_DEFAULT_GRID = {
    "figure4": [100, 300, 1000],
    "figure6": [50, 100, 200, 300, 500, 750, 1000],
    "spacing": [1000, 10000, 100000],
    "atomic": [10, 100, 1000, 10000, 100000],
    "outlyingness": [100, 1000, 10000],
}


def _emit_report(args, rep: sim.SimReport) -> None:
    comment = " ".join(f"{k}={v}" for k, v in rep.meta.items() if isinstance(v, (int, float, str)))
    w = _writer(args, rep.columns, f"protocol={rep.protocol} {comment}")
    for r in rep.rows:
        w.row(r)
    w.close({"protocol": rep.protocol, **rep.meta})


def cmd_simulate(args) -> int:
    grid = args.n_grid or _DEFAULT_GRID[args.protocol]
    proto = args.protocol
    model = read_model(args.model) if args.model else None
    try:
        if proto in ("figure4", "figure6"):
            model = model or GaussianStd(2)
            if proto == "figure6" and args.N is None:
                raise InputError("figure6 needs --N")
            cfg = sim.SimConfig(model, grid, args.runs, args.points, args.seed, args.N)
            if proto == "figure4":
                rep = sim.estimate_sup_error(cfg)
            else:
                rep = sim.empirical_trajectory(cfg, slack=args.slack)
        elif proto == "spacing":
            d = model.d if model is not None else (args.d or 3)
            if d not in (2, 3):
                raise InputError("the spacing diagnostic supports d in {2, 3} only")
            rep = sim.spacing_lil_diagnostic(d, grid, args.runs, args.seed)
        elif proto == "atomic":
            weights = args.weights or [1 / 3, 1 / 3, 1 / 3]
            rep = sim.atomic_nonuniformity_demo(weights, grid, args.seed)
        else:
            if model is not None and not (isinstance(model, UniformSphere) and model.d == 2):
                raise InputError("the outlyingness demo uses the uniform law on the circle")
            S = args.scale if args.scale is not None else sim.circle_scale()
            x1 = args.x1_grid or [1, 2, 5, 10, 20, 50, 100]
            rep = sim.outlyingness_divergence_demo(S, grid, x1, args.seed, args.k)
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(str(exc)) from exc
    _emit_report(args, rep)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--precision", type=int, default=None, help="significant digits (default 6)")

    p = _Parser(prog="randepth", description="Randomized halfspace and projection depth with error bounds.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("depth", parents=[common], help="randomized depth of query points")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="CSV of sample points ('-' for stdin)")
    src.add_argument("--model", help="model JSON file")
    q.add_argument("--query", required=True, help="CSV of query points ('-' for stdin)")
    q.add_argument("--n", type=_count, default=10000, help="number of random directions")
    q.add_argument("--seed", type=_count, default=0)
    q.add_argument("--kind", choices=("halfspace", "projection"), default="halfspace")
    q.add_argument("--k", type=int, default=1, help="exponent of the projection-depth transform")
    q.add_argument("--header", action="store_true", help="input CSV files have a header line")
    q.set_defaults(func=cmd_depth)

    b = sub.add_parser("bound", parents=[common], help="uniform error bounds")
    b.add_argument("--modulus", choices=("ellipt1", "ellipt2", "psym1", "psym2", "tight", "default"), default="ellipt1")
    b.add_argument("--model", help="model JSON file")
    b.add_argument("--n-list", type=_int_list)
    b.add_argument("--d-list", type=_int_list)
    b.add_argument("--p", type=float, default=2.0, help="index of the p-symmetric moduli")
    b.add_argument("--table1", action="store_true", help="the standard six-block bound table")
    b.set_defaults(func=cmd_bound)

    pl = sub.add_parser("plan", parents=[common], help="smallest number of directions for a target error")
    pl.add_argument("--eps", type=float, required=True)
    pl.add_argument("--d", type=int, required=True)
    pl.add_argument("--modulus", choices=("ellipt1", "ellipt2", "psym1", "psym2", "tight", "default"), default="ellipt1")
    pl.add_argument("--model", help="model JSON file")
    pl.add_argument("--p", type=float, default=2.0)
    pl.add_argument("--n-max", type=_count, default=10**7)
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo protocols")
    s.add_argument("--protocol", choices=tuple(_DEFAULT_GRID), required=True)
    s.add_argument("--model", help="model JSON file")
    s.add_argument("--runs", type=_count, default=100)
    s.add_argument("--points", type=_count, default=500, help="points per run")
    s.add_argument("--n-grid", type=_int_list)
    s.add_argument("--N", type=_count, default=None, help="empirical sample size (figure6)")
    s.add_argument("--seed", type=_count, default=0)
    s.add_argument("--slack", type=float, default=0.0, help="slack added to the figure6 bound")
    s.add_argument("--d", type=int, default=None, help="dimension for the spacing protocol")
    s.add_argument("--weights", type=_float_list, help="atom weights for the atomic demo")
    s.add_argument("--x1-grid", type=_float_list, help="first coordinates for the outlyingness demo")
    s.add_argument("--scale", type=float, default=None, help="projection scale S (outlyingness demo)")
    s.add_argument("--k", type=int, default=1)
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.precision_set = args.precision is not None
        if args.precision is None:
            args.precision = 6
        if not 1 <= args.precision <= 17:
            raise UsageError("--precision must be between 1 and 17")
        return args.func(args)
    except (UsageError, ValueError) as exc:
        print(f"randepth: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_OK
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"randepth: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
