"""Monte Carlo harness for the approximation error of randomized depths.

Every run draws its randomness from ``SeedSequence(master_seed,
spawn_key=(run, stream))``, so a run's output depends only on the master seed
and its index. Adding runs or changing the thread count never perturbs it.
The number of worker threads is capped by the ``DEPTH_APPROX_THREADS``
environment variable.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bounds import Modulus, default_modulus, empirical_total_bound, error_bound, projection_error_bound
from .depth import c_k, empirical_counts, exact_halfspace_counts_2d
from .models import Dataset, DistributionModel, UniformSphere
from .sphere import cap_area, exact_max_spacing, sample_directions

# streams of a run's seed sequence
_POINTS, _DIRS, _SAMPLE = 0, 1, 2


def thread_count() -> int:
    """Worker threads: ``DEPTH_APPROX_THREADS`` if set, else the CPU count."""
    env = os.environ.get("DEPTH_APPROX_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError("DEPTH_APPROX_THREADS must be a positive integer") from exc
        if n < 1:
            raise ValueError("DEPTH_APPROX_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def run_seed(master_seed: int, run: int, stream: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(run), int(stream)))


def _map_runs(fn, runs: int) -> list:
    workers = min(thread_count(), runs)
    if workers <= 1:
        return [fn(r) for r in range(runs)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(runs)))


def _check_grid(n_grid) -> tuple[int, ...]:
    grid = tuple(int(n) for n in n_grid)
    if not grid:
        raise ValueError("n_grid must not be empty")
    if any(n < 1 for n in grid):
        raise ValueError("direction counts must be positive")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("n_grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class SimConfig:
    """A simulation setup: model, direction counts, run count and seed."""

    model: DistributionModel
    n_grid: tuple
    runs: int = 100
    points_per_run: int = 500
    master_seed: int = 0
    N: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", _check_grid(self.n_grid))
        if int(self.runs) != self.runs or self.runs < 1:
            raise ValueError("runs must be a positive integer")
        if int(self.points_per_run) != self.points_per_run or self.points_per_run < 1:
            raise ValueError("points_per_run must be a positive integer")
        if int(self.master_seed) != self.master_seed or not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise ValueError("N must be a positive integer")


@dataclass
class SimReport:
    """Rows of a simulation plus metadata.

    ``rows`` is a list of tuples matching ``columns``. For the sup-error
    protocols the columns are ``run, n, max_error, bound``.
    """

    protocol: str
    columns: tuple
    rows: list
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def table(self, value: str = "max_error") -> np.ndarray:
        """``value`` arranged as a (runs, len(n_grid)) array."""
        runs = self.column("run").astype(int)
        ns = self.column("n").astype(int)
        grid = sorted(set(ns.tolist()))
        out = np.full((runs.max() + 1, len(grid)), np.nan)
        pos = {n: j for j, n in enumerate(grid)}
        for r, n, v in zip(runs, ns, self.column(value)):
            out[r, pos[n]] = v
        return out

    def summary(self) -> list[dict]:
        """Per-n mean, max and quantiles of ``max_error`` with the bound and coverage."""
        if "max_error" not in self.columns:
            raise ValueError(f"no error summary for protocol {self.protocol}")
        ns = self.column("n").astype(int)
        err = self.column("max_error")
        bnd = self.column("bound")
        out = []
        for n in sorted(set(ns.tolist())):
            e = err[ns == n]
            b = bnd[ns == n]
            q50, q90, q99 = np.quantile(e, [0.5, 0.9, 0.99])
            out.append(
                {
                    "n": n,
                    "runs": int(e.size),
                    "mean": float(e.mean()),
                    "max": float(e.max()),
                    "q50": float(q50),
                    "q90": float(q90),
                    "q99": float(q99),
                    "bound": float(b[0]),
                    "frac_below_bound": float(np.mean(e <= b)),
                }
            )
        return out

    def to_records(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_csv(self, fmt=repr) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([fmt(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"protocol": self.protocol, "meta": self.meta, "rows": self.to_records()}, allow_nan=True)


def _bounds(model, grid, modulus) -> list[float]:
    if modulus is None:
        try:
            modulus = default_modulus(model)
        except ValueError:
            return [math.nan] * len(grid)
    return [error_bound(n, model.d, modulus).bound if n >= 16 else math.nan for n in grid]


def estimate_sup_error(cfg: SimConfig, modulus: Optional[Modulus] = None) -> SimReport:
    """Max over sampled points of |D(x) - D_n(x)| for every run and n.

    The points come from the model itself and the direction sets for the
    different ``n`` are nested prefixes of one draw, so the per-point errors
    are non-increasing along ``n_grid``. The maximum over finitely many points
    is a lower estimate of the supremum over R^d.
    """
    model = cfg.model
    grid = cfg.n_grid
    bounds = _bounds(model, grid, modulus)

    def one(run):
        rng = np.random.default_rng(run_seed(cfg.master_seed, run, _POINTS))
        X = model.sample(rng, cfg.points_per_run)
        U = sample_directions(grid[-1], model.d, run_seed(cfg.master_seed, run, _DIRS)).directions
        exact = model.exact_depths(X)
        Dn = _running_min_at(lambda V: model.phi_matrix(X, V), U, grid)
        return np.max(np.abs(Dn - exact[:, None]), axis=0)

    try:
        model.exact_depths(np.zeros((1, model.d)))
    except NotImplementedError as exc:
        raise ValueError(f"{type(model).__name__} has no exact depth") from exc
    errs = _map_runs(one, cfg.runs)
    rows = [(r, n, float(errs[r][j]), bounds[j]) for r in range(cfg.runs) for j, n in enumerate(grid)]
    meta = {
        "model": type(model).__name__,
        "d": model.d,
        "runs": cfg.runs,
        "points_per_run": cfg.points_per_run,
        "master_seed": cfg.master_seed,
        "sup_estimate": "max over model-sampled points (a lower bound on the supremum)",
    }
    return SimReport("figure4", ("run", "n", "max_error", "bound"), rows, meta)


def empirical_trajectory(
    cfg: SimConfig,
    modulus: Optional[Modulus] = None,
    slack: float = 0.0,
    reference: str = "auto",
    surrogate_n: int = 10**6,
) -> SimReport:
    """Errors of D_n against the depth of the empirical measure of an N-sample.

    The query points are the first ``points_per_run`` sample points. With
    ``reference="exact"`` (the default for d = 2) D(.; P_N) comes from the
    angular sweep and every error is a multiple of 1/N. For d > 2 the
    reference is a randomized depth with ``surrogate_n`` directions.
    """
    if cfg.N is None:
        raise ValueError("the empirical trajectory needs N")
    model = cfg.model
    d = model.d
    if reference == "auto":
        reference = "exact" if d == 2 else "surrogate"
    if reference not in ("exact", "surrogate"):
        raise ValueError("reference must be auto, exact or surrogate")
    if reference == "exact" and d != 2:
        raise ValueError("the exact empirical reference requires d = 2")
    N = int(cfg.N)
    if cfg.points_per_run > N:
        raise ValueError("points_per_run cannot exceed N")
    grid = cfg.n_grid
    if modulus is None:
        modulus = default_modulus(model)
    bounds = [empirical_total_bound(N, n, d, modulus, slack) if n >= 16 and N >= 16 else math.nan for n in grid]

    def one(run):
        rng = np.random.default_rng(run_seed(cfg.master_seed, run, _SAMPLE))
        data = Dataset(model.sample(rng, N))
        X = data.points[: cfg.points_per_run]
        U = sample_directions(grid[-1], d, run_seed(cfg.master_seed, run, _DIRS)).directions
        counts = _running_min_at(lambda V: empirical_counts(data, X, V), U, grid)
        if reference == "exact":
            ref = exact_halfspace_counts_2d(data, X)
        else:
            V = sample_directions(surrogate_n, d, run_seed(cfg.master_seed, run, _POINTS)).directions
            ref = np.full(X.shape[0], N, dtype=np.int64)
            for s in range(0, surrogate_n, 4096):
                ref = np.minimum(ref, empirical_counts(data, X, V[s : s + 4096]).min(axis=1))
        # integer counts keep every error an exact multiple of 1/N
        return np.max(np.abs(counts - ref[:, None]), axis=0)

    diffs = _map_runs(one, cfg.runs)
    rows = [(r, n, int(diffs[r][j]) / N, bounds[j]) for r in range(cfg.runs) for j, n in enumerate(grid)]
    meta = {
        "model": type(model).__name__,
        "d": d,
        "N": N,
        "runs": cfg.runs,
        "points_per_run": cfg.points_per_run,
        "master_seed": cfg.master_seed,
        "slack": slack,
        "reference": reference if reference == "exact" else f"surrogate ({surrogate_n} directions)",
    }
    return SimReport("figure6", ("run", "n", "max_error", "bound"), rows, meta)


def spacing_lil_diagnostic(d: int, n_grid: Sequence[int], runs: int, master_seed: int) -> SimReport:
    """R(n) = (n a_d(S_n) - log n) / log log n per run, with S_n the exact maximal spacing."""
    if d not in (2, 3):
        raise ValueError("the spacing diagnostic is available for d in {2, 3}")
    grid = _check_grid(n_grid)
    if grid[0] < 16:
        raise ValueError("direction counts must be at least 16")
    if int(runs) != runs or runs < 1:
        raise ValueError("runs must be a positive integer")

    def one(run):
        dirs = sample_directions(grid[-1], d, run_seed(master_seed, run, _DIRS))
        out = []
        for n in grid:
            s = exact_max_spacing(dirs.prefix(n))
            ratio = (n * cap_area(d, s) - math.log(n)) / math.log(math.log(n))
            out.append((s, ratio))
        return out

    res = _map_runs(one, int(runs))
    rows = [(r, n, res[r][j][0], res[r][j][1]) for r in range(runs) for j, n in enumerate(grid)]
    meta = {"d": d, "runs": int(runs), "master_seed": int(master_seed), "envelope": [d - 2, d]}
    return SimReport("spacing", ("run", "n", "spacing", "ratio"), rows, meta)


def _running_min_at(phi_block, U, grid, block=8192) -> np.ndarray:
    """Columns n - 1 of the cumulative minimum of ``phi_block(U)`` over directions."""
    out = []
    cur = None
    want = list(grid)
    for s in range(0, U.shape[0], block):
        acc = np.minimum.accumulate(phi_block(U[s : s + block]), axis=1)
        if cur is not None:
            acc = np.minimum(acc, cur[:, None])
        while want and want[0] <= s + acc.shape[1]:
            out.append(acc[:, want.pop(0) - 1 - s])
        cur = acc[:, -1]
    return np.column_stack(out)


def atomic_nonuniformity_demo(
    weights: Sequence[float],
    n_grid: Sequence[int],
    seed: int,
    eps_grid: Optional[np.ndarray] = None,
) -> SimReport:
    """sup over x + eps v of D_n - D for an atomic law on a regular polygon.

    The atoms sit on the vertices of a regular m-gon, ``x`` is the midpoint of
    the edge between the first two and ``v`` its outward normal. Every
    ``x + eps v`` lies outside the convex hull, so D = 0 there, while only
    directions within about ``2 eps`` of ``v``'s opposite separate it from the
    atoms; D_n stays at least the lighter edge weight until one is drawn.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size < 2:
        raise ValueError("need at least two weights")
    if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be positive and sum to 1")
    grid = _check_grid(n_grid)
    if eps_grid is None:
        eps_grid = np.geomspace(1e-8, 1.0, 161)[:-1]
    eps_grid = np.asarray(eps_grid, dtype=float)
    if np.any(eps_grid <= 0):
        raise ValueError("eps values must be positive")
    m = w.size
    ang = 2 * np.pi * np.arange(m) / m
    atoms = np.column_stack([np.cos(ang), np.sin(ang)])
    mid = 0.5 * (atoms[0] + atoms[1])
    v = mid / np.linalg.norm(mid)
    X = mid + eps_grid[:, None] * v
    U = sample_directions(grid[-1], 2, seed).directions
    Dn = _running_min_at(lambda V: np.einsum("k,ikj->ij", w, (atoms @ V.T)[None] <= (X @ V.T)[:, None]), U, grid)
    rows = []
    for j, n in enumerate(grid):
        i = int(np.argmax(Dn[:, j]))
        rows.append((n, float(Dn[i, j]), float(eps_grid[i]), float(w.min()), float(min(w[0], w[1]))))
    meta = {"weights": w.tolist(), "seed": int(seed), "eps_range": [float(eps_grid.min()), float(eps_grid.max())]}
    return SimReport("atomic", ("n", "sup_error", "eps_at_sup", "min_weight", "edge_weight"), rows, meta)


def outlyingness_divergence_demo(
    S: float,
    n_grid: Sequence[int],
    x1_grid: Sequence[float],
    seed: int,
    k: int = 1,
) -> SimReport:
    """Outlyingness and projection-depth deficits for the uniform law on the circle.

    At ``x = (x1, 0)`` the exact outlyingness is x1 / S while the randomized
    one is x1 max_i U_i1 / S, so the deficit (1 - max_i U_i1) x1 / S grows
    linearly in x1. The projection-depth deficit c(O_n) - c(O) stays bounded.
    """
    if not S > 0:
        raise ValueError("S must be positive")
    grid = _check_grid(n_grid)
    x1 = np.asarray(x1_grid, dtype=float)
    if x1.ndim != 1 or x1.size < 1 or np.any(x1 <= 0):
        raise ValueError("x1_grid must hold positive values")
    c = c_k(k)
    U = sample_directions(grid[-1], 2, seed).directions
    best = np.maximum.accumulate(U[:, 0])[np.array(grid) - 1]
    rows = []
    for n, b in zip(grid, best):
        O = x1 / S
        On = x1 * b / S
        o_def = float(np.max(O - On))
        pd_def = float(np.max(c(On) - c(O)))
        pd_bound = projection_error_bound(n, 2, k).bound if n >= 16 else math.nan
        rows.append((n, float(x1.max()), o_def, pd_def, pd_bound))
    meta = {"S": float(S), "k": int(k), "seed": int(seed), "model": UniformSphere.__name__}
    return SimReport("outlyingness", ("n", "x1_max", "o_deficit", "pd_deficit", "pd_bound"), rows, meta)


def circle_scale() -> float:
    """MAD of a projection of the uniform law on the circle."""
    return UniformSphere(2).mad()


__all__ = [
    "SimConfig",
    "SimReport",
    "atomic_nonuniformity_demo",
    "circle_scale",
    "empirical_trajectory",
    "estimate_sup_error",
    "outlyingness_divergence_demo",
    "run_seed",
    "spacing_lil_diagnostic",
    "thread_count",
]
