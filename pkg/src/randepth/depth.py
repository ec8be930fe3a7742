"""Randomized halfspace and projection depth.

A depth target is either a :class:`~randepth.models.DistributionModel` (the
halfspace function is analytic) or a :class:`~randepth.models.Dataset` (the
empirical measure). The randomized depths take the minimum (outlyingness the
maximum) of the univariate quantities over the directions of a
:class:`~randepth.sphere.DirectionSet`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .models import Dataset, DistributionModel, EllipticalAffine
from .sphere import DirectionSet

DepthTarget = Union[DistributionModel, Dataset]

# above this many entries per direction block the empirical counter sorts
_BROADCAST_LIMIT = 4_000_000


@dataclass(frozen=True)
class DepthResult:
    value: float
    n_directions: int
    minimizing_index: int


def _target_dim(target: DepthTarget) -> int:
    return target.d


def _points(target, x):
    d = _target_dim(target)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != d:
        raise ValueError(f"query points must have dimension {d}, got {X.shape[1]}")
    return X


def _dirs(target, dirs):
    U = dirs.directions if isinstance(dirs, DirectionSet) else np.atleast_2d(np.asarray(dirs, dtype=float))
    if U.shape[0] < 1:
        raise ValueError("need at least one direction")
    if U.shape[1] != _target_dim(target):
        raise ValueError(f"directions must have dimension {_target_dim(target)}, got {U.shape[1]}")
    return U


# --------------------------------------------------------------------------
# halfspace depth


def _project(U: np.ndarray, A: np.ndarray) -> np.ndarray:
    """``U @ A.T`` by plain elementwise arithmetic.

    BLAS may round the same dot product differently depending on where a row
    sits in the matrix; here a data point and an identical query point always
    get bit-identical projections, so a point never misses its own halfspace.
    """
    At = np.ascontiguousarray(A.T)
    out = U[:, 0, None] * At[0][None, :]
    for k in range(1, A.shape[1]):
        out += U[:, k, None] * At[k][None, :]
    return out


def empirical_counts(data: Dataset, X: np.ndarray, U: np.ndarray, block: int = 64) -> np.ndarray:
    """Integer matrix ``C[i, j] = #{k : <U_j, X_k> <= <U_j, x_i>}`` over the data rows."""
    P_all = data.points
    N = data.N
    m = X.shape[0]
    out = np.empty((m, U.shape[0]), dtype=np.int64)
    if N * m <= _BROADCAST_LIMIT // 16:
        step = max(1, _BROADCAST_LIMIT // max(1, N * m))
        for s in range(0, U.shape[0], step):
            Ub = U[s : s + step]
            P = _project(Ub, P_all)
            Q = _project(Ub, X)
            out[:, s : s + step] = np.count_nonzero(P[:, None, :] <= Q[:, :, None], axis=2).T
        return out
    for s in range(0, U.shape[0], block):
        Ub = U[s : s + block]
        P = _project(Ub, P_all)
        P.sort(axis=1)
        Q = _project(Ub, X)
        for j in range(Ub.shape[0]):
            out[:, s + j] = np.searchsorted(P[j], Q[j], side="right")
    return out


def halfspace_matrix(target: DepthTarget, X, U) -> np.ndarray:
    """phi_{x_i}(u_j) for every query point and direction."""
    X = _points(target, X)
    U = _dirs(target, U)
    if isinstance(target, Dataset):
        return empirical_counts(target, X, U) / target.N
    return target.phi_matrix(X, U)


def approx_halfspace_depths(target: DepthTarget, X, dirs) -> np.ndarray:
    """Randomized halfspace depth of each row of ``X``."""
    return np.min(halfspace_matrix(target, X, dirs), axis=1)


def approx_halfspace_depth(target: DepthTarget, x, dirs) -> DepthResult:
    """D_n(x) = min over the directions of phi_x(U_i)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single point")
    row = halfspace_matrix(target, x, dirs)[0]
    i = int(np.argmin(row))
    return DepthResult(float(row[i]), row.size, i)


def _exact_count_2d(P: np.ndarray, x: np.ndarray) -> int:
    Y = P - x
    at_x = np.all(Y == 0, axis=1)
    Y = Y[~at_x]
    M = Y.shape[0]
    if M == 0:
        return int(at_x.sum())
    theta = np.arctan2(Y[:, 1], Y[:, 0])
    order = np.argsort(theta, kind="stable")
    theta = theta[order]
    Y = Y[order]
    ext = np.concatenate([theta, theta + 2 * np.pi])
    # points in the half-open arc [theta_i, theta_i + pi) lie in an open halfplane
    tol = 1e-9
    lo = np.searchsorted(ext, theta + np.pi - tol, side="left")
    hi = np.searchsorted(ext, theta + np.pi + tol, side="left")
    best = int(np.max(lo - np.arange(M)))
    for i in np.nonzero(hi > lo)[0]:
        # resolve near-antipodal points exactly with the cross product
        count = lo[i] - i
        ref = Y[i]
        for k in range(lo[i], hi[i]):
            y = Y[k % M]
            cross = ref[0] * y[1] - ref[1] * y[0]
            if cross > 0 or (cross == 0 and ref @ y > 0):
                count += 1
        best = max(best, int(count))
    best = min(best, M)
    return int(at_x.sum()) + M - best


def exact_halfspace_depth_2d(data: Dataset, x) -> float:
    """Exact empirical halfspace depth in the plane by an angular sweep.

    The depth is one minus the largest fraction of points (other than copies
    of ``x``) inside an open halfplane whose boundary passes through ``x``;
    O(N log N).
    """
    if not isinstance(data, Dataset):
        data = Dataset(data)
    if data.d != 2:
        raise ValueError("the exact sweep requires d = 2")
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise ValueError("x must be a point in R^2")
    return _exact_count_2d(data.points, x) / data.N


def exact_halfspace_counts_2d(data: Dataset, X) -> np.ndarray:
    """Exact depths of many points, as integer counts (depth times N)."""
    if data.d != 2:
        raise ValueError("the exact sweep requires d = 2")
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return np.array([_exact_count_2d(data.points, x) for x in X], dtype=np.int64)


# --------------------------------------------------------------------------
# projection depth and outlyingness


def c_k(k: int) -> Callable[[np.ndarray], np.ndarray]:
    """The transform c(x) = 1 / (1 + (x)_+^k), with c(+inf) = 0."""

    def c(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(over="ignore", invalid="ignore"):
            pos = np.maximum(x, 0.0)
            val = 1.0 / (1.0 + pos**k)
        return np.where(np.isposinf(x), 0.0, val)

    return c


@dataclass(frozen=True)
class ProjectionDepthSpec:
    """Location/scale functionals and the transform c of projection depth.

    Data targets always use median and MAD. For model targets the projected
    scale is ``scale_constant`` when given, else the MAD of the model's
    projections.
    """

    k: int = 1
    location: str = "median"
    scale: str = "mad"
    scale_constant: Optional[float] = None
    c: Optional[Callable] = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.location != "median" or self.scale != "mad":
            raise ValueError("only median location and MAD scale are supported")
        if self.scale_constant is not None and not self.scale_constant > 0:
            raise ValueError("scale constant must be positive")

    def transform(self, x):
        return (self.c or c_k(self.k))(x)


def location_scale(values, spec: ProjectionDepthSpec | None = None) -> tuple[float, float]:
    """Median and median absolute deviation (midpoint rule for even counts)."""
    v = np.asarray(values, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("location_scale needs at least one value")
    m = float(np.median(v))
    return m, float(np.median(np.abs(v - m)))


def _model_scale(model, spec: ProjectionDepthSpec) -> float:
    if spec.scale_constant is not None:
        return float(spec.scale_constant)
    return model.mad()


def standardized_matrix(target: DepthTarget, X, U, spec: ProjectionDepthSpec) -> np.ndarray:
    """(<u_j, x_i> - m_{u_j}) / s_{u_j} for every point and direction.

    A zero scale maps a positive numerator to +inf and anything else to 0.
    """
    X = _points(target, X)
    U = _dirs(target, U)
    if isinstance(target, Dataset):
        proj = target.points @ U.T
        m = np.median(proj, axis=0)
        s = np.median(np.abs(proj - m), axis=0)
    elif isinstance(target, EllipticalAffine):
        if not target.base.spherical:
            raise ValueError("analytic projection depth needs a spherical base")
        S = _model_scale(target.base, spec)
        m = U @ target.mu
        s = S * np.linalg.norm(U @ target.chol, axis=1)
    elif getattr(target, "spherical", False):
        m = np.zeros(U.shape[0])
        s = np.full(U.shape[0], _model_scale(target, spec))
    else:
        raise ValueError("analytic projection depth is available for spherical and elliptical models only")
    num = X @ U.T - m[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / s[None, :]
    zero = np.broadcast_to(s[None, :] == 0, out.shape)
    out = np.where(zero, np.where(num > 0, np.inf, 0.0), out)
    return out


def approx_outlyingness(target: DepthTarget, x, dirs, spec: ProjectionDepthSpec | None = None) -> float:
    """O_n(x) = max over the directions of the standardized projection."""
    spec = spec or ProjectionDepthSpec()
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single point")
    return float(np.max(standardized_matrix(target, x, dirs, spec)[0]))


def approx_projection_depth(target: DepthTarget, x, dirs, spec: ProjectionDepthSpec | None = None) -> DepthResult:
    """PD_n(x) = min over the directions of c(standardized projection)."""
    spec = spec or ProjectionDepthSpec()
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("x must be a single point")
    vals = spec.transform(standardized_matrix(target, x, dirs, spec)[0])
    i = int(np.argmin(vals))
    return DepthResult(float(vals[i]), vals.size, i)


def approx_projection_depths(target: DepthTarget, X, dirs, spec: ProjectionDepthSpec | None = None) -> np.ndarray:
    spec = spec or ProjectionDepthSpec()
    return np.min(spec.transform(standardized_matrix(target, X, dirs, spec)), axis=1)


def exact_outlyingness(model: DistributionModel, x, spec: ProjectionDepthSpec | None = None) -> float:
    """O(x) = ||z|| / S for spherical models, z the whitened point."""
    spec = spec or ProjectionDepthSpec()
    x = np.asarray(x, dtype=float)
    if isinstance(model, EllipticalAffine):
        if not model.base.spherical:
            raise ValueError("closed-form outlyingness needs a spherical base")
        return float(np.linalg.norm(model.whiten(x)[0]) / _model_scale(model.base, spec))
    if not getattr(model, "spherical", False):
        raise ValueError("closed-form outlyingness needs a spherical model")
    return float(np.linalg.norm(x) / _model_scale(model, spec))


def exact_projection_depth(model: DistributionModel, x, spec: ProjectionDepthSpec | None = None) -> float:
    spec = spec or ProjectionDepthSpec()
    return float(spec.transform(exact_outlyingness(model, x, spec)))


__all__ = [
    "DepthTarget",
    "DepthResult",
    "ProjectionDepthSpec",
    "approx_halfspace_depth",
    "approx_halfspace_depths",
    "approx_outlyingness",
    "approx_projection_depth",
    "approx_projection_depths",
    "c_k",
    "empirical_counts",
    "exact_halfspace_counts_2d",
    "exact_halfspace_depth_2d",
    "exact_outlyingness",
    "exact_projection_depth",
    "halfspace_matrix",
    "location_scale",
    "standardized_matrix",
]
