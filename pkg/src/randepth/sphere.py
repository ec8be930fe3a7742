"""Geometry of the unit sphere: direction sampling, geodesics, cap areas, spacings."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import optimize, special
from scipy.spatial import ConvexHull, cKDTree
from scipy.spatial import QhullError

SeedLike = Union[int, np.random.SeedSequence]

UNIT_TOL = 1e-12


def _as_unit(u, name="u") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 1:
        raise ValueError(f"{name} must be a non-empty 1-D vector")
    if abs(np.linalg.norm(u) - 1.0) > UNIT_TOL:
        raise ValueError(f"{name} must have unit norm")
    return u


@dataclass(frozen=True)
class DirectionSet:
    """An immutable ordered set of unit vectors in R^d.

    ``directions`` is an ``(n, d)`` read-only array. ``seed`` is the seed the
    set was generated from, or ``None`` for explicitly supplied directions.
    """

    directions: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        arr = np.array(self.directions, dtype=float, copy=True)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("directions must be an (n, d) array with n, d >= 1")
        norms = np.linalg.norm(arr, axis=1)
        if np.any(np.abs(norms - 1.0) > UNIT_TOL):
            raise ValueError("all directions must have unit norm")
        arr.setflags(write=False)
        object.__setattr__(self, "directions", arr)

    @classmethod
    def from_vectors(cls, vectors) -> "DirectionSet":
        """Normalize arbitrary non-zero vectors into a direction set."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        norms = np.linalg.norm(v, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise ValueError("zero vector cannot be normalized")
        return cls(v / norms)

    @property
    def n(self) -> int:
        return self.directions.shape[0]

    @property
    def d(self) -> int:
        return self.directions.shape[1]

    def __len__(self) -> int:
        return self.n

    def prefix(self, n: int) -> "DirectionSet":
        """The first ``n`` directions; nested prefixes give D_n >= D_{n+1}."""
        if not 1 <= n <= self.n:
            raise ValueError(f"prefix length must be in [1, {self.n}]")
        return DirectionSet(self.directions[:n], self.seed)


def seed_to_int(seed: SeedLike) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1, np.uint64)[0])
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return seed


def sample_directions(n: int, d: int, seed: SeedLike) -> DirectionSet:
    """Draw ``n`` directions uniformly on S^{d-1} by normalizing Gaussian vectors.

    The draw is a pure function of ``(n, d, seed)``, and for a fixed seed the
    first ``m`` rows do not depend on ``n``, so sets for nested ``n`` share
    prefixes.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")
    s = seed_to_int(seed)
    rng = np.random.default_rng(s)
    g = rng.standard_normal((int(n), int(d)))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian draw has probability zero; redraw it anyway
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), int(d)))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    return DirectionSet(g / norms, s)


def great_circle_distance(u, v) -> float:
    """Geodesic distance on the sphere, arccos of the clamped inner product."""
    u = _as_unit(u, "u")
    v = _as_unit(v, "v")
    if u.shape != v.shape:
        raise ValueError("u and v must have the same dimension")
    return float(np.arccos(np.clip(np.dot(u, v), -1.0, 1.0)))


def _check_dim(d):
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")


def cap_area(d: int, phi):
    """Fraction of the surface of S^{d-1} covered by a cap of polar angle ``phi``.

    Uses a_d(phi) = I_{sin^2 phi}((d-1)/2, 1/2) / 2 for phi <= pi/2 and the
    reflection a_d(phi) = 1 - a_d(pi - phi) above it.
    """
    _check_dim(d)
    phi_arr = np.asarray(phi, dtype=float)
    if np.any(~np.isfinite(phi_arr)) or np.any(phi_arr < 0) or np.any(phi_arr > np.pi):
        raise ValueError("phi must lie in [0, pi]")
    half = 0.5 * special.betainc((d - 1) / 2.0, 0.5, np.sin(phi_arr) ** 2)
    out = np.where(phi_arr <= np.pi / 2, half, 1.0 - half)
    out = np.where(phi_arr == np.pi, 1.0, out)
    return float(out) if out.ndim == 0 else out


def cap_area_quad(d: int, phi: float) -> float:
    """Cap area by direct quadrature of the sin^{d-2} integral (reference path)."""
    from scipy import integrate

    _check_dim(d)
    const = np.exp(special.gammaln(d / 2.0) - special.gammaln((d - 1) / 2.0)) / np.sqrt(np.pi)
    val, _ = integrate.quad(lambda t: np.sin(t) ** (d - 2), 0.0, phi, epsabs=1e-14, epsrel=1e-13, limit=200)
    return const * val


def cap_area_inv(d: int, a: float) -> float:
    """Polar angle whose cap covers the fraction ``a`` of the sphere."""
    _check_dim(d)
    a = float(a)
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    if a == 0.0:
        return 0.0
    if a == 1.0:
        return float(np.pi)
    if a == 0.5:
        return float(np.pi / 2)
    return float(
        optimize.brentq(lambda p: cap_area(d, p) - a, 0.0, np.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    )


def _probe_points(d: int, resolution: int) -> np.ndarray:
    if d == 2:
        t = 2 * np.pi * (np.arange(resolution) + 0.5) / resolution
        return np.column_stack([np.cos(t), np.sin(t)])
    if d == 3:
        # Fibonacci lattice
        i = np.arange(resolution) + 0.5
        z = 1 - 2 * i / resolution
        r = np.sqrt(np.clip(1 - z * z, 0, None))
        t = np.pi * (1 + np.sqrt(5.0)) * i
        return np.column_stack([r * np.cos(t), r * np.sin(t), z])
    return sample_directions(resolution, d, 0).directions


def _chord_to_geodesic(c):
    return 2.0 * np.arcsin(np.clip(np.asarray(c) / 2.0, 0.0, 1.0))


def max_spacing(dirs: DirectionSet, resolution: int = 100_000) -> float:
    """Lower-bound estimate of the maximal spacing S_n of a direction set.

    The nearest-sample geodesic distance is maximized over ``resolution``
    quasi-uniform probe points together with the antipodes of the sample.
    """
    if not isinstance(dirs, DirectionSet):
        dirs = DirectionSet(np.asarray(dirs, dtype=float))
    if resolution < 1:
        raise ValueError("resolution must be positive")
    pts = dirs.directions
    probes = np.vstack([_probe_points(dirs.d, int(resolution)), -pts])
    dist, _ = cKDTree(pts).query(probes, k=1)
    return float(min(np.max(_chord_to_geodesic(dist)), np.pi))


def exact_max_spacing(dirs: DirectionSet) -> float:
    """Exact maximal spacing for d in {2, 3}.

    d = 2 uses half the largest circular gap; d = 3 uses the largest empty cap
    of the spherical Delaunay triangulation (facets of the convex hull).
    """
    if not isinstance(dirs, DirectionSet):
        dirs = DirectionSet(np.asarray(dirs, dtype=float))
    pts = dirs.directions
    if dirs.d == 2:
        if dirs.n == 1:
            return float(np.pi)
        ang = np.sort(np.arctan2(pts[:, 1], pts[:, 0]))
        gaps = np.diff(np.concatenate([ang, ang[:1] + 2 * np.pi]))
        return float(np.max(gaps) / 2)
    if dirs.d != 3:
        raise ValueError("exact maximal spacing is available only for d in {2, 3}")
    if dirs.n < 4:
        return max_spacing(dirs)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return max_spacing(dirs)
    # equations rows are (normal, offset) with normal . x + offset <= 0 inside
    offsets = -hull.equations[:, 3]
    return float(np.max(np.arccos(np.clip(offsets, -1.0, 1.0))))
