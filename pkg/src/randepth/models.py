"""Analytic distribution families with closed-form projections and depths.

Every spherical family is described by its projection CDF ``F_p``: for any
unit ``u``, ``<u, X>`` has distribution function ``F_p``. The halfspace
function is then ``F_p(<u, x>)`` and the exact halfspace depth is
``F_p(-||x||)``. The p-symmetric family replaces the Euclidean norms by
``||u||_p`` and the conjugate ``||x||_q``; the elliptical wrapper reduces to its
spherical base by whitening.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy import linalg, special

__all__ = [
    "MarginalCdf",
    "DistributionModel",
    "GaussianStd",
    "StudentT",
    "UniformBall",
    "UniformSphere",
    "PSymmetric",
    "EllipticalAffine",
    "Dataset",
    "gaussian_marginal",
    "student_t_marginal",
    "cauchy_marginal",
    "uniform_ball_marginal",
    "uniform_sphere_marginal",
    "conjugate_index",
    "marginal_cdf",
    "exact_halfspace_depth",
    "halfspace_function",
    "whiten",
]


@dataclass(frozen=True, eq=False)
class MarginalCdf:
    """A univariate, symmetric distribution function with metadata.

    ``sampler(rng, shape)`` draws i.i.d. variates and is optional; it is what
    lets a p-symmetric law with i.i.d. coordinates be simulated.
    """

    cdf: Callable[[np.ndarray], np.ndarray]
    family: str
    params: dict = field(default_factory=dict)
    quantile: Optional[Callable[[np.ndarray], np.ndarray]] = None
    sampler: Optional[Callable[[np.random.Generator, tuple], np.ndarray]] = None
    support: tuple = (-np.inf, np.inf)

    def __call__(self, t):
        return self.cdf(np.asarray(t, dtype=float))


def gaussian_marginal() -> MarginalCdf:
    return MarginalCdf(
        cdf=special.ndtr,
        family="gaussian",
        quantile=special.ndtri,
        sampler=lambda rng, shape: rng.standard_normal(shape),
    )


def _cauchy_cdf(t):
    # 1/2 + arctan(t)/pi loses the lower tail; the arctan(1/t) form does not
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        lower = -np.arctan(1.0 / t) / np.pi
    return np.where(t < 0, lower, 0.5 + np.arctan(t) / np.pi)


def student_t_marginal(nu: int) -> MarginalCdf:
    nu = int(nu)
    if nu < 1:
        raise ValueError("nu must be a positive integer")
    if nu == 1:
        cdf = _cauchy_cdf
        quantile = lambda p: np.tan(np.pi * (np.asarray(p, dtype=float) - 0.5))  # noqa: E731
    else:
        cdf = lambda t: special.stdtr(nu, t)  # noqa: E731
        quantile = lambda p: special.stdtrit(nu, p)  # noqa: E731
    return MarginalCdf(
        cdf=cdf,
        family="student_t",
        params={"nu": nu},
        quantile=quantile,
        sampler=lambda rng, shape: rng.standard_t(nu, shape),
    )


def cauchy_marginal() -> MarginalCdf:
    return student_t_marginal(1)


def _beta_marginal(a: float, family: str, params: dict) -> MarginalCdf:
    # symmetric Beta(a, a) law rescaled from [0, 1] to [-1, 1]
    def cdf(t):
        w = np.clip((np.asarray(t, dtype=float) + 1.0) / 2.0, 0.0, 1.0)
        return special.betainc(a, a, w)

    def quantile(p):
        return 2.0 * special.betaincinv(a, a, np.asarray(p, dtype=float)) - 1.0

    return MarginalCdf(cdf=cdf, family=family, params=params, quantile=quantile, support=(-1.0, 1.0))


def uniform_ball_marginal(d: int) -> MarginalCdf:
    """Projection CDF of the uniform law on the unit ball of R^d."""
    return _beta_marginal((d + 1) / 2.0, "uniform_ball", {"d": int(d)})


def uniform_sphere_marginal(d: int) -> MarginalCdf:
    """Projection CDF of the uniform law on the unit sphere S^{d-1}."""
    return _beta_marginal((d - 1) / 2.0, "uniform_sphere", {"d": int(d)})


def conjugate_index(p: float) -> float:
    """q = inf for p <= 1, q = p / (p - 1) otherwise."""
    if not 0 < p <= 2:
        raise ValueError("p must lie in (0, 2]")
    return np.inf if p <= 1 else p / (p - 1.0)


def _check_d(d):
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")


def _as_points(x, d) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x2 = np.atleast_2d(x)
    if x2.ndim != 2 or x2.shape[1] != d:
        raise ValueError(f"points must have dimension {d}, got shape {x.shape}")
    return x2, single


def _as_dirs(u, d) -> tuple[np.ndarray, bool]:
    from .sphere import DirectionSet

    if isinstance(u, DirectionSet):
        u = u.directions
    u = np.asarray(u, dtype=float)
    single = u.ndim == 1
    u2 = np.atleast_2d(u)
    if u2.shape[1] != d:
        raise ValueError(f"directions must have dimension {d}, got shape {u.shape}")
    return u2, single


class DistributionModel:
    """Common interface of the analytic families.

    Subclasses implement ``phi_matrix`` (halfspace function for many points
    and directions at once), ``exact_depths`` and ``sample``.
    """

    d: int
    spherical: bool = False
    unimodal: bool = True

    def phi_matrix(self, X: np.ndarray, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def exact_depths(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def halfspace_function(self, x, u):
        X, sx = _as_points(x, self.d)
        U, su = _as_dirs(u, self.d)
        out = self.phi_matrix(X, U)
        if sx and su:
            return float(out[0, 0])
        if sx:
            return out[0]
        if su:
            return out[:, 0]
        return out

    def exact_depth(self, x):
        X, single = _as_points(x, self.d)
        out = self.exact_depths(X)
        return float(out[0]) if single else out

    def with_dimension(self, d: int) -> "DistributionModel":
        """The same family in another dimension."""
        return replace(self, d=int(d))


@dataclass(frozen=True)
class _Spherical(DistributionModel):
    d: int

    spherical = True

    def __post_init__(self):
        _check_d(self.d)

    @property
    def marginal(self) -> MarginalCdf:
        raise NotImplementedError

    def phi_matrix(self, X, U):
        return self.marginal.cdf(X @ U.T)

    def exact_depths(self, X):
        return self.marginal.cdf(-np.linalg.norm(X, axis=1))

    def mad(self) -> float:
        """MAD of the projections, the scale constant S of projection depth."""
        return float(self.marginal.quantile(0.75))


@dataclass(frozen=True)
class GaussianStd(_Spherical):
    """Standard Gaussian N(0, I_d)."""

    @property
    def marginal(self):
        return gaussian_marginal()

    def sample(self, rng, size):
        return rng.standard_normal((int(size), self.d))


@dataclass(frozen=True)
class StudentT(_Spherical):
    """Standard multivariate t with ``nu`` degrees of freedom (nu = 1: Cauchy)."""

    nu: int = 1

    def __post_init__(self):
        super().__post_init__()
        if int(self.nu) != self.nu or self.nu < 1:
            raise ValueError("nu must be a positive integer")

    @property
    def marginal(self):
        return student_t_marginal(self.nu)

    def sample(self, rng, size):
        z = rng.standard_normal((int(size), self.d))
        w = rng.chisquare(self.nu, int(size))
        return z / np.sqrt(w / self.nu)[:, None]


@dataclass(frozen=True)
class UniformBall(_Spherical):
    """Uniform distribution on the unit ball of R^d."""

    @property
    def marginal(self):
        return uniform_ball_marginal(self.d)

    def sample(self, rng, size):
        z = rng.standard_normal((int(size), self.d))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = rng.random(int(size)) ** (1.0 / self.d)
        return z * r[:, None]


@dataclass(frozen=True)
class UniformSphere(_Spherical):
    """Uniform distribution on the unit sphere S^{d-1} (no density, not unimodal)."""

    unimodal = False

    @property
    def marginal(self):
        return uniform_sphere_marginal(self.d)

    def sample(self, rng, size):
        z = rng.standard_normal((int(size), self.d))
        return z / np.linalg.norm(z, axis=1, keepdims=True)


@dataclass(frozen=True, eq=False)
class PSymmetric(DistributionModel):
    """p-symmetric law: <X, u> has the law of ||u||_p X_1, X_1 ~ ``marginal``."""

    d: int
    p: float
    marginal: MarginalCdf

    def __post_init__(self):
        _check_d(self.d)
        conjugate_index(self.p)

    @property
    def q(self) -> float:
        return conjugate_index(self.p)

    @property
    def spherical(self):
        return self.p == 2

    def phi_matrix(self, X, U):
        pn = np.sum(np.abs(U) ** self.p, axis=1) ** (1.0 / self.p)
        return self.marginal.cdf((X @ U.T) / pn[None, :])

    def exact_depths(self, X):
        return self.marginal.cdf(-np.linalg.norm(X, ord=self.q, axis=1))

    def mad(self) -> float:
        if not self.spherical or self.marginal.quantile is None:
            raise ValueError("a constant projection scale exists only for p = 2")
        return float(self.marginal.quantile(0.75))

    def sample(self, rng, size):
        # i.i.d. coordinates are p-symmetric only when the marginal is p-stable
        stable = (self.p == 2 and self.marginal.family == "gaussian") or (
            self.p == 1 and self.marginal.family == "student_t" and self.marginal.params.get("nu") == 1
        )
        if not stable or self.marginal.sampler is None:
            raise ValueError("sampling is supported only for the Gaussian (p=2) and Cauchy (p=1) marginals")
        return self.marginal.sampler(rng, (int(size), self.d))


@dataclass(frozen=True, eq=False)
class EllipticalAffine(DistributionModel):
    """The law of ``mu + L Z`` for ``Z`` from ``base`` and ``sigma = L L^T``."""

    base: DistributionModel
    mu: np.ndarray
    sigma: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if isinstance(self.base, EllipticalAffine):
            raise ValueError("base must not itself be elliptical-affine")
        d = self.base.d
        mu = np.array(self.mu, dtype=float).reshape(-1)
        sigma = np.array(self.sigma, dtype=float)
        if mu.shape != (d,) or sigma.shape != (d, d):
            raise ValueError(f"mu must have length {d} and sigma shape ({d}, {d})")
        if not np.allclose(sigma, sigma.T, rtol=1e-12, atol=1e-14):
            raise ValueError("sigma must be symmetric")
        try:
            chol = linalg.cholesky(sigma, lower=True)
        except linalg.LinAlgError as exc:
            raise ValueError("sigma must be positive definite") from exc
        for arr in (mu, sigma, chol):
            arr.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "chol", chol)

    @property
    def d(self) -> int:
        return self.base.d

    @property
    def unimodal(self):
        return self.base.unimodal

    def whiten(self, X):
        return linalg.solve_triangular(self.chol, (np.atleast_2d(X) - self.mu).T, lower=True).T

    def base_directions(self, U):
        """Map directions into the base frame: L^T u, normalized, and its norm."""
        V = U @ self.chol
        norms = np.linalg.norm(V, axis=1)
        return V / norms[:, None], norms

    def phi_matrix(self, X, U):
        V, _ = self.base_directions(U)
        return self.base.phi_matrix(self.whiten(X), V)

    def exact_depths(self, X):
        return self.base.exact_depths(self.whiten(X))

    def sample(self, rng, size):
        return self.mu + self.base.sample(rng, size) @ self.chol.T

    def with_dimension(self, d):
        if int(d) != self.d:
            raise ValueError("an elliptical model has a fixed dimension")
        return self


def marginal_cdf(model: DistributionModel, t):
    """Projection CDF of a spherical or p-symmetric model."""
    if isinstance(model, EllipticalAffine):
        raise TypeError("whiten the point first: elliptical models have direction-dependent projections")
    F = model.marginal
    out = F.cdf(np.asarray(t, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def exact_halfspace_depth(model: DistributionModel, x):
    return model.exact_depth(x)


def halfspace_function(model: DistributionModel, x, u):
    return model.halfspace_function(x, u)


def whiten(sigma, mu, x) -> np.ndarray:
    """Sigma^{-1/2}(x - mu) through the lower Cholesky factor of ``sigma``."""
    sigma = np.asarray(sigma, dtype=float)
    try:
        chol = linalg.cholesky(sigma, lower=True)
    except linalg.LinAlgError as exc:
        raise ValueError("sigma must be positive definite") from exc
    x = np.asarray(x, dtype=float)
    z = linalg.solve_triangular(chol, (np.atleast_2d(x) - np.asarray(mu, dtype=float)).T, lower=True).T
    return z[0] if x.ndim == 1 else z


@dataclass(frozen=True)
class Dataset:
    """An N x d point cloud; the empirical measure puts mass 1/N on each row."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError("a dataset needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite values")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]
