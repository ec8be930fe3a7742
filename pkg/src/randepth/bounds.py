"""Uniform error bounds for randomized depths and the direction-count planner.

A bound is a modulus of continuity ``delta`` of the halfspace functions
composed with the almost-sure maximal-spacing envelope on the sphere::

    Delta_n <= delta(a_d^{-1}((d log log n + log n) / n))

All logarithms are natural. The envelope is asymptotic, so ``n >= 16`` is
required (``log log n > 0``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special

from .models import DistributionModel, EllipticalAffine, GaussianStd, PSymmetric, StudentT, UniformBall, conjugate_index
from .sphere import cap_area_inv

MIN_N = 16
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t > np.pi):
        raise ValueError("modulus argument must lie in [0, pi]")
    return t


def _out(v):
    v = np.asarray(v, dtype=float)
    return float(v) if v.ndim == 0 else v


class Modulus:
    """A non-decreasing modulus of continuity on [0, pi] with delta(0) = 0."""

    name = "modulus"
    # a bound on a halfspace-depth difference, so at most 1/2 is meaningful
    halfspace = True

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        return _out(self._eval(_check_t(t)))


@dataclass(frozen=True)
class Lipschitz(Modulus):
    L: float
    name = "lipschitz"

    def __post_init__(self):
        if not self.L >= 0:
            raise ValueError("L must be non-negative")

    def _eval(self, t):
        return self.L * t


@dataclass(frozen=True)
class Holder(Modulus):
    K: float
    alpha: float
    name = "holder"

    def __post_init__(self):
        if not self.K > 0 or not 0 < self.alpha <= 1:
            raise ValueError("need K > 0 and alpha in (0, 1]")

    def _eval(self, t):
        return self.K * t**self.alpha


@dataclass(frozen=True)
class Elliptical1(Modulus):
    """(1 - cos t) / 2, valid for every unimodal elliptical law."""

    name = "ellipt1"

    def _eval(self, t):
        # 1 - cos t = 2 sin^2(t/2) without cancellation
        return np.sin(t / 2) ** 2


@dataclass(frozen=True)
class Elliptical2(Modulus):
    """t^2 / 4, the quadratic majorant of ``Elliptical1``."""

    name = "ellipt2"

    def _eval(self, t):
        return t * t / 4


def _psym_coeffs(p: float, d: int):
    q = conjugate_index(p)
    inv_q = 0.0 if math.isinf(q) else 1.0 / q
    if p >= 1:
        return d ** (1 / p - 0.5) * (d ** (0.5 - inv_q) + 1), None
    return d ** (1 / p), d ** (1 / p - 0.5) / p


@dataclass(frozen=True)
class PSym1(Modulus):
    """Sine-form modulus for unimodal p-symmetric laws."""

    p: float
    d: int
    name = "psym1"

    def __post_init__(self):
        conjugate_index(self.p)

    def _eval(self, t):
        a, b = _psym_coeffs(self.p, self.d)
        s = np.sin(t / 2)
        if b is None:
            return a * s
        return a * s + b * 2 ** (self.p - 1) * s**self.p


@dataclass(frozen=True)
class PSym2(Modulus):
    """Linear-form (weaker) modulus for unimodal p-symmetric laws."""

    p: float
    d: int
    name = "psym2"

    def __post_init__(self):
        conjugate_index(self.p)

    def _eval(self, t):
        a, b = _psym_coeffs(self.p, self.d)
        if b is None:
            return a * t / 2
        return a * t / 2 + b * t**self.p / 2


@dataclass(frozen=True, eq=False)
class Tight(Modulus):
    """sup_{t >= 0} F_p(t) - F_p(t cos eps) for a spherical model, eps < pi/2."""

    model: DistributionModel
    name = "tight"

    def __post_init__(self):
        if not getattr(self.model, "spherical", False) or isinstance(self.model, EllipticalAffine):
            raise ValueError("the tight modulus needs a spherical model")

    def _eval(self, t):
        flat = np.atleast_1d(t)
        vals = np.empty(flat.shape)
        for i, e in enumerate(flat):
            if e <= 0:
                vals[i] = 0.0
            elif e < np.pi / 2:
                vals[i] = tight_modulus(self.model, float(e))
            else:
                # undefined from pi/2 on; continue with the Ellipt. 1 majorant
                vals[i] = math.sin(e / 2) ** 2
        return vals.reshape(np.shape(t))


@dataclass(frozen=True, eq=False)
class Affine(Modulus):
    """delta(min(K t, pi)): a base modulus transported through an affine map."""

    base: Modulus
    K: float
    name = "affine"

    def __post_init__(self):
        if not self.K > 0:
            raise ValueError("K must be positive")

    @property
    def halfspace(self):
        return self.base.halfspace

    def _eval(self, t):
        return np.asarray(self.base(np.minimum(self.K * t, np.pi)), dtype=float)


def modulus_eval(m: Modulus, t):
    return m(t)


def modulus_inverse(m: Modulus, y: float, tol: float = 1e-13) -> float:
    """Generalized inverse inf{t in [0, pi] : delta(t) >= y} by bisection."""
    if y <= 0:
        return 0.0
    hi = np.pi
    if m(hi) < y:
        return float("inf")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if m(mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


# --------------------------------------------------------------------------
# tight modulus


def _closed_form_maximizer(model, eps: float) -> Optional[float]:
    F = model.marginal
    c = math.cos(eps)
    s = math.sin(eps)
    fam = F.family
    if fam == "gaussian":
        return math.sqrt(-2.0 * math.log(c)) / s
    if fam == "student_t" and F.params.get("nu") == 1:
        return c**-0.5
    if fam == "student_t" and F.params.get("nu") == 3:
        num = 3.0 * (-(s**2) - c**1.5 + math.sqrt(c))
        return math.sqrt(num / (math.sqrt(c) * (c**3 - 1.0)))
    if fam == "uniform_ball" and F.params.get("d") == 2:
        return math.sqrt(2.0 / (math.cos(2 * eps) + 3.0))
    if fam == "uniform_ball" and F.params.get("d") == 3:
        return math.sqrt((c - 1.0) / (c**3 - 1.0))
    return None


def golden_section_max(f, a: float, b: float, tol: float = 1e-12, maxiter: int = 500) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on [a, b]; returns (argmax, max)."""
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(maxiter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    candidates = [(f(x), x), (f1, x1), (f2, x2)]
    best = max(candidates)
    return best[1], best[0]


def _numeric_maximizer(model, eps: float) -> tuple[float, float]:
    F = model.marginal
    c = math.cos(eps)

    def obj(t):
        t = np.asarray(t, dtype=float)
        return F.cdf(t) - F.cdf(t * c)

    upper = F.support[1]
    if math.isfinite(upper):
        hi = upper / c
        grid = np.linspace(0.0, hi, 4001)
    else:
        # scan the bulk finely and the tail geometrically out to where the objective is below 1e-14
        bulk = float(F.quantile(0.999)) / c
        far = float(F.quantile(1 - 1e-15)) / c
        grid = np.concatenate([np.linspace(0.0, bulk, 4001), np.geomspace(bulk, max(far, 2 * bulk), 600)[1:]])
    vals = obj(grid)
    i = int(np.argmax(vals))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, grid.size - 1)]
    return golden_section_max(lambda t: float(obj(t)), float(a), float(b))


def tight_maximizer(model: DistributionModel, eps: float, method: str = "auto") -> float:
    """The t at which F_p(t) - F_p(t cos eps) peaks."""
    if not 0 < eps < np.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    if method not in ("auto", "closed", "numeric"):
        raise ValueError("method must be auto, closed or numeric")
    if method != "numeric":
        t = _closed_form_maximizer(model, eps)
        if t is not None:
            return t
        if method == "closed":
            raise ValueError(f"no closed-form maximizer for {model.marginal.family}")
    return _numeric_maximizer(model, eps)[0]


def tight_modulus(model: DistributionModel, eps: float, method: str = "auto") -> float:
    """The tight modulus sup_{t >= 0} F_p(t) - F_p(t cos eps) of a spherical model."""
    if not getattr(model, "spherical", False) or isinstance(model, EllipticalAffine):
        raise ValueError("the tight modulus needs a spherical model")
    if not 0 < eps < np.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    F = model.marginal
    t = tight_maximizer(model, eps, method)
    return float(F.cdf(t) - F.cdf(t * math.cos(eps)))


# --------------------------------------------------------------------------
# rate composition and planning


@dataclass(frozen=True)
class BoundResult:
    """An evaluated envelope at ``n`` directions in dimension ``d``.

    ``bound`` is the modulus value itself (it may exceed 1/2 for loose moduli);
    ``clamped`` caps it at 1/2 for halfspace-depth moduli, where a larger
    error is impossible.
    """

    n: int
    d: int
    rate_argument: float
    polar_angle: float
    bound: float
    saturated: bool
    modulus: str
    fallback: bool = False
    halfspace: bool = True

    @property
    def clamped(self) -> float:
        return min(self.bound, 0.5 if self.halfspace else 1.0)


@dataclass(frozen=True)
class PlanResult:
    target_epsilon: float
    n_required: Optional[int]
    achieved_bound: float
    d: int
    modulus: str
    n_max: int

    @property
    def achievable(self) -> bool:
        return self.n_required is not None


def rate_argument(n: int, d: int) -> float:
    """(d log log n + log n) / n."""
    return (d * math.log(math.log(n)) + math.log(n)) / n


def _check_nd(n, d):
    if int(n) != n or n < MIN_N:
        raise ValueError(f"n must be an integer >= {MIN_N}")
    if int(d) != d or d < 2:
        raise ValueError("d must be an integer >= 2")


def spacing_angle(n: int, d: int) -> tuple[float, float, bool]:
    """Rate argument, its polar angle a_d^{-1}(min(rate, 1)), and the saturation flag."""
    _check_nd(n, d)
    r = rate_argument(int(n), int(d))
    return r, cap_area_inv(int(d), min(r, 1.0)), r > 1.0


def error_bound(n: int, d: int, m: Modulus) -> BoundResult:
    """Almost-sure envelope delta(a_d^{-1}((d log log n + log n) / n)) on Delta_n."""
    r, phi, sat = spacing_angle(n, d)
    fallback = isinstance(m, Tight) and phi >= np.pi / 2
    value = float(m(phi))
    return BoundResult(int(n), int(d), r, phi, max(value, 0.0), sat, m.name, fallback, m.halfspace)


def plan_directions(target_eps: float, d: int, m: Modulus, n_max: int = 10**7) -> PlanResult:
    """Smallest n in [16, n_max] whose envelope is at most ``target_eps``.

    The envelope is non-increasing in n for n >= 16, so an exponential search
    followed by bisection finds the first admissible n.
    """
    if not 0 < target_eps < 0.5:
        raise ValueError("target_eps must lie in (0, 1/2)")
    if int(n_max) != n_max or n_max < MIN_N:
        raise ValueError(f"n_max must be an integer >= {MIN_N}")
    n_max = int(n_max)

    def ok(n):
        return error_bound(n, d, m).bound <= target_eps

    if ok(MIN_N):
        return PlanResult(target_eps, MIN_N, error_bound(MIN_N, d, m).bound, int(d), m.name, n_max)
    lo = MIN_N
    hi = MIN_N
    while True:
        hi = min(2 * hi, n_max)
        if ok(hi):
            break
        if hi == n_max:
            return PlanResult(target_eps, None, error_bound(n_max, d, m).bound, int(d), m.name, n_max)
        lo = hi
    # invariant: ok(hi) and not ok(lo)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return PlanResult(target_eps, hi, error_bound(hi, d, m).bound, int(d), m.name, n_max)


def lipschitz_bounded_density(M: float, diam: float, d: int) -> float:
    """L = M pi^{d/2 - 1} diam^d / Gamma(d/2 + 1) for a density bounded by M on a set of diameter diam."""
    if not M > 0 or not diam > 0:
        raise ValueError("M and diam must be positive")
    if int(d) != d or d < 1:
        raise ValueError("d must be a positive integer")
    return float(M * math.pi ** (d / 2 - 1) * diam**d / math.exp(special.gammaln(d / 2 + 1)))


def affine_condition_constant(A) -> float:
    """K = (pi/2) kappa (1 + kappa) with kappa the condition number of A^T."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be a square matrix")
    sv = np.linalg.svd(A.T, compute_uv=False)
    if sv[-1] <= 1e-12 * sv[0] or sv[-1] == 0:
        raise ValueError("A is numerically singular")
    kappa = sv[0] / sv[-1]
    return float(math.pi / 2 * kappa * (1 + kappa))


def zeta(tau, k: int):
    """Multiplicative modulus (1 - tau^{k/2}) / (1 + tau^{k/2}) of c(x) = 1/(1 + (x)_+^k)."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    t = np.asarray(tau, dtype=float)
    if np.any(~(t > 0)) or np.any(t > 1):
        raise ValueError("tau must lie in (0, 1]")
    h = t ** (k / 2)
    return _out((1 - h) / (1 + h))


def zeta_inv(z, k: int):
    """Inverse of :func:`zeta`: tau = ((1 - z) / (1 + z))^{2/k}."""
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(z >= 1):
        raise ValueError("z must lie in [0, 1)")
    return _out(((1 - z) / (1 + z)) ** (2 / k))


def projection_error_bound(n: int, d: int, k: int) -> BoundResult:
    """Envelope zeta(1 - a_d^{-1}(rate)) on the projection-depth error, spherical targets."""
    r, phi, sat = spacing_angle(n, d)
    if phi >= 1.0:
        return BoundResult(int(n), int(d), r, phi, 1.0, True, "zeta", halfspace=False)
    return BoundResult(int(n), int(d), r, phi, float(zeta(1.0 - phi, k)), sat, "zeta", halfspace=False)


def sampling_term(N: int) -> float:
    """sqrt(log log N / (2N)), the law-of-the-iterated-logarithm term for halfspaces."""
    if int(N) != N or N < MIN_N:
        raise ValueError(f"N must be an integer >= {MIN_N}")
    return math.sqrt(math.log(math.log(N)) / (2 * N))


def empirical_total_bound(N: int, n: int, d: int, m: Modulus, slack_eps: float = 0.0) -> float:
    """Sampling term plus slack plus the direction envelope, for depth w.r.t. a sample."""
    if not slack_eps >= 0:
        raise ValueError("slack_eps must be non-negative")
    return sampling_term(N) + slack_eps + error_bound(n, d, m).bound


def default_modulus(model: DistributionModel) -> Modulus:
    """The sharpest built-in modulus for a model."""
    if isinstance(model, EllipticalAffine):
        K = affine_condition_constant(model.chol)
        return Affine(default_modulus(model.base), K)
    if isinstance(model, PSymmetric) and not model.spherical:
        return PSym1(model.p, model.d)
    if getattr(model, "spherical", False) and getattr(model, "unimodal", False):
        return Tight(model)
    raise ValueError(f"no built-in modulus for {type(model).__name__}")


TABLE1_N = (10**2, 10**3, 10**4, 10**5)
TABLE1_D = (2, 3, 5, 10, 20)


def table1_blocks() -> list[tuple[str, Optional[int], object]]:
    """(label, max dimension or None, modulus factory d -> Modulus) for the bound table."""
    return [
        ("Ellipt. 1", None, lambda d: Elliptical1()),
        ("Ellipt. 2", None, lambda d: Elliptical2()),
        ("2-sym.", None, lambda d: PSym1(2.0, d)),
        ("Gaussian", None, lambda d: Tight(GaussianStd(d))),
        ("Cauchy", None, lambda d: Tight(StudentT(d, 1))),
        # the ball's tight modulus is only tabulated up to d = 5
        ("Uniform", 5, lambda d: Tight(UniformBall(d))),
    ]


def table1(n_list=TABLE1_N, d_list=TABLE1_D) -> list[tuple[str, int, list[Optional[float]]]]:
    """Rows (block, n, [bound per d]) of the standard bound table; None marks omitted cells."""
    out = []
    for label, dmax, make in table1_blocks():
        mods = {d: make(d) for d in d_list if dmax is None or d <= dmax}
        for n in n_list:
            out.append((label, int(n), [error_bound(n, d, mods[d]).bound if d in mods else None for d in d_list]))
    return out
