"""Randomized Tukey and projection depth with uniform approximation-error bounds.

The halfspace depth of a point is approximated by the minimum of its
univariate projected depths over ``n`` random directions. :mod:`randepth.bounds`
turns a modulus of continuity of the halfspace functions into an almost-sure
bound on the worst-case approximation error and inverts it to choose ``n``.
"""

from .bounds import (
    Affine,
    BoundResult,
    Elliptical1,
    Elliptical2,
    Holder,
    Lipschitz,
    Modulus,
    PlanResult,
    PSym1,
    PSym2,
    Tight,
    affine_condition_constant,
    default_modulus,
    empirical_total_bound,
    error_bound,
    lipschitz_bounded_density,
    modulus_eval,
    modulus_inverse,
    plan_directions,
    projection_error_bound,
    sampling_term,
    table1,
    tight_maximizer,
    tight_modulus,
    zeta,
    zeta_inv,
)
from .depth import (
    DepthResult,
    ProjectionDepthSpec,
    approx_halfspace_depth,
    approx_halfspace_depths,
    approx_outlyingness,
    approx_projection_depth,
    exact_halfspace_depth_2d,
    exact_outlyingness,
    exact_projection_depth,
)
from .models import (
    Dataset,
    DistributionModel,
    EllipticalAffine,
    GaussianStd,
    PSymmetric,
    StudentT,
    UniformBall,
    UniformSphere,
    exact_halfspace_depth,
    halfspace_function,
    marginal_cdf,
    whiten,
)
from .sim import (
    SimConfig,
    SimReport,
    atomic_nonuniformity_demo,
    empirical_trajectory,
    estimate_sup_error,
    outlyingness_divergence_demo,
    spacing_lil_diagnostic,
)
from .sphere import DirectionSet, cap_area, cap_area_inv, great_circle_distance, max_spacing, sample_directions

__version__ = "0.1.0"

__all__ = [
    "Affine",
    "affine_condition_constant",
    "approx_halfspace_depth",
    "approx_halfspace_depths",
    "approx_outlyingness",
    "approx_projection_depth",
    "atomic_nonuniformity_demo",
    "BoundResult",
    "cap_area",
    "cap_area_inv",
    "Dataset",
    "default_modulus",
    "DepthResult",
    "DirectionSet",
    "DistributionModel",
    "Elliptical1",
    "Elliptical2",
    "EllipticalAffine",
    "empirical_total_bound",
    "empirical_trajectory",
    "error_bound",
    "estimate_sup_error",
    "exact_halfspace_depth",
    "exact_halfspace_depth_2d",
    "exact_outlyingness",
    "exact_projection_depth",
    "GaussianStd",
    "great_circle_distance",
    "halfspace_function",
    "Holder",
    "Lipschitz",
    "lipschitz_bounded_density",
    "marginal_cdf",
    "max_spacing",
    "Modulus",
    "modulus_eval",
    "modulus_inverse",
    "outlyingness_divergence_demo",
    "plan_directions",
    "PlanResult",
    "projection_error_bound",
    "ProjectionDepthSpec",
    "PSym1",
    "PSym2",
    "PSymmetric",
    "sample_directions",
    "sampling_term",
    "SimConfig",
    "SimReport",
    "spacing_lil_diagnostic",
    "StudentT",
    "table1",
    "Tight",
    "tight_maximizer",
    "tight_modulus",
    "UniformBall",
    "UniformSphere",
    "whiten",
    "zeta",
    "zeta_inv",
]
