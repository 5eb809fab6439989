"""Proximal-operator regret accounting for online learning and games.

The package couples three online learners (projected gradient descent, its
optimistic variant, and mirror descent) with exact regret accounting against
families of weakly convex comparator functions, evaluates every associated
regret guarantee as a number, and drives smooth convex games in self-play.
"""

from . import adversaries, bounds, bregman, comparators, fuzz, games, geometry, learners, regret
from .bregman import MirrorMap, bregman_div, bregman_prox, entropy_map, euclidean_map, md_argmin
from .comparators import (
    Comparator,
    ProxResult,
    affine_to_comparator,
    bf_bound_affine,
    check_prox_optimality,
    constant,
    contraction_weight,
    indicator_point,
    indicator_set,
    interpolate_endomorphism,
    key_inequality_gap,
    linear,
    prox,
    prox_iterative,
    quadratic,
)
from .fuzz import key_inequality_fuzz
from .games import (
    PlayRecord,
    SmoothConvexGame,
    bilinear_zero_sum,
    first_price_auction,
    gradient_variation,
    matching_pennies,
    normal_form,
    pce_gap,
    quadratic_polymatrix,
    self_play,
    social_regret,
    validate_constants,
)
from .geometry import (
    ConvexSet,
    ball,
    box,
    diameter,
    inner_subset,
    norm,
    project,
    simplex,
    translate,
    whole_space,
)
from .learners import (
    GradientDescent,
    MirrorDescent,
    OptimisticGradientDescent,
    StepSchedule,
    constant_schedule,
    inv_sqrt_schedule,
    optimized_schedule,
    run,
)
from .regret import (
    RegretReport,
    Trace,
    bregman_proximal_regret,
    external_regret,
    family_regret,
    gradient_equilibrium_norm,
    proximal_regret,
    symmetric_linear_swap_regret,
    unit_linear_family,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
