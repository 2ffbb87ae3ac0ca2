"""Confidence radii and pull-count bound calculators.

Two per-arm confidence radii are provided: a Hoeffding radius for rewards
bounded in a known interval, and an Agresti-Coull-style radius for Bernoulli
rewards.  Both shrink with the arm's pull count and widen slowly with the
global round counter through the shrinking per-round failure budget

    delta'(T) = 6 * delta / (pi^2 * n * T^2),

whose sum over all rounds and arms stays below delta.  On top of the radii
sit closed-form calculators for how many pulls two arms need before they
stop being neighbors, and for the total pull count the adaptive puller needs
to terminate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfcinv

from .core import ArmStats, Bernoulli, Bounded, EPSILON_FLOOR, Params, ParameterError, StateError

_PI2 = math.pi * math.pi


@dataclass(frozen=True)
class BoundContext:
    """Everything the radius formulas need besides the arm itself."""

    params: Params
    n: int
    total_pulls: int

    def __post_init__(self):
        if self.total_pulls < 1:
            raise ParameterError(f"total_pulls must be >= 1, got {self.total_pulls}")
        if self.n < 1:
            raise ParameterError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class PullBoundReport:
    """Sandwich on the pulls two arms with a given mean gap stay neighbors.

    upper_coef and lower_coef are the gap-dependent constants
    2*(b+1)^2*R^2/gap^2 and 2*(b-1)^2*R^2/gap^2 driving the upper and lower
    ends of the sandwich.
    """

    upper_coef: float
    lower_coef: float
    lower: float
    upper: float


def delta_prime_value(delta: float, n: int, total_pulls: int) -> float:
    """Per-round, per-arm failure budget at round T; strictly decreasing in T."""
    return 6.0 * delta / (_PI2 * n * total_pulls * total_pulls)


def delta_prime(ctx: BoundContext) -> float:
    return delta_prime_value(ctx.params.delta, ctx.n, ctx.total_pulls)


def coefficient_b(epsilon: float) -> float:
    """Neighbor-test slack factor; > 1, decreasing in epsilon, -> 1 at infinity."""
    if not epsilon > EPSILON_FLOOR:
        raise ParameterError(
            f"epsilon must exceed {EPSILON_FLOOR:.6f} for a valid coefficient, got {epsilon}"
        )
    e16 = EPSILON_FLOOR + 1.0
    return (1.0 + e16 + epsilon) / (1.0 - e16 + epsilon)


def z_value(delta_p: float) -> float:
    """Inverse error function at 1 - delta_p, evaluated as erfcinv(delta_p).

    delta_p gets extremely small (1e-7 and below), where 1 - delta_p rounds
    to 1.0 in double precision; erfcinv keeps full relative accuracy there.
    """
    return float(erfcinv(delta_p))


def _bounded_radius_array(reward_range: float, pulls, delta_p: float):
    return reward_range * np.sqrt(-math.log(delta_p) / (2.0 * np.asarray(pulls, dtype=np.float64)))


def _bernoulli_radius_array(pulls, successes, delta_p: float):
    z = z_value(delta_p)
    z2 = z * z
    m = np.asarray(pulls, dtype=np.float64)
    p = (np.asarray(successes, dtype=np.float64) + z2 / 2.0) / (m + z2)
    return z * np.sqrt(p * (1.0 - p) / m)


def radius_array(model, pulls, successes, delta_p: float) -> np.ndarray:
    """Vectorized confidence radius for every arm under the given reward model."""
    if isinstance(model, Bernoulli):
        return _bernoulli_radius_array(pulls, successes, delta_p)
    return _bounded_radius_array(model.reward_range, pulls, delta_p)


def ucb_radius_bounded(stats: ArmStats, ctx: BoundContext) -> float:
    """Hoeffding radius R*sqrt(ln(1/delta')/(2m)) for interval-bounded rewards."""
    if stats.pulls < 1:
        raise StateError("radius undefined before the arm has been pulled")
    model = ctx.params.reward_model
    reward_range = model.reward_range if isinstance(model, Bounded) else 1.0
    return float(_bounded_radius_array(reward_range, stats.pulls, delta_prime(ctx)))


def ucb_radius_bernoulli(stats: ArmStats, ctx: BoundContext) -> float:
    """Center-adjusted binomial radius Z*sqrt(p~(1-p~)/m) with Z = erfcinv(delta')."""
    if stats.pulls < 1:
        raise StateError("radius undefined before the arm has been pulled")
    if not 0 <= stats.success_count <= stats.pulls:
        raise StateError(
            f"success count {stats.success_count} inconsistent with {stats.pulls} pulls"
        )
    return float(_bernoulli_radius_array(stats.pulls, stats.success_count, delta_prime(ctx)))


def ucb_radius(stats: ArmStats, ctx: BoundContext) -> float:
    if isinstance(ctx.params.reward_model, Bernoulli):
        return ucb_radius_bernoulli(stats, ctx)
    return ucb_radius_bounded(stats, ctx)


def neighbor_rhs(stats_i: ArmStats, stats_j: ArmStats, ctx: BoundContext) -> float:
    """Right-hand side of the neighbor test: b * (radius_i + radius_j).

    Two arms stay neighbors while their empirical means differ by at most
    this much.
    """
    b = coefficient_b(ctx.params.epsilon)
    return b * (ucb_radius(stats_i, ctx) + ucb_radius(stats_j, ctx))


def _clamped_log(x: float) -> float:
    # The calculators assume the asymptotic regime; clamping the log argument
    # at e keeps them finite and ordered for tiny coefficients.
    return math.log(max(x, math.e))


def pull_count_bounds(gap: float, params: Params, n: int) -> PullBoundReport:
    """Closed-form sandwich on pulls needed before a mean gap severs an edge."""
    if not gap > 0:
        raise ParameterError(f"gap must be positive, got {gap}")
    b = coefficient_b(params.epsilon)
    r2 = params.reward_range ** 2
    upper_coef = 2.0 * (b + 1.0) ** 2 * r2 / (gap * gap)
    lower_coef = 2.0 * (b - 1.0) ** 2 * r2 / (gap * gap)
    scale = math.sqrt(_PI2 * n * n / (6.0 * params.delta))
    upper = 4.0 * upper_coef * _clamped_log(2.0 * upper_coef * scale) + 1.0
    lower = 4.0 * lower_coef * _clamped_log(2.0 * lower_coef * scale) - 3.0
    return PullBoundReport(upper_coef=upper_coef, lower_coef=lower_coef, lower=lower, upper=upper)


def total_pull_bound(
    min_gap: float, params: Params, n: int, *, literal_gap_power: bool = False
) -> float:
    """Upper bound on total pulls until the adaptive puller terminates.

    The coefficient uses the squared minimum pairwise gap, matching the
    per-pair sandwich above; literal_gap_power=True evaluates the variant
    with the gap to the first power instead.
    """
    if not min_gap > 0:
        raise ParameterError(f"min_gap must be positive, got {min_gap}")
    b = coefficient_b(params.epsilon)
    r2 = params.reward_range ** 2
    denom = min_gap if literal_gap_power else min_gap * min_gap
    coef = 2.0 * (b + 1.0) ** 2 * r2 / denom
    scale = math.sqrt(_PI2 * n / (6.0 * params.delta))
    return 4.0 * coef * n * (_clamped_log(2.0 * coef * n) + _clamped_log(scale)) + 2.0 * (n - 1)
