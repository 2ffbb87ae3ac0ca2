"""Shared domain types: parameters, reward models, per-arm statistics, seeding.

Every other module builds on the types here.  Values are plain data and are
never shared mutably across trials; a trial owns its state and its random
streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

import numpy as np

# Smallest admissible distance-ratio slack; below it the neighbor-test
# coefficient would not be a positive contraction-free factor.
EPSILON_FLOOR = math.exp(1.0 / 16.0) - 1.0


class ParameterError(ValueError):
    """A configuration value is outside its admissible range."""


class StateError(RuntimeError):
    """An operation was called on state that does not support it yet."""


class GenerationError(RuntimeError):
    """Synthetic instance generation could not satisfy its constraints."""


class IngestionError(ValueError):
    """An arm-means file failed to parse or validate."""


@dataclass(frozen=True)
class Bernoulli:
    """Rewards are 0/1 coin flips with per-arm success probability."""

    @property
    def reward_range(self) -> float:
        return 1.0

    def contains(self, x: float) -> bool:
        return 0.0 <= x <= 1.0


@dataclass(frozen=True)
class Bounded:
    """Rewards land in the fixed interval [lo, hi]."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ParameterError(f"bounded support needs hi > lo, got [{self.lo}, {self.hi}]")

    @property
    def reward_range(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


RewardModel = Union[Bernoulli, Bounded]


@dataclass(frozen=True)
class Params:
    """Detection parameters shared by the oracle, the bounds, and the puller.

    epsilon  distance-ratio slack; an outlier must sit more than (1+epsilon)
             times every normal arm's local neighbor gap away from the
             normal arms.
    rho      assumed proportion of normal arms, in (0.5, 1).
    delta    overall failure probability budget, in (0, 1).
    """

    epsilon: float
    rho: float
    delta: float
    reward_model: RewardModel = field(default_factory=Bernoulli)

    def __post_init__(self):
        if not self.epsilon > EPSILON_FLOOR:
            raise ParameterError(
                f"epsilon must exceed {EPSILON_FLOOR:.6f}, got {self.epsilon}"
            )
        if not 0.5 < self.rho < 1.0:
            raise ParameterError(f"rho must lie in (0.5, 1), got {self.rho}")
        if not 0.0 < self.delta < 1.0:
            raise ParameterError(f"delta must lie in (0, 1), got {self.delta}")

    @property
    def reward_range(self) -> float:
        return self.reward_model.reward_range


@dataclass(frozen=True)
class ArmSet:
    """The n arms, with true expected rewards when running against a simulator.

    true_means is absent in pure-online use; oracle and evaluation paths
    require it.
    """

    n: int
    true_means: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError(f"need at least one arm, got n={self.n}")
        if self.true_means is not None:
            object.__setattr__(self, "true_means", tuple(float(y) for y in self.true_means))
            if len(self.true_means) != self.n:
                raise ParameterError(
                    f"{len(self.true_means)} means supplied for n={self.n} arms"
                )

    def means_array(self) -> np.ndarray:
        if self.true_means is None:
            raise StateError("true means are not available for this arm set")
        return np.asarray(self.true_means, dtype=np.float64)

    def require_distinct_means(self) -> np.ndarray:
        means = self.means_array()
        if len(np.unique(means)) != self.n:
            raise ParameterError("arm means must be pairwise distinct")
        return means


@dataclass
class ArmStats:
    """Sufficient statistics of one arm: pull count, running mean, successes.

    The mean follows the numerically stable running update
    mean += (x - mean) / pulls; success_count tracks rewards equal to 1
    (meaningful for the Bernoulli model).
    """

    pulls: int = 0
    mean: float = 0.0
    success_count: int = 0


def update_stats(stats: ArmStats, reward: float, model: RewardModel | None = None) -> ArmStats:
    """Fold one observed reward into the statistics, returning a new value."""
    if model is not None and not model.contains(reward):
        raise ParameterError(f"reward {reward} is outside the reward-model support")
    pulls = stats.pulls + 1
    mean = stats.mean + (reward - stats.mean) / pulls
    success = stats.success_count + (1 if reward == 1.0 else 0)
    return ArmStats(pulls=pulls, mean=mean, success_count=success)


def exact_fraction(x: float) -> Fraction:
    """Exact rational for a user-supplied decimal such as 0.9.

    Threshold comparisons like "community smaller than n*(1-rho)" are strict;
    going through the shortest decimal repr keeps them exact at integer
    boundaries instead of inheriting binary-float rounding.
    """
    return Fraction(str(x))


def community_cutoff(n: int, rho: float) -> Fraction:
    """Exact value of n*(1-rho): communities strictly below it are terminal."""
    return n * (1 - exact_fraction(rho))


def arm_seed_sequences(seed: int, n: int) -> list[np.random.SeedSequence]:
    """One child seed sequence per arm, keyed by arm id.

    Per-arm derivation means an arm's reward stream depends only on
    (seed, arm, draw index), never on the interleaving of pulls.
    """
    return [np.random.SeedSequence(entropy=seed, spawn_key=(i,)) for i in range(n)]
