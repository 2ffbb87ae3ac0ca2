"""Reward environments, synthetic instance generation, arm-means ingestion.

An environment owns one derived random stream per arm, so the rewards an
arm yields depend only on (seed, arm, draw index) and never on how pulls on
different arms interleave.  The synthetic generator builds instances with a
planted outlier group and hands every candidate to the certification oracle;
the oracle is the sole arbiter of instance validity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import oracle
from .core import (
    ArmSet,
    Bernoulli,
    Bounded,
    GenerationError,
    IngestionError,
    Params,
    ParameterError,
    RewardModel,
    arm_seed_sequences,
    community_cutoff,
)

_BLOCK = 1024


class Environment:
    """Simulated bandit: pull(i) draws an i.i.d. reward with mean true_means[i].

    Bernoulli arms flip a coin; bounded arms draw uniformly from an interval
    centered on the mean, shrunk where needed so the interval stays inside
    the support and the mean stays exact.
    """

    def __init__(
        self,
        arm_set: ArmSet,
        model: RewardModel | None = None,
        seed: int = 0,
        noise_width: float = 0.1,
    ):
        means = arm_set.means_array()
        self.arm_set = arm_set
        self.model = model if model is not None else Bernoulli()
        self.seed = int(seed)
        self.n = arm_set.n
        for i, y in enumerate(means):
            if not self.model.contains(float(y)):
                raise ParameterError(f"arm {i} mean {y} outside the reward-model support")
        self._means = means
        if isinstance(self.model, Bounded):
            half = np.minimum(noise_width, np.minimum(means - self.model.lo, self.model.hi - means))
            self._half_width = half
        else:
            self._half_width = None
        self._gens = [
            np.random.Generator(np.random.PCG64(ss))
            for ss in arm_seed_sequences(self.seed, self.n)
        ]
        self._buf: list[np.ndarray] = [np.empty(0)] * self.n
        self._pos = [0] * self.n

    def _refill(self, i: int) -> None:
        u = self._gens[i].random(_BLOCK)
        if self._half_width is None:
            self._buf[i] = (u < self._means[i]).astype(np.float64)
        else:
            self._buf[i] = self._means[i] + self._half_width[i] * (2.0 * u - 1.0)
        self._pos[i] = 0

    def pull(self, i: int) -> float:
        if not 0 <= i < self.n:
            raise ParameterError(f"arm id {i} out of range for n={self.n}")
        pos = self._pos[i]
        buf = self._buf[i]
        if pos == len(buf):
            self._refill(i)
            pos = 0
            buf = self._buf[i]
        self._pos[i] = pos + 1
        return float(buf[pos])

    def draw_many(self, i: int, k: int) -> np.ndarray:
        """Consume and return the arm's next k rewards (same stream as pull)."""
        out = np.empty(k, dtype=np.float64)
        filled = 0
        while filled < k:
            if self._pos[i] == len(self._buf[i]):
                self._refill(i)
            take = min(k - filled, len(self._buf[i]) - self._pos[i])
            out[filled : filled + take] = self._buf[i][self._pos[i] : self._pos[i] + take]
            self._pos[i] += take
            filled += take
        return out


UPPER_SIDE = "upper"
INTERMEDIATE = "intermediate"

_DEFAULT_UPPER_BAND = (0.05, 0.65)
_DEFAULT_LOW_BAND = (0.05, 0.35)
_DEFAULT_HIGH_BAND = (0.65, 0.95)


def max_certifiable_group_size(n: int, rho: float) -> int:
    """Largest group size strictly below n*(1-rho); 0 when none exists."""
    small = community_cutoff(n, rho)
    size = small.numerator - 1 if small.denominator == 1 else int(small)
    return max(0, min(size, n - 1))


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic instance with a planted outlier group.

    outlier_count defaults to the largest certifiable group size for
    (n, rho).  Normal means are drawn uniformly from fixed bands (one band
    for upper-side outliers, two disjoint bands for intermediate ones) and
    the group is placed beyond separation_slack times the required distance;
    the draw is rejected and retried until the planted group certifies.
    """

    n: int
    epsilon: float
    rho: float
    outlier_type: str = UPPER_SIDE
    outlier_count: Optional[int] = None
    seed: int = 0
    max_attempts: int = 100_000
    separation_slack: float = 1.25
    normal_band: tuple[float, float] = _DEFAULT_UPPER_BAND
    low_band: tuple[float, float] = _DEFAULT_LOW_BAND
    high_band: tuple[float, float] = _DEFAULT_HIGH_BAND

    def __post_init__(self):
        if self.outlier_type not in (UPPER_SIDE, INTERMEDIATE):
            raise ParameterError(f"unknown outlier type {self.outlier_type!r}")
        if self.n < 4:
            raise ParameterError(f"synthetic instances need n >= 4, got {self.n}")

    def resolved_count(self) -> int:
        cap = max_certifiable_group_size(self.n, self.rho)
        if cap < 1:
            raise GenerationError(
                f"no group size below n*(1-rho) exists for n={self.n}, rho={self.rho}"
            )
        if self.outlier_count is None:
            return cap
        if not 1 <= self.outlier_count <= cap:
            raise GenerationError(
                f"outlier_count={self.outlier_count} cannot certify: "
                f"must be between 1 and {cap} for n={self.n}, rho={self.rho}"
            )
        return self.outlier_count


def _max_gap(sorted_vals: np.ndarray) -> float:
    if len(sorted_vals) < 2:
        return 0.0
    return float(np.max(np.diff(sorted_vals)))


def generate(spec: SyntheticSpec) -> ArmSet:
    """Draw an instance whose planted group certifies under (epsilon, rho).

    Arm ids are assigned deterministically: normals first in ascending mean
    order, then the planted outliers in ascending order, so the planted
    group is always the last `outlier_count` ids.
    """
    count = spec.resolved_count()
    nn = spec.n - count
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    need = (1.0 + spec.epsilon) * spec.separation_slack
    params = Params(epsilon=spec.epsilon, rho=spec.rho, delta=0.5)

    for attempt in range(1, spec.max_attempts + 1):
        if spec.outlier_type == UPPER_SIDE:
            lo, hi = spec.normal_band
            normals = np.sort(rng.uniform(lo, hi, nn))
            base = normals[-1] + need * _max_gap(normals)
            if base >= 0.99:
                continue
            outliers = np.sort(rng.uniform(base, 1.0, count))
        else:
            n_low = nn // 2
            n_high = nn - n_low
            lows = np.sort(rng.uniform(*spec.low_band, n_low))
            highs = np.sort(rng.uniform(*spec.high_band, n_high))
            margin = need * max(_max_gap(lows), _max_gap(highs))
            left = lows[-1] + margin
            right = highs[0] - margin
            if right - left <= 1e-4:
                continue
            mid = 0.5 * (left + right)
            spread = min(right - left, 0.02 + 0.01 * count)
            outliers = np.sort(rng.uniform(mid - spread / 2.0, mid + spread / 2.0, count))
            normals = np.concatenate([lows, highs])
        means = np.concatenate([normals, outliers])
        if len(np.unique(means)) != spec.n:
            continue
        arm_set = ArmSet(n=spec.n, true_means=tuple(means.tolist()))
        group = range(nn, spec.n)
        verdict = oracle.check_group(group, arm_set, params)
        if not verdict.certified:
            continue
        if spec.outlier_type == UPPER_SIDE and len(verdict.upper_set) != 0:
            continue
        if spec.outlier_type == INTERMEDIATE and (
            len(verdict.upper_set) == 0 or len(verdict.lower_set) == 0
        ):
            continue
        return arm_set

    raise GenerationError(
        f"could not place a certifiable {spec.outlier_type} group of size {count} "
        f"within {spec.max_attempts} attempts (n={spec.n}, epsilon={spec.epsilon}, "
        f"rho={spec.rho}); the separation requirement likely exceeds the unit interval"
    )


def planted_group(spec: SyntheticSpec) -> frozenset[int]:
    """Ids of the planted outliers under the generator's id convention."""
    return frozenset(range(spec.n - spec.resolved_count(), spec.n))


def load_means(
    path: str | Path,
    reward_model: RewardModel | None = None,
    require_distinct: bool = True,
) -> ArmSet:
    """Read an `arm_id,mean` file into an ArmSet.

    One record per line, 0-based integer ids, decimal means; `#` starts a
    comment line.  Ids must form a complete 0..n-1 range, means must sit in
    the reward-model support; duplicate means are rejected unless the caller
    opts out (the certification oracle requires distinct means).
    """
    model = reward_model if reward_model is not None else Bernoulli()
    path = Path(path)
    entries: dict[int, float] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise IngestionError(f"{path}:{lineno}: expected 'arm_id,mean', got {raw!r}")
            try:
                arm = int(parts[0])
                mean = float(parts[1])
            except ValueError as exc:
                raise IngestionError(f"{path}:{lineno}: {exc}") from exc
            if not math.isfinite(mean):
                raise IngestionError(f"{path}:{lineno}: mean must be finite, got {mean}")
            if not model.contains(mean):
                raise IngestionError(
                    f"{path}:{lineno}: mean {mean} outside the reward-model support"
                )
            if arm in entries:
                raise IngestionError(f"{path}:{lineno}: duplicate arm id {arm}")
            entries[arm] = mean
    if not entries:
        raise IngestionError(f"{path}: no arm records found")
    n = len(entries)
    if sorted(entries) != list(range(n)):
        raise IngestionError(f"{path}: arm ids must be exactly 0..{n - 1}")
    means = tuple(entries[i] for i in range(n))
    if require_distinct and len(set(means)) != n:
        raise IngestionError(f"{path}: duplicate means are not allowed")
    return ArmSet(n=n, true_means=means)
