"""Round-robin baseline using the k-sigma flagging rule.

Pulls every arm once per round, maintains the cross-arm threshold
theta = mean(estimates) + k * std(estimates), and stops once every arm's
confidence interval is disjoint from the threshold's interval.  Arms whose
interval sits entirely above the threshold's are flagged as outliers.  The
rule finds arms with exceptionally high means; it structurally cannot flag
an outlier sitting between two normal groups, which is the contrast the
adaptive puller is measured against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bounds import delta_prime_value, radius_array
from .core import ArmSet, ParameterError
from .env import Environment


@dataclass
class KSigmaState:
    """Final state of one round-robin run."""

    k: float
    pulls: np.ndarray
    means: np.ndarray
    flagged: frozenset[int]
    terminated: bool
    truncated: bool
    total_pulls: int
    threshold: float
    threshold_radius: float


def run_rr(
    arm_set: ArmSet,
    k: float,
    delta: float,
    env: Environment,
    max_pulls: int = 10**8,
) -> KSigmaState:
    """Round-robin until every arm separates from the k-sigma threshold.

    Per-arm radii come from the shared shrinking schedule; the threshold's
    own radius is propagated conservatively as mean(radii) + k * max(radii),
    standing in for the unknown concentration of the sample standard
    deviation.
    """
    n = arm_set.n
    if n < 2:
        raise ParameterError(f"need at least 2 arms, got n={n}")
    if not k > 0:
        raise ParameterError(f"k must be positive, got {k}")
    model = env.model
    pulls = np.zeros(n, dtype=np.int64)
    means = np.zeros(n, dtype=np.float64)
    successes = np.zeros(n, dtype=np.int64)
    total = 0
    terminated = False
    truncated = False
    theta = 0.0
    beta_theta = 0.0
    beta = np.zeros(n, dtype=np.float64)

    while True:
        for i in range(n):
            x = env.pull(i)
            m = int(pulls[i]) + 1
            pulls[i] = m
            means[i] += (x - means[i]) / m
            if x == 1.0:
                successes[i] += 1
        total += n
        dp = delta_prime_value(delta, n, total)
        beta = radius_array(model, pulls, successes, dp)
        theta = float(means.mean() + k * means.std())
        beta_theta = float(beta.mean() + k * beta.max())
        above = means - beta > theta + beta_theta
        below = means + beta < theta - beta_theta
        if bool(np.all(above | below)):
            terminated = True
            break
        if total >= max_pulls:
            truncated = True
            break

    flagged = frozenset(np.flatnonzero(means - beta > theta + beta_theta).tolist())
    return KSigmaState(
        k=k,
        pulls=pulls,
        means=means,
        flagged=flagged,
        terminated=terminated,
        truncated=truncated,
        total_pulls=total,
        threshold=theta,
        threshold_radius=beta_theta,
    )
