"""Adaptive pulling that isolates outlier arms through a shrinking neighbor graph.

One run starts by pulling every arm once (the graph is then provably
complete), and afterwards sweeps the not-yet-terminated arms round-robin.
Each pull updates the pulled arm's statistics, deletes any of its incident
edges whose mean difference now exceeds the neighbor allowance, and marks
every member of any community smaller than n*(1-rho) as terminated,
recording the current round as that arm's score.  The run finishes once at
least n*(1-rho) arms are terminated; arms are finally ranked by ascending
score, earliest-terminated first, which puts certified outliers ahead of
normal arms with high probability.

The engine has two execution paths with identical semantics: a plain
per-pull path, and a windowed path that pre-certifies arms whose incident
edges cannot possibly break within the next k sweeps (worst-case mean drift
against a lower bound on the growing allowance) and skips the edge and
community work for their pulls.  A pull of a certified arm provably removes
no edge, so skipping the check leaves every trajectory bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bounds import coefficient_b, delta_prime_value, radius_array, total_pull_bound, z_value
from .core import (
    ArmSet,
    ArmStats,
    Bernoulli,
    Params,
    ParameterError,
    StateError,
    community_cutoff,
)
from .env import Environment
from .graph import NeighborGraph, communities, complete_graph, prune_all, prune_incident

UNSET = -1
_WINDOW_DIVISOR = 4096
_MAX_WINDOW = 4096
_SMALL_DEGREE = 32
_DEFAULT_MAX_PULLS = 10**8


@dataclass(frozen=True)
class Ranking:
    """Arms in ascending score order; unterminated arms trail in id order."""

    order: tuple[int, ...]
    s_values: dict[int, int]


class GoldState:
    """Mutable state of one run: counts, means, graph, terminations, scores.

    Per-arm scalars live in plain lists (the pull loop touches them a few
    at a time); vector passes build arrays on demand.
    """

    __slots__ = (
        "params", "n", "round", "pulls", "means", "successes", "graph",
        "terminated", "s_score", "terminated_count", "finished", "truncated",
        "cutoff", "b", "bernoulli",
    )

    def __init__(self, arm_set: ArmSet, params: Params):
        self.params = params
        self.n = arm_set.n
        self.round = 0
        self.pulls = [0.0] * self.n
        self.means = [0.0] * self.n
        self.successes = [0.0] * self.n
        self.graph: NeighborGraph | None = None
        self.terminated = [False] * self.n
        self.s_score = [UNSET] * self.n
        self.terminated_count = 0
        self.finished = False
        self.truncated = False
        self.cutoff: Fraction = community_cutoff(self.n, params.rho)
        self.b = coefficient_b(params.epsilon)
        self.bernoulli = isinstance(params.reward_model, Bernoulli)

    def stats(self, i: int) -> ArmStats:
        return ArmStats(
            pulls=int(self.pulls[i]),
            mean=self.means[i],
            success_count=int(self.successes[i]),
        )

    def pulls_array(self) -> np.ndarray:
        return np.array(self.pulls, dtype=np.float64)

    def means_array(self) -> np.ndarray:
        return np.array(self.means, dtype=np.float64)

    def successes_array(self) -> np.ndarray:
        return np.array(self.successes, dtype=np.float64)

    def terminated_ids(self) -> list[int]:
        return [i for i, t in enumerate(self.terminated) if t]

    def live_ids(self) -> list[int]:
        return [i for i, t in enumerate(self.terminated) if not t]

    def s_scores(self) -> dict[int, int]:
        return {i: s for i, s in enumerate(self.s_score) if s != UNSET}


def init(arm_set: ArmSet, params: Params, env: Environment) -> GoldState:
    """Pull every arm once and start from the complete neighbor graph.

    With a single pull per arm the confidence allowance exceeds the reward
    range for both reward models, so every pair passes the neighbor test and
    building the complete graph directly is exact.
    """
    if arm_set.n < 2:
        raise ParameterError(f"need at least 2 arms, got n={arm_set.n}")
    state = GoldState(arm_set, params)
    for i in range(state.n):
        x = env.pull(i)
        state.round += 1
        state.pulls[i] = 1.0
        state.means[i] = x
        if x == 1.0:
            state.successes[i] = 1.0
    state.graph = complete_graph(state.n)
    return state


def _apply_terminations(state: GoldState) -> bool:
    """Mark members of every undersized community; scores are write-once."""
    part = communities(state.graph)
    changed = False
    for cid, size in part.sizes.items():
        if size < state.cutoff:
            for a in part.members(cid).tolist():
                if not state.terminated[a]:
                    state.terminated[a] = True
                    state.s_score[a] = state.round
                    state.terminated_count += 1
                    changed = True
    return changed


def _radius_vector(state: GoldState, dp: float) -> np.ndarray:
    return radius_array(
        state.params.reward_model, state.pulls_array(), state.successes_array(), dp
    )


def _prune_pull(state: GoldState, i: int, dp: float) -> int:
    """Incremental prune around the pulled arm.

    Low-degree arms take a scalar path; its expressions mirror the
    vectorized radius kernel operation for operation, so both paths make
    identical floating-point decisions.
    """
    graph = state.graph
    nbrs = graph.nbr_sets[i]
    deg = len(nbrs)
    if deg == 0:
        return 0
    if deg > _SMALL_DEGREE:
        radii = _radius_vector(state, dp)
        return prune_incident(graph, i, state.means_array(), radii, state.b)

    means = state.means
    pulls = state.pulls
    b = state.b
    yi = means[i]
    removed: list[int] = []
    if state.bernoulli:
        z = z_value(dp)
        z2 = z * z
        half = z2 / 2.0
        succ = state.successes
        p = (succ[i] + half) / (pulls[i] + z2)
        ri = z * math.sqrt(p * (1.0 - p) / pulls[i])
        for j in nbrs:
            p = (succ[j] + half) / (pulls[j] + z2)
            rj = z * math.sqrt(p * (1.0 - p) / pulls[j])
            if abs(means[j] - yi) > b * (rj + ri):
                removed.append(j)
    else:
        r = state.params.reward_range
        c = -math.log(dp)
        ri = r * math.sqrt(c / (2.0 * pulls[i]))
        for j in nbrs:
            rj = r * math.sqrt(c / (2.0 * pulls[j]))
            if abs(means[j] - yi) > b * (rj + ri):
                removed.append(j)
    if removed:
        graph.remove_edges(i, removed)
    return len(removed)


def _exact_pull(state: GoldState, env: Environment, i: int, mode: str, hook=None) -> None:
    x = env.pull(i)
    state.round += 1
    m = state.pulls[i] + 1.0
    state.pulls[i] = m
    state.means[i] += (x - state.means[i]) / m
    if x == 1.0:
        state.successes[i] += 1.0
    dp = delta_prime_value(state.params.delta, state.n, state.round)
    if mode == "full":
        removed = prune_all(state.graph, state.means_array(), _radius_vector(state, dp), state.b)
    else:
        removed = _prune_pull(state, i, dp)
    if removed:
        _apply_terminations(state)
    if hook is not None:
        hook(state, i, removed)


def sweep(
    state: GoldState,
    env: Environment,
    *,
    mode: str = "incremental",
    early_exit: bool = False,
    max_pulls: int | None = None,
    hook=None,
) -> GoldState:
    """One round-robin pass over the arms that were live when the pass began.

    Arms that terminate mid-pass are skipped for the rest of it.  The
    finished flag is re-evaluated when the pass ends (or per pull when
    early_exit is set).
    """
    if state.finished:
        raise StateError("sweep called on a finished run")
    terminated = state.terminated
    for i in state.live_ids():
        if terminated[i]:
            continue
        if max_pulls is not None and state.round >= max_pulls:
            state.truncated = True
            break
        _exact_pull(state, env, i, mode, hook)
        if early_exit and state.terminated_count >= state.cutoff:
            break
    state.finished = state.terminated_count >= state.cutoff
    return state


def _radius_floor(
    state: GoldState, pulls: np.ndarray, succ: np.ndarray, kvec: np.ndarray, dp: float
) -> np.ndarray:
    """Per-arm lower bound on the confidence radius over the next k pulls.

    The radius shrinks with the arm's own pulls and grows with the round
    counter, so evaluating it at the maximal future pull count and the
    current round bounds it from below; for the Bernoulli radius the
    success count is pushed to whichever edge of its reachable range makes
    the half-width smallest.
    """
    mk = pulls + kvec
    if state.bernoulli:
        z = z_value(dp)
        z2 = z * z
        p_lo = (succ + z2 / 2.0) / (mk + z2)
        p_hi = (succ + kvec + z2 / 2.0) / (mk + z2)
        f = np.minimum(p_lo * (1.0 - p_lo), p_hi * (1.0 - p_hi))
        return z * np.sqrt(f / mk)
    r = state.params.reward_range
    return r * np.sqrt(-math.log(dp) / (2.0 * mk))


def _plan_window(state: GoldState, max_pulls: int) -> tuple[int, list[bool]] | None:
    """Pick a sweep count k and the set of arms provably inert for k sweeps.

    An arm is inert when every incident edge keeps positive margin even if
    every mean drifts maximally against it and every allowance shrinks to
    its floor.  Pulls of inert arms then skip the edge and community work;
    the rest keep the exact per-pull treatment.
    """
    live = np.array([not t for t in state.terminated], dtype=bool)
    n_live = int(live.sum())
    if n_live == 0:
        return None
    pulls = state.pulls_array()
    min_live_pulls = int(pulls[live].min())
    k = min(_MAX_WINDOW, max(min_live_pulls // _WINDOW_DIVISOR, 1))
    remaining = max_pulls - state.round
    if remaining < k * n_live:
        k = remaining // n_live
    if k < 1:
        return None

    kvec = np.where(live, float(k), 0.0)
    dp = delta_prime_value(state.params.delta, state.n, state.round + 1)
    succ = state.successes_array()
    means = state.means_array()
    floor = _radius_floor(state, pulls, succ, kvec, dp)
    drift = state.params.reward_range * kvec / (pulls + 1.0)
    lhs_max = np.abs(means[:, None] - means[None, :]) + drift[:, None] + drift[None, :]
    rhs_min = state.b * (floor[:, None] + floor[None, :])
    # Tiny inflation absorbs last-ulp rounding differences between the floor
    # expressions and the exact per-pull radii.
    at_risk = (state.graph.adj & (lhs_max * (1.0 + 1e-12) + 1e-15 > rhs_min)).any(axis=1)
    safe = live & ~at_risk
    return k, safe.tolist()


def _window_sweeps(
    state: GoldState,
    env: Environment,
    k: int,
    safe: list[bool],
    *,
    mode: str,
    early_exit: bool,
    max_pulls: int,
    hook=None,
) -> None:
    """Run k sweeps with certified-inert arms on the fast path."""
    pulls = state.pulls
    means = state.means
    successes = state.successes
    terminated = state.terminated
    pull = env.pull
    for _ in range(k):
        if state.finished or state.truncated:
            return
        for i in state.live_ids():
            if terminated[i]:
                continue
            if state.round >= max_pulls:
                state.truncated = True
                break
            if safe[i]:
                x = pull(i)
                state.round += 1
                m = pulls[i] + 1.0
                pulls[i] = m
                means[i] += (x - means[i]) / m
                if x == 1.0:
                    successes[i] += 1.0
                if hook is not None:
                    hook(state, i, 0)
            else:
                _exact_pull(state, env, i, mode, hook)
                if early_exit and state.terminated_count >= state.cutoff:
                    break
        state.finished = state.terminated_count >= state.cutoff


def default_max_pulls(arm_set: ArmSet, params: Params) -> int:
    """Ten times the termination bound when true means allow computing it."""
    if arm_set.true_means is not None:
        means = np.sort(arm_set.means_array())
        if len(means) > 1:
            min_gap = float(np.min(np.diff(means)))
            if min_gap > 0:
                return int(10.0 * total_pull_bound(min_gap, params, arm_set.n))
    return _DEFAULT_MAX_PULLS


def run(
    arm_set: ArmSet,
    params: Params,
    env: Environment,
    max_pulls: int | None = None,
    *,
    mode: str = "incremental",
    early_exit: bool = False,
    accelerate: bool = True,
    hook=None,
) -> tuple[GoldState, Ranking]:
    """Full run: initialization sweep, adaptive pulling, final ranking.

    Stops when enough arms terminated or when max_pulls is reached; the
    latter flags the state truncated.  accelerate=False forces the plain
    per-pull path everywhere (the two paths are trajectory-identical).
    """
    if max_pulls is None:
        max_pulls = default_max_pulls(arm_set, params)
    state = init(arm_set, params, env)
    state.finished = state.terminated_count >= state.cutoff
    while not state.finished and not state.truncated:
        if state.round >= max_pulls:
            state.truncated = True
            break
        if accelerate:
            plan = _plan_window(state, max_pulls)
            if plan is not None:
                _window_sweeps(
                    state, env, plan[0], plan[1],
                    mode=mode, early_exit=early_exit, max_pulls=max_pulls, hook=hook,
                )
                continue
        sweep(state, env, mode=mode, early_exit=early_exit, max_pulls=max_pulls, hook=hook)
    return state, rank(state)


def rank(state: GoldState) -> Ranking:
    """Terminated arms ascending by (score, id), then the rest ascending by id.

    Arms that never terminated carry no score and rank last; ties in score
    break by arm id so rankings are deterministic.
    """
    scored = sorted(
        (i for i, t in enumerate(state.terminated) if t),
        key=lambda i: (state.s_score[i], i),
    )
    unscored = [i for i, t in enumerate(state.terminated) if not t]
    return Ranking(order=tuple(scored + unscored), s_values=state.s_scores())
