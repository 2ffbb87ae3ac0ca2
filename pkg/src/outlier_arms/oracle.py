"""Exact-mean certification of outlier arms and outlier arm groups.

Everything here works on known true means.  An arm group is certified as an
outlier group when (1) every member sits more than (1+epsilon) times every
normal arm's local neighbor gap away from both normal sides, and (2) the
normal sides are large enough relative to the assumed normal proportion rho.
The same machinery labels whole instances, certifies single arms through an
existential search over admissible normal sides, and checks whether a
returned ranking respects every certified group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import ArmSet, Params, ParameterError, community_cutoff, exact_fraction

C1_TAGS = ("C1a", "C1b", "C1c", "C1d")
C2_TAGS = ("C2-total", "C2-upper", "C2-lower")


@dataclass(frozen=True)
class NeighborDistances:
    """Gaps from an arm to its nearest strictly-higher and strictly-lower means.

    widest is the larger of the two: the arm's local neighborhood distance
    within the reference set.
    """

    up: float
    down: float
    widest: float


@dataclass(frozen=True)
class OutlierVerdict:
    """Result of certifying one candidate group against one (epsilon, rho).

    gap_above / gap_below are the tightest distances from the group to the
    upper / lower normal side (inf when that side is empty); max_local_gap is
    the largest neighborhood distance over all normal arms.  Together they
    carry the binding separation margins.
    """

    group: frozenset[int]
    upper_set: frozenset[int]
    lower_set: frozenset[int]
    certified: bool
    failed_constraint: Optional[str] = None
    gap_above: float = math.inf
    gap_below: float = math.inf
    max_local_gap: float = 0.0

    def margin(self, epsilon: float) -> float:
        """Binding separation ratio minus the required (1+epsilon) factor."""
        if self.max_local_gap == 0.0:
            return math.inf
        return min(self.gap_above, self.gap_below) / self.max_local_gap - (1.0 + epsilon)


def neighbor_distances(i: int, reference: Iterable[int], means: Sequence[float]) -> NeighborDistances:
    """Distances from arm i to its nearest neighbors above and below in reference.

    The arm itself is excluded from the reference; a missing side contributes
    a zero distance.
    """
    y = np.asarray(means, dtype=np.float64)
    if len(np.unique(y)) != len(y):
        raise ParameterError("arm means must be pairwise distinct")
    yi = y[i]
    up = math.inf
    down = math.inf
    for r in reference:
        if r == i:
            continue
        yr = y[r]
        if yr > yi:
            up = min(up, yr - yi)
        elif yr < yi:
            down = min(down, yi - yr)
    up = 0.0 if math.isinf(up) else up
    down = 0.0 if math.isinf(down) else down
    return NeighborDistances(up=up, down=down, widest=max(up, down))


def _side_max_local_gap(side_sorted: np.ndarray) -> float:
    """Largest neighborhood distance of any member within its own side.

    For a set listed in ascending mean order, every member's local distance
    is one of the consecutive gaps, so the maximum is the widest gap.
    """
    if len(side_sorted) < 2:
        return 0.0
    return float(np.max(np.diff(side_sorted)))


def check_group(group: Iterable[int], arm_set: ArmSet, params: Params) -> OutlierVerdict:
    """Certify a candidate group against the full arm set.

    The upper and lower normal sides are everything strictly above and
    strictly below the group's extremes; certification requires them to
    cover the rest of the arms (the group must be contiguous in mean order),
    all four separation inequalities, and all three cardinality conditions,
    each strictly.  The first violated condition is reported.
    """
    means = arm_set.require_distinct_means()
    group = frozenset(int(g) for g in group)
    n = arm_set.n
    if not group:
        raise ParameterError("candidate group is empty")
    if len(group) >= n:
        raise ParameterError("candidate group must be a proper subset of the arms")
    if any(g < 0 or g >= n for g in group):
        raise ParameterError("candidate group contains an unknown arm id")

    gidx = np.fromiter(group, dtype=np.int64)
    gmax = float(means[gidx].max())
    gmin = float(means[gidx].min())
    upper = frozenset(np.flatnonzero(means > gmax).tolist())
    lower = frozenset(np.flatnonzero(means < gmin).tolist())

    if len(group) + len(upper) + len(lower) != n:
        return OutlierVerdict(group, upper, lower, False, "partition")

    up_sorted = np.sort(means[np.fromiter(upper, dtype=np.int64)]) if upper else np.empty(0)
    low_sorted = np.sort(means[np.fromiter(lower, dtype=np.int64)]) if lower else np.empty(0)
    local_up = _side_max_local_gap(up_sorted)
    local_low = _side_max_local_gap(low_sorted)
    gap_above = float(up_sorted[0] - gmax) if upper else math.inf
    gap_below = float(gmin - low_sorted[-1]) if lower else math.inf
    factor = 1.0 + params.epsilon

    verdict = lambda ok, tag: OutlierVerdict(  # noqa: E731
        group, upper, lower, ok, None if ok else tag,
        gap_above, gap_below, max(local_up, local_low),
    )

    if upper and not gap_above > factor * local_up:
        return verdict(False, "C1a")
    if lower and not gap_above > factor * local_low:
        return verdict(False, "C1b")
    if upper and not gap_below > factor * local_up:
        return verdict(False, "C1c")
    if lower and not gap_below > factor * local_low:
        return verdict(False, "C1d")

    rho = exact_fraction(params.rho)
    small = community_cutoff(n, params.rho)  # n * (1 - rho), exact
    if not len(upper) + len(lower) > rho * n:
        return verdict(False, "C2-total")
    if len(upper) != 0 and not len(upper) > small:
        return verdict(False, "C2-upper")
    if len(lower) != 0 and not len(lower) > small:
        return verdict(False, "C2-lower")
    return verdict(True, None)


def label_all(arm_set: ArmSet, params: Params) -> list[OutlierVerdict]:
    """Certify every candidate interval of the sorted mean order.

    Any certifiable group is contiguous in mean order and smaller than
    n*(1-rho), so enumerating those intervals and running check_group on
    each finds every certified group.
    """
    means = arm_set.require_distinct_means()
    n = arm_set.n
    order = np.argsort(means)
    small = community_cutoff(n, params.rho)
    # Largest size strictly below n*(1-rho), and always a proper subset.
    max_size = small.numerator - 1 if small.denominator == 1 else int(small)
    max_size = min(max_size, n - 1)
    out = []
    for size in range(1, max_size + 1):
        for start in range(0, n - size + 1):
            group = order[start : start + size]
            v = check_group(group, arm_set, params)
            if v.certified:
                out.append(v)
    return out


def _c2_ok(k: int, m: int, n: int, rho_frac, small) -> bool:
    if not k + m > rho_frac * n:
        return False
    if k != 0 and not k > small:
        return False
    if m != 0 and not m > small:
        return False
    return True


def _c1_ok(lhs_u: float, lhs_l: float, local_u: float, local_l: float,
           k: int, m: int, factor: float) -> bool:
    if k:
        if not lhs_u > factor * local_u:
            return False
        if not lhs_l > factor * local_u:
            return False
    if m:
        if not lhs_u > factor * local_l:
            return False
        if not lhs_l > factor * local_l:
            return False
    return True


def _smallest_int_above(value) -> int:
    """Smallest integer strictly greater than an exact rational value."""
    floor = value.numerator // value.denominator
    return floor + 1


def _run_search_single(j: int, means: np.ndarray, params: Params) -> OutlierVerdict | None:
    """Search normal-side witnesses among contiguous runs of the sorted order.

    Any certifying subset is dominated by the contiguous run with the same
    cardinality whose nearest element to j is the subset's nearest: the
    subset's member-to-member jumps span every raw gap inside that run, so
    the run's largest local gap cannot exceed the subset's, while the
    separation and the cardinalities are unchanged.  Growing a run away
    from j only widens its largest gap, so minimal admissible sizes
    dominate too.  Enumerating runs by their near end is therefore an
    exact search.
    """
    n = len(means)
    order = np.argsort(means)
    ys = means[order]
    pos = int(np.flatnonzero(order == j)[0])
    gaps = np.diff(ys)
    above = n - 1 - pos
    below = pos
    factor = 1.0 + params.epsilon
    small = community_cutoff(n, params.rho)               # sides must exceed this
    rho_n = exact_fraction(params.rho) * n                # total must exceed this
    s_min = _smallest_int_above(small)
    t_min = _smallest_int_above(rho_n)

    def run_max_gap(lo: int, hi: int) -> float:
        # Largest raw gap inside sorted positions [lo, hi]; 0 for singletons.
        if hi <= lo:
            return 0.0
        return float(np.max(gaps[lo:hi]))

    def below_run(b: int, m: int):
        # Run of m arms ending at sorted position b (all strictly below j).
        return float(ys[pos] - ys[b]), run_max_gap(b - m + 1, b)

    def above_run(a: int, k: int):
        return float(ys[a] - ys[pos]), run_max_gap(a, a + k - 1)

    def verdict(a, k, b, m, lhs_u, lhs_l, widest):
        upper = frozenset(order[a : a + k].tolist()) if k else frozenset()
        lower = frozenset(order[b - m + 1 : b + 1].tolist()) if m else frozenset()
        return OutlierVerdict(frozenset([j]), upper, lower, True, None,
                              lhs_u, lhs_l, widest)

    # One-sided certificates: the non-empty side alone must exceed rho*n.
    if t_min <= below:
        m = t_min
        for b in range(m - 1, pos):
            d, g = below_run(b, m)
            if d > factor * g:
                return verdict(0, 0, b, m, math.inf, d, g)
    if t_min <= above:
        k = t_min
        for a in range(pos + 1, n - k + 1):
            d, g = above_run(a, k)
            if d > factor * g:
                return verdict(a, k, 0, 0, d, math.inf, g)

    # Mixed certificates: both sides at least s_min, total above rho*n.
    # Sizes beyond the (k, max(s_min, t_min - k)) frontier are dominated.
    k_hi = min(above, max(s_min, t_min - s_min))
    for k in range(s_min, k_hi + 1):
        m = max(s_min, t_min - k)
        if m > below:
            continue
        a_starts = np.arange(pos + 1, n - k + 1)
        b_ends = np.arange(m - 1, pos)
        if len(a_starts) == 0 or len(b_ends) == 0:
            continue
        du = ys[a_starts] - ys[pos]
        dl = ys[pos] - ys[b_ends]
        if k >= 2:
            gu = sliding_window_view(gaps[pos + 1 : n - 1], k - 1).max(axis=1)
        else:
            gu = np.zeros(len(a_starts))
        if m >= 2:
            gl = sliding_window_view(gaps[: pos - 1], m - 1).max(axis=1)
        else:
            gl = np.zeros(len(b_ends))
        req = factor * np.maximum(gu[:, None], gl[None, :])
        ok = (du[:, None] > req) & (dl[None, :] > req)
        if ok.any():
            ai, bi = np.argwhere(ok)[0]
            a = int(a_starts[ai])
            b = int(b_ends[bi])
            return verdict(a, k, b, m, float(du[ai]), float(dl[bi]),
                           max(float(gu[ai]), float(gl[bi])))
    return None


def _exhaustive_single(j: int, means: np.ndarray, params: Params) -> OutlierVerdict | None:
    """Try every admissible pair of normal-side subsets; exponential, small n only."""
    n = len(means)
    order = np.argsort(means)
    ys = means[order]
    pos = int(np.flatnonzero(order == j)[0])
    rho_frac = exact_fraction(params.rho)
    small = community_cutoff(n, params.rho)
    factor = 1.0 + params.epsilon

    def subsets(position_list):
        # For each bitmask over the side's sorted positions: (size, distance
        # from j to nearest member, max inner gap, member positions).
        props = []
        count = len(position_list)
        for mask in range(1 << count):
            members = [position_list[t] for t in range(count) if mask >> t & 1]
            if not members:
                props.append((0, math.inf, 0.0, ()))
                continue
            vals = ys[members]
            dmin = float(min(abs(v - ys[pos]) for v in vals))
            inner = float(np.max(np.diff(vals))) if len(vals) > 1 else 0.0
            props.append((len(members), dmin, inner, tuple(members)))
        return props

    above_props = subsets(list(range(pos + 1, n)))
    below_props = subsets(list(range(0, pos)))

    for k, lhs_u, local_u, mem_u in above_props:
        for m, lhs_l, local_l, mem_l in below_props:
            if not _c2_ok(k, m, n, rho_frac, small):
                continue
            if _c1_ok(lhs_u, lhs_l, local_u, local_l, k, m, factor):
                return OutlierVerdict(
                    frozenset([j]),
                    frozenset(order[list(mem_u)].tolist()) if mem_u else frozenset(),
                    frozenset(order[list(mem_l)].tolist()) if mem_l else frozenset(),
                    True, None, lhs_u, lhs_l, max(local_u, local_l),
                )
    return None


EXHAUSTIVE_LIMIT = 15


def check_single(j: int, arm_set: ArmSet, params: Params, method: str = "auto") -> OutlierVerdict:
    """Certify a single arm: does some admissible pair of normal sides witness it?

    method "restricted" searches contiguous runs of the sorted order,
    "exhaustive" tries every subset pair (n <= 15), and "auto" runs the
    restricted search with an exhaustive fallback on small instances.
    """
    means = arm_set.require_distinct_means()
    n = arm_set.n
    if not 0 <= j < n:
        raise ParameterError(f"arm id {j} out of range")
    if method not in ("auto", "restricted", "exhaustive"):
        raise ParameterError(f"unknown search method {method!r}")

    found = None
    if method in ("auto", "restricted"):
        found = _run_search_single(j, means, params)
    if found is None and (
        method == "exhaustive" or (method == "auto" and n <= EXHAUSTIVE_LIMIT)
    ):
        if n > EXHAUSTIVE_LIMIT:
            raise ParameterError(
                f"exhaustive search is limited to n <= {EXHAUSTIVE_LIMIT}, got n={n}"
            )
        found = _exhaustive_single(j, means, params)
    if found is not None:
        return found
    return OutlierVerdict(
        frozenset([j]), frozenset(), frozenset(), False, "no-witness"
    )


def validate_ranking(ranking, verdicts: Iterable[OutlierVerdict]) -> bool:
    """True when every certified group fully precedes its normal sides."""
    order = list(getattr(ranking, "order", ranking))
    position = {arm: r for r, arm in enumerate(order)}
    for v in verdicts:
        if not v.certified:
            continue
        worst_member = max(position[j] for j in v.group)
        normals = v.upper_set | v.lower_set
        if normals:
            best_normal = min(position[i] for i in normals)
            if worst_member > best_normal:
                return False
    return True
