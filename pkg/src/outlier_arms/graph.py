"""Neighbor graph over arms and its connected-component communities.

The graph starts complete and only ever loses edges: the pruning pass
removes an edge once the two empirical means differ by more than the
neighbor test allows, and removed edges are never re-inserted even if the
test would later hold again (the allowance grows with the round counter).
Communities are the connected components of the current graph.

Adjacency is kept both as a boolean matrix (vectorized scans, component
sweeps) and as per-arm neighbor sets (cheap iteration once degrees shrink);
all edits go through remove_edges, which keeps the two views consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import BoundContext, coefficient_b, delta_prime, radius_array
from .core import ArmStats, ParameterError


class NeighborGraph:
    """Symmetric, irreflexive adjacency over n arms with deletion-only edits."""

    __slots__ = ("n", "adj", "nbr_sets", "edge_count")

    def __init__(self, n: int, adj: np.ndarray, nbr_sets: list[set[int]], edge_count: int):
        self.n = n
        self.adj = adj
        self.nbr_sets = nbr_sets
        self.edge_count = edge_count

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i, j])

    def neighbors(self, i: int) -> list[int]:
        return sorted(self.nbr_sets[i])

    def degree(self, i: int) -> int:
        return len(self.nbr_sets[i])

    def remove_edges(self, i: int, targets) -> None:
        """Drop the edges between arm i and each target (must be current neighbors)."""
        si = self.nbr_sets[i]
        adj = self.adj
        count = 0
        for t in targets:
            j = int(t)
            si.remove(j)
            self.nbr_sets[j].remove(i)
            adj[i, j] = False
            adj[j, i] = False
            count += 1
        self.edge_count -= count

    def edge_list(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(np.triu(self.adj, k=1))
        return list(zip(ii.tolist(), jj.tolist()))

    def copy(self) -> "NeighborGraph":
        return NeighborGraph(
            self.n, self.adj.copy(), [set(s) for s in self.nbr_sets], self.edge_count
        )


@dataclass(frozen=True)
class CommunityPartition:
    """Arm -> community id map; ids are each community's smallest member."""

    assignment: np.ndarray
    sizes: dict[int, int]

    def community_of(self, i: int) -> int:
        return int(self.assignment[i])

    def members(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == cid)


def complete_graph(n: int) -> NeighborGraph:
    if n < 2:
        raise ParameterError(f"a neighbor graph needs at least 2 arms, got n={n}")
    adj = np.ones((n, n), dtype=bool)
    np.fill_diagonal(adj, False)
    nbr_sets = [set(range(n)) - {i} for i in range(n)]
    return NeighborGraph(n, adj, nbr_sets, n * (n - 1) // 2)


def _stats_arrays(stats: Sequence[ArmStats]):
    means = np.array([s.mean for s in stats], dtype=np.float64)
    pulls = np.array([s.pulls for s in stats], dtype=np.int64)
    succ = np.array([s.success_count for s in stats], dtype=np.int64)
    return means, pulls, succ


def prune_incident(
    graph: NeighborGraph, pulled: int, means: np.ndarray, radii: np.ndarray, b: float
) -> int:
    """Remove violating edges incident to the pulled arm; returns removals.

    Between two pulls only the pulled arm's mean and radius move in the
    severing direction (everyone else's allowance grows with the round
    counter), so checking the incident edges reproduces a full scan.
    """
    row = graph.adj[pulled]
    lhs = np.abs(means - means[pulled])
    rhs = b * (radii + radii[pulled])
    violating = row & (lhs > rhs)
    if not violating.any():
        return 0
    targets = np.flatnonzero(violating)
    graph.remove_edges(pulled, targets)
    return len(targets)


def prune_all(graph: NeighborGraph, means: np.ndarray, radii: np.ndarray, b: float) -> int:
    """Remove every currently present edge violating the neighbor test."""
    lhs = np.abs(means[:, None] - means[None, :])
    rhs = b * (radii[:, None] + radii[None, :])
    violating = np.triu(graph.adj & (lhs > rhs), k=1)
    if not violating.any():
        return 0
    removed = 0
    for i, j in zip(*np.nonzero(violating)):
        graph.remove_edges(int(i), (int(j),))
        removed += 1
    return removed


def prune_edges(
    graph: NeighborGraph,
    stats: Sequence[ArmStats],
    ctx: BoundContext,
    pulled: int | None = None,
    mode: str = "incremental",
) -> NeighborGraph:
    """Apply the neighbor test to the graph, deleting failing edges in place.

    mode "incremental" checks only edges incident to `pulled`; mode "full"
    rescans every edge.  Both produce the same graph on a pull-by-pull
    schedule; "full" exists for testing and as the literal form of the
    update rule.
    """
    means, pulls, succ = _stats_arrays(stats)
    if (pulls < 1).any():
        raise ParameterError("every arm must be pulled before pruning edges")
    radii = radius_array(ctx.params.reward_model, pulls, succ, delta_prime(ctx))
    b = coefficient_b(ctx.params.epsilon)
    if mode == "incremental":
        if pulled is None:
            raise ParameterError("incremental pruning needs the pulled arm")
        prune_incident(graph, pulled, means, radii, b)
    elif mode == "full":
        prune_all(graph, means, radii, b)
    else:
        raise ParameterError(f"unknown prune mode {mode!r}")
    return graph


def communities(graph: NeighborGraph) -> CommunityPartition:
    """Connected components, labeled by their smallest member arm id."""
    n = graph.n
    assignment = np.full(n, -1, dtype=np.int64)
    sizes: dict[int, int] = {}
    adj = graph.adj
    for start in range(n):
        if assignment[start] >= 0:
            continue
        member = np.zeros(n, dtype=bool)
        member[start] = True
        frontier = member
        while True:
            reached = adj[frontier].any(axis=0) & ~member
            if not reached.any():
                break
            member |= reached
            frontier = reached
        assignment[member] = start
        sizes[start] = int(member.sum())
    return CommunityPartition(assignment=assignment, sizes=sizes)
