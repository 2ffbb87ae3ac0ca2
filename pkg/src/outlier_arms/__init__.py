"""Outlier-arm detection in stochastic multi-armed bandits.

The package bundles the pieces needed to find arms whose expected rewards
sit far from the bulk: exact-mean certification of outlier arms and groups,
an adaptive pulling strategy that isolates them through a shrinking neighbor
graph, the confidence-bound and pull-count calculators behind it, a
round-robin k-sigma baseline, simulated reward environments with a certified
synthetic instance generator, and a reproducible experiment harness.
"""

from .baseline import KSigmaState, run_rr
from .bounds import (
    BoundContext,
    PullBoundReport,
    coefficient_b,
    delta_prime,
    delta_prime_value,
    neighbor_rhs,
    pull_count_bounds,
    total_pull_bound,
    ucb_radius_bernoulli,
    ucb_radius_bounded,
)
from .core import (
    ArmSet,
    ArmStats,
    Bernoulli,
    Bounded,
    GenerationError,
    IngestionError,
    ParameterError,
    Params,
    StateError,
    update_stats,
)
from .env import Environment, SyntheticSpec, generate, load_means, planted_group
from .gold import GoldState, Ranking, rank, run
from .graph import CommunityPartition, NeighborGraph, communities, complete_graph, prune_edges
from .harness import (
    ExperimentConfig,
    MetricsSummary,
    TrialResult,
    replay_trial,
    run_experiment,
    sweep_grid,
)
from .oracle import (
    NeighborDistances,
    OutlierVerdict,
    check_group,
    check_single,
    label_all,
    neighbor_distances,
    validate_ranking,
)

__version__ = "0.1.0"
