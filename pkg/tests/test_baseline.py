import numpy as np
import pytest

from outlier_arms import ArmSet, Environment, ParameterError, SyntheticSpec, generate, run_rr
from outlier_arms.env import planted_group


def test_flags_high_outlier_in_most_runs():
    means = tuple(0.08 + 0.01 * i for i in range(9)) + (0.95,)
    arm_set = ArmSet(n=10, true_means=means)
    hits = 0
    for seed in range(10):
        state = run_rr(arm_set, 2.0, 0.1, Environment(arm_set, seed=seed), max_pulls=2_000_000)
        if state.flagged == frozenset({9}):
            hits += 1
    assert hits >= 9


def test_equal_means_flag_nothing():
    arm_set = ArmSet(n=6, true_means=(0.4,) * 6)
    state = run_rr(arm_set, 2.0, 0.1, Environment(arm_set, seed=0), max_pulls=60_000)
    assert state.flagged == frozenset()


def test_intermediate_outlier_is_missed():
    spec = SyntheticSpec(n=20, epsilon=2.5, rho=0.9, outlier_type="intermediate", seed=2)
    arm_set = generate(spec)
    group = planted_group(spec)
    for k in (2.0, 2.5, 3.0):
        state = run_rr(arm_set, k, 0.1, Environment(arm_set, seed=1), max_pulls=2_000_000)
        assert not (group & state.flagged)


def test_round_robin_pull_accounting():
    arm_set = ArmSet(n=7, true_means=tuple(np.linspace(0.1, 0.9, 7)))
    state = run_rr(arm_set, 2.0, 0.1, Environment(arm_set, seed=5), max_pulls=500_000)
    assert state.total_pulls % 7 == 0
    assert all(p == state.total_pulls // 7 for p in state.pulls)


def test_flagged_arms_sit_above_threshold():
    means = tuple(0.1 + 0.02 * i for i in range(8)) + (0.9, 0.95)
    arm_set = ArmSet(n=10, true_means=means)
    state = run_rr(arm_set, 2.0, 0.1, Environment(arm_set, seed=3), max_pulls=200_000)
    for arm in state.flagged:
        assert state.means[arm] > state.threshold


def test_truncation_is_reported():
    arm_set = ArmSet(n=4, true_means=(0.4, 0.41, 0.42, 0.43))
    state = run_rr(arm_set, 2.0, 0.1, Environment(arm_set, seed=0), max_pulls=400)
    assert state.truncated and not state.terminated
    assert state.total_pulls == 400


def test_parameter_validation():
    arm_set = ArmSet(n=4, true_means=(0.1, 0.2, 0.3, 0.4))
    with pytest.raises(ParameterError):
        run_rr(arm_set, 0.0, 0.1, Environment(arm_set, seed=0))
    lone = ArmSet(n=1, true_means=(0.5,))
    with pytest.raises(ParameterError):
        run_rr(lone, 2.0, 0.1, Environment(lone, seed=0))
