import numpy as np
import pytest

from outlier_arms import ArmSet, Params


@pytest.fixture
def spike_instance():
    """Nine tightly packed arms plus one far-above arm (0.95)."""
    means = tuple(0.10 + 0.01 * i for i in range(9)) + (0.95,)
    return ArmSet(n=10, true_means=means)


@pytest.fixture
def spike_params():
    return Params(epsilon=5.0, rho=0.8, delta=0.1)


@pytest.fixture
def quick_instance():
    """Well-spread pack plus a far arm; every termination happens quickly."""
    means = tuple(0.10 + 0.05 * i for i in range(9)) + (0.97,)
    return ArmSet(n=10, true_means=means)


@pytest.fixture
def quick_params():
    return Params(epsilon=5.0, rho=0.8, delta=0.1)


def uniform_instance(n, seed, lo=0.0, hi=1.0):
    rng = np.random.default_rng(seed)
    while True:
        means = rng.uniform(lo, hi, n)
        if len(np.unique(means)) == n:
            return ArmSet(n=n, true_means=tuple(means.tolist()))
