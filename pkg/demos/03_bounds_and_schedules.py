"""The confidence machinery behind the neighbor test.

Shows the shrinking per-round failure budget, the two per-arm radii, the
neighbor-test slack factor, and the closed-form pull-count calculators.
"""

import numpy as np

import outlier_arms as oa
from outlier_arms import (
    ArmStats,
    BoundContext,
    coefficient_b,
    delta_prime_value,
    neighbor_rhs,
    pull_count_bounds,
    total_pull_bound,
    ucb_radius_bernoulli,
    ucb_radius_bounded,
)

params = oa.Params(epsilon=5.0, rho=0.9, delta=0.1)

print("per-round failure budget delta'(T) = 6*delta/(pi^2 n T^2):")
for t in (1, 10, 100, 10_000):
    print(f"  T={t:>6}: {delta_prime_value(0.1, 20, t):.3e}")
t = np.arange(1, 10**6 + 1)
print("  total budget spent over a million rounds:",
      f"{float(np.sum(20 * delta_prime_value(0.1, 20, t))):.6f} < delta=0.1")

print("\nslack factor b(epsilon), >1 and falling toward 1:")
for eps in (0.5, 1.5, 2.5, 5.0, 10.0):
    print(f"  eps={eps:>4}: b={coefficient_b(eps):.5f}")

ctx = BoundContext(params=params, n=20, total_pulls=400)
stats = ArmStats(pulls=20, mean=0.45, success_count=9)
print(f"\nradii after 20 pulls at T=400 (n=20):")
print(f"  interval-bounded reward radius: {ucb_radius_bounded(stats, ctx):.4f}")
print(f"  coin-flip reward radius:        {ucb_radius_bernoulli(stats, ctx):.4f}")
other = ArmStats(pulls=20, mean=0.52, success_count=11)
print(f"  neighbor allowance for two such arms: {neighbor_rhs(stats, other, ctx):.4f}")

print("\npull-count sandwich for a mean gap of 0.2 (n=20):")
report = pull_count_bounds(0.2, params, 20)
print(f"  coefficients: upper={report.upper_coef:.1f} lower={report.lower_coef:.1f}")
print(f"  pulls until that edge breaks: between {report.lower:.0f} and {report.upper:.0f}")

print("\ntermination bound as the minimum mean gap varies:")
for gap in (0.2, 0.1, 0.05, 0.02):
    print(f"  min gap {gap:>5}: T < {total_pull_bound(gap, params, 20):.3g}")
