"""Seeded experiments, summaries, and bit-identical replay via the harness.

Everything a trial reports is a pure function of (configuration, seed), so
records written to disk can be reproduced exactly.
"""

import outlier_arms as oa
from outlier_arms import ExperimentConfig, replay_trial, run_experiment

config = ExperimentConfig(
    params=oa.Params(epsilon=5.0, rho=0.8, delta=0.1),
    instance=oa.SyntheticSpec(n=10, epsilon=5.0, rho=0.8, outlier_type="upper", seed=4),
    algorithm="gold",
    trials=5,
    base_seed=100,
)

summary, results, arm_set = run_experiment(config)
print(f"{summary.trials} trials: correctness={summary.correctness:.2f} "
      f"f1={summary.f1:.2f} mean_pulls={summary.mean_pulls:.0f} "
      f"(+/- {summary.stddev_pulls:.0f})")

for r in results:
    print(f"  seed={r.seed}: T={r.total_pulls} first={r.ranking[0]} correct={r.correct}")

again = replay_trial(config, results[2].seed)
print("\nreplaying seed", results[2].seed, "reproduces the trial exactly:",
      again.ranking == results[2].ranking
      and again.s_scores == results[2].s_scores
      and again.total_pulls == results[2].total_pulls)
