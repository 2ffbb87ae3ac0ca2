"""End-to-end acceptance suite.

Each test covers one acceptance criterion and prints a single PASS/FAIL
line with its measured numbers (run pytest with -s or -rA to see them for
passing runs).  The synthetic cells are cached at module scope so the
baseline-contrast criterion reuses the adaptive runs of the correctness
criterion on identical instances and seeds.
"""

import math
from functools import lru_cache

import numpy as np
from scipy.stats import spearmanr

from outlier_arms import (
    ArmSet,
    Environment,
    ExperimentConfig,
    GenerationError,
    Params,
    SyntheticSpec,
    check_group,
    check_single,
    communities,
    generate,
    label_all,
    total_pull_bound,
)
from outlier_arms import gold
from outlier_arms.bounds import _bounded_radius_array, coefficient_b
from outlier_arms.env import planted_group
from outlier_arms.gold import UNSET
from outlier_arms.harness import GOLD, RR_KSIGMA, run_experiment

RHO = 0.9
DELTA = 0.1
TRIALS = 10
K_GRID = (2.0, 2.5, 3.0)
RR_CAP = 5_000_000


def report(ok: bool, name: str, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
    print(line)
    assert ok, line


@lru_cache(maxsize=None)
def cell(n: int, epsilon: float, outlier_type: str):
    """Ten seeded adaptive-puller trials on one certified synthetic instance."""
    spec = SyntheticSpec(
        n=n, epsilon=epsilon, rho=RHO, outlier_type=outlier_type,
        seed=1000 + 7 * n + int(epsilon * 10),
    )
    params = Params(epsilon=epsilon, rho=RHO, delta=DELTA)
    config = ExperimentConfig(
        params=params, instance=spec, algorithm=GOLD, trials=TRIALS, base_seed=0
    )
    summary, results, arm_set = run_experiment(config)
    return spec, params, arm_set, summary, results


@lru_cache(maxsize=None)
def rr_cell_best_k(n: int, epsilon: float, outlier_type: str):
    spec, params, arm_set, _, _ = cell(n, epsilon, outlier_type)
    best = None
    for k in K_GRID:
        config = ExperimentConfig(
            params=params, instance=spec, algorithm=RR_KSIGMA, trials=TRIALS,
            base_seed=0, k=k, max_pulls=RR_CAP,
        )
        summary, _, _ = run_experiment(config)
        if best is None or summary.correctness > best.correctness:
            best = summary
    return best


def test_criterion_1_synthetic_correctness():
    failures = []
    details = []
    for n in (20, 50, 100):
        for epsilon in (2.5, 5.0):
            for otype in ("upper", "intermediate"):
                _, _, _, summary, _ = cell(n, epsilon, otype)
                details.append(f"{otype[:5]}(n={n},eps={epsilon})={summary.correctness:.2f}")
                if summary.correctness < 0.9:
                    failures.append((n, epsilon, otype, summary.correctness))
    report(
        not failures,
        "criterion 1 synthetic correctness >= 0.9 per cell",
        "; ".join(details) + (f"; failures: {failures}" if failures else ""),
    )


def test_criterion_2_baseline_contrast_on_intermediate():
    failures = []
    details = []
    for n in (20, 50, 100):
        for epsilon in (2.5, 5.0):
            _, _, _, gold_summary, _ = cell(n, epsilon, "intermediate")
            rr_summary = rr_cell_best_k(n, epsilon, "intermediate")
            details.append(
                f"n={n},eps={epsilon}: gold={gold_summary.correctness:.2f} "
                f"rr_best={rr_summary.correctness:.2f}"
            )
            if not (rr_summary.correctness <= 0.5 and gold_summary.correctness >= 0.9):
                failures.append((n, epsilon))
    report(
        not failures,
        "criterion 2 k-sigma baseline fails intermediate cells the puller solves",
        "; ".join(details) + (f"; failures: {failures}" if failures else ""),
    )


def test_criterion_3_termination_bound():
    pack = tuple(0.30 + 0.02 * i for i in range(18))
    means = (0.05,) + pack + (0.95,)
    arm_set = ArmSet(n=20, true_means=means)
    diffs = np.diff(np.sort(np.array(means)))
    min_gap = float(diffs.min())
    assert min_gap >= 0.0199999
    params = Params(epsilon=5.0, rho=RHO, delta=DELTA)
    bound = total_pull_bound(min_gap, params, 20)
    within = 0
    pulls = []
    for seed in range(100):
        state, _ = gold.run(arm_set, params, Environment(arm_set, seed=seed))
        assert not state.truncated
        pulls.append(state.round)
        if state.round <= bound:
            within += 1
    report(
        within >= 95,
        "criterion 3 empirical pulls within the termination bound",
        f"{within}/100 runs within bound={bound:.3g}; "
        f"empirical mean={np.mean(pulls):.0f} max={np.max(pulls)}",
    )


def test_criterion_4_epsilon_effect_monotone():
    spec = SyntheticSpec(n=100, epsilon=10.0, rho=RHO, outlier_type="upper", seed=41)
    arm_set = generate(spec)
    grid = (1.5, 2.5, 5.0, 10.0)
    mean_pulls = []
    for epsilon in grid:
        params = Params(epsilon=epsilon, rho=RHO, delta=DELTA)
        totals = []
        for seed in range(TRIALS):
            state, _ = gold.run(arm_set, params, Environment(arm_set, seed=seed))
            totals.append(state.round)
        mean_pulls.append(float(np.mean(totals)))
    correlation = float(spearmanr(grid, mean_pulls).statistic)
    report(
        correlation <= -0.8,
        "criterion 4 pull cost decreases with epsilon",
        f"mean pulls {['%.0f' % m for m in mean_pulls]} over eps {list(grid)}; "
        f"spearman={correlation:.3f}",
    )


def _naive_certified_intervals(arm_set: ArmSet, params) -> set[frozenset]:
    """Independent from-scratch certification of every contiguous interval."""
    means = list(arm_set.true_means)
    n = arm_set.n
    order = sorted(range(n), key=lambda i: means[i])
    eps, rho = params.epsilon, params.rho
    out = set()
    for lo in range(n):
        for hi in range(lo, n):
            group = order[lo : hi + 1]
            if len(group) == n:
                continue
            upper = order[hi + 1 :]
            lower = order[:lo]

            def local(i, side):
                ys = sorted(means[s] for s in side)
                k = ys.index(means[i])
                up = ys[k + 1] - means[i] if k + 1 < len(ys) else 0.0
                down = means[i] - ys[k - 1] if k >= 1 else 0.0
                return max(up, down)

            dmin_u = min((abs(means[j] - means[u]) for j in group for u in upper), default=math.inf)
            dmin_l = min((abs(means[j] - means[l]) for j in group for l in lower), default=math.inf)
            ok = True
            for i in upper:
                loc = local(i, upper)
                ok = ok and dmin_u > (1 + eps) * loc and dmin_l > (1 + eps) * loc
            for i in lower:
                loc = local(i, lower)
                ok = ok and dmin_u > (1 + eps) * loc and dmin_l > (1 + eps) * loc
            if not len(upper) + len(lower) > rho * n + 1e-9:
                ok = False
            if len(upper) and not len(upper) > (1 - rho) * n + 1e-9:
                ok = False
            if len(lower) and not len(lower) > (1 - rho) * n + 1e-9:
                ok = False
            if ok:
                out.add(frozenset(group))
    return out


def test_criterion_5_oracle_brute_force_equivalence():
    rng = np.random.default_rng(2024)
    single_checked = 0
    disagreements = []
    for trial in range(200):
        n = int(rng.integers(6, 13))
        kind = trial % 4
        if kind == 0:
            means = rng.uniform(0, 1, n)
        elif kind == 1:
            means = np.concatenate([rng.uniform(0.0, 0.5, n - 1), [rng.uniform(0.8, 1.0)]])
        elif kind == 2:
            means = np.concatenate([rng.uniform(0, 0.3, n // 2), rng.uniform(0.7, 1.0, n - n // 2)])
        else:
            means = np.concatenate(
                [rng.uniform(0, 0.25, n // 2), [0.5], rng.uniform(0.75, 1.0, n - n // 2 - 1)]
            )
        if len(np.unique(means)) != n:
            continue
        arm_set = ArmSet(n=n, true_means=tuple(means.tolist()))
        params = Params(
            epsilon=float(rng.choice([0.5, 1.0, 2.5, 5.0])),
            rho=float(rng.choice([0.6, 0.75, 0.9])),
            delta=DELTA,
        )
        for j in range(n):
            restricted = check_single(j, arm_set, params, method="restricted")
            exhaustive = check_single(j, arm_set, params, method="exhaustive")
            single_checked += 1
            if restricted.certified != exhaustive.certified:
                disagreements.append(("single", trial, j))
        mine = {v.group for v in label_all(arm_set, params)}
        naive = _naive_certified_intervals(arm_set, params)
        if mine != naive:
            disagreements.append(("label", trial, sorted(map(sorted, mine ^ naive))))
    report(
        not disagreements,
        "criterion 5 oracle equals brute-force search",
        f"{single_checked} single-arm checks and 200 instance labelings; "
        f"disagreements={disagreements if disagreements else 0}",
    )


def test_criterion_6_invariant_suite():
    problems = []

    # complete graph right after the initialization pass
    arm_set = ArmSet(n=30, true_means=tuple(np.linspace(0.05, 0.9, 30)))
    params = Params(epsilon=2.5, rho=RHO, delta=DELTA)
    state = gold.init(arm_set, params, Environment(arm_set, seed=0))
    if state.graph.edge_count != 30 * 29 // 2:
        problems.append("graph not complete after initialization")

    # per-pull audits on seeded runs
    def audited_run(arm_set, params, seed):
        env = Environment(arm_set, seed=seed)
        log = []
        real_pull = env.pull
        env.pull = lambda i: (log.append(i), real_pull(i))[1]
        edge_counts = []
        community_counts = []
        scores = {}

        def hook(st, arm, removed):
            if st.round != sum(st.pulls):
                problems.append("round counter diverged from pull total")
            edge_counts.append(st.graph.edge_count)
            if removed:
                community_counts.append(len(communities(st.graph).sizes))
            for a, s in enumerate(st.s_score):
                if s != UNSET:
                    if scores.get(a, s) != s:
                        problems.append(f"score rewritten for arm {a}")
                    scores[a] = s

        state, ranking = gold.run(arm_set, params, env, hook=hook)
        if edge_counts != sorted(edge_counts, reverse=True):
            problems.append("edge count increased")
        if community_counts != sorted(community_counts):
            problems.append("community count decreased")
        t = 0
        for arm in log:
            t += 1
            if arm in scores and t > scores[arm]:
                problems.append(f"arm {arm} pulled after terminating")
                break
        return state

    means20 = tuple(0.10 + 0.04 * i for i in range(9)) + (0.95,)
    audited_run(ArmSet(n=10, true_means=means20), Params(epsilon=5.0, rho=0.8, delta=DELTA), 3)

    # incremental vs full-scan identity on seeded runs with n <= 50
    spec = SyntheticSpec(n=20, epsilon=5.0, rho=RHO, outlier_type="upper", seed=6)
    inst = generate(spec)
    p20 = Params(epsilon=5.0, rho=RHO, delta=DELTA)
    s_inc, r_inc = gold.run(inst, p20, Environment(inst, seed=8), mode="incremental")
    s_full, r_full = gold.run(inst, p20, Environment(inst, seed=8), mode="full")
    if not (
        r_inc == r_full
        and s_inc.round == s_full.round
        and np.array_equal(s_inc.graph.adj, s_full.graph.adj)
    ):
        problems.append("incremental and full-scan diverged at n=20")
    spec50 = SyntheticSpec(n=50, epsilon=2.5, rho=RHO, outlier_type="upper", seed=9)
    inst50 = generate(spec50)
    p50 = Params(epsilon=2.5, rho=RHO, delta=DELTA)
    s_inc, _ = gold.run(inst50, p50, Environment(inst50, seed=4), max_pulls=60_000)
    s_full, _ = gold.run(inst50, p50, Environment(inst50, seed=4), max_pulls=60_000, mode="full")
    if not (
        s_inc.round == s_full.round
        and s_inc.s_score == s_full.s_score
        and np.array_equal(s_inc.graph.adj, s_full.graph.adj)
    ):
        problems.append("incremental and full-scan diverged at n=50")

    # failure budget partial sum stays below delta
    t = np.arange(1, 10**6 + 1, dtype=np.float64)
    if not float(np.sum(6 * DELTA / (math.pi**2 * t * t))) < DELTA:
        problems.append("budget sum reached delta")

    # slack factor above one and decreasing
    bs = [coefficient_b(e) for e in (0.5, 1.5, 2.5, 5.0, 10.0, 50.0)]
    if not all(x > 1 for x in bs) or not all(a > b for a, b in zip(bs, bs[1:])):
        problems.append("slack factor not >1 and decreasing")

    # Hoeffding radius coverage at fixed per-round budget 0.05
    rng = np.random.default_rng(7)
    horizon = 40
    draws = rng.random((10_000, horizon))
    running = np.cumsum(draws, axis=1) / np.arange(1, horizon + 1)
    radii = np.array([
        float(_bounded_radius_array(1.0, m, 0.05)) for m in range(1, horizon + 1)
    ])
    events = np.abs(running - 0.5) > radii
    frac = float(events.mean())
    n_events = events.size
    slack = 0.05 + 3 * math.sqrt(0.05 * 0.95 / n_events)
    if not frac <= slack:
        problems.append(f"coverage {frac:.4f} above {slack:.4f}")

    report(
        not problems,
        "criterion 6 invariant suite",
        f"coverage={frac:.4f} (allowed {slack:.4f}); problems={problems if problems else 0}",
    )


def test_criterion_7_generator_soundness():
    bad = []
    for otype in ("upper", "intermediate"):
        for seed in range(100):
            spec = SyntheticSpec(n=30, epsilon=2.5, rho=RHO, outlier_type=otype, seed=seed)
            arm_set = generate(spec)
            params = Params(epsilon=2.5, rho=RHO, delta=DELTA)
            verdict = check_group(planted_group(spec), arm_set, params)
            if not verdict.certified:
                bad.append((otype, seed, verdict.failed_constraint))
            if len(set(arm_set.true_means)) != 30:
                bad.append((otype, seed, "duplicate means"))
            if otype == "upper" and len(verdict.upper_set) != 0:
                bad.append((otype, seed, "upper side not empty"))
            if otype == "intermediate" and (not verdict.upper_set or not verdict.lower_set):
                bad.append((otype, seed, "missing side"))
    loud = False
    try:
        generate(SyntheticSpec(n=100, epsilon=200.0, rho=RHO, outlier_type="upper",
                               seed=0, max_attempts=1500))
    except GenerationError:
        loud = True
    report(
        not bad and loud,
        "criterion 7 generator soundness",
        f"200 generated instances certified; infeasible spec raised={loud}"
        + (f"; bad={bad}" if bad else ""),
    )


def test_criterion_8_determinism():
    spec = SyntheticSpec(n=20, epsilon=2.5, rho=RHO, outlier_type="upper", seed=12)
    params = Params(epsilon=2.5, rho=RHO, delta=DELTA)
    config = ExperimentConfig(params=params, instance=spec, algorithm=GOLD,
                              trials=1, base_seed=123)
    from outlier_arms.harness import replay_trial

    first = replay_trial(config, 123)
    second = replay_trial(config, 123)
    arm_set = generate(spec)
    s_plain, r_plain = gold.run(arm_set, params, Environment(arm_set, seed=123),
                                accelerate=False)
    same_replay = (
        first.ranking == second.ranking
        and first.terminated == second.terminated
        and first.s_scores == second.s_scores
        and first.total_pulls == second.total_pulls
    )
    same_engines = (
        first.ranking == r_plain.order
        and first.s_scores == r_plain.s_values
        and first.total_pulls == s_plain.round
    )
    report(
        same_replay and same_engines,
        "criterion 8 bit-identical replay",
        f"replay matches={same_replay}; plain engine matches={same_engines}; "
        f"T={first.total_pulls}",
    )
