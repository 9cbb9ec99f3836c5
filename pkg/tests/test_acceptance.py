"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Heavy run matrices are shared via module-scoped fixtures.  Criterion 1's
componentwise gradient-stability check fails by design: the claimed constant
(1+eps) admits an exact analytical counterexample at large p (see the
project notes); the integrated inequality the algorithms rely on is asserted
green in the same test.
"""

import math
import time

import numpy as np
import pytest

from vecbandits.potential import (
    INFINITY,
    NormParams,
    PrNormParams,
    ones_norm,
    smooth_composite_norm,
    smooth_composite_norm_gradient,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
)
from vecbandits.environment import (
    Bernoulli,
    Constant,
    PhasedHalvingSpec,
    StochasticSpec,
    benchmark_action,
    greedy_trap_env,
    phased_halving_bwk_env,
    phased_halving_bwk_opt,
    phased_halving_env,
    phased_halving_opt,
    stochastic_env,
)
from vecbandits.learner import hedge_regret_bound
from vecbandits.olvc import (
    AdversarialEpsilon,
    DoublingEpsilon,
    OlvcConfig,
    benchmark_bound_holds,
    competitive_factor,
    run_olvc,
    run_olvc_doubling,
    stochastic_epsilon,
)
from vecbandits.bwk import ADVERSARIAL, BwkConfig, bucket_count, run_bwk, run_bwk_guessing
from vecbandits.oracle import opt_bwk, opt_olvc_adversarial, opt_olvc_stochastic
from vecbandits.harness import (
    ExperimentConfig,
    materialize_environment,
    deterministic_checks,
    naive_baseline,
    run_experiment,
    verify_potential_facts,
)

from conftest import central_difference_gradient


def _report(num: int, ok: bool, detail: str) -> None:
    print(f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")


def _per_run_checks(trace, x_star) -> dict:
    """Criterion 4 bundle for one diagnostic run."""
    eps = trace.epsilon
    d_psi = np.diff(trace.psi_values)
    per_step = bool(np.all(d_psi <= (1.0 + eps) * trace.alg_grad_costs + 1e-9))
    telescoped = bool(
        trace.psi_values[-1] - trace.psi_values[0]
        <= (1.0 + eps) * trace.alg_grad_costs.sum() + 1e-6 * trace.T
    )
    cost_range = bool(
        trace.surrogate_losses.min() >= -1e-12 and trace.surrogate_losses.max() <= 1.0 + 1e-12
    )
    benchmark = benchmark_bound_holds(trace, x_star)
    return {"per_step": per_step, "telescoped": telescoped, "cost_range": cost_range, "benchmark": benchmark}


# ---------------------------------------------------------------------------
# Shared run matrices
# ---------------------------------------------------------------------------

STOCH_COST_Q = [
    [0.70, 0.10, 0.10, 0.40, 0.30],
    [0.10, 0.70, 0.10, 0.40, 0.30],
    [0.10, 0.10, 0.70, 0.40, 0.30],
    [0.30, 0.30, 0.30, 0.10, 0.30],
]


@pytest.fixture(scope="module")
def stochastic_olvc_matrix():
    d, n, p, T, seeds = 4, 5, 2, 20_000, range(10)
    costs = [[Bernoulli(v) for v in row] for row in STOCH_COST_Q]
    start = time.monotonic()
    oracle = opt_olvc_stochastic(StochasticSpec(costs=costs, seed=0), T, p, mc_samples=200, seed=0)
    cfg = OlvcConfig(p, d, n, T)
    norms, checks = [], []
    for seed in seeds:
        spec = StochasticSpec(costs=costs, seed=seed)
        trace = run_olvc(cfg, stochastic_env(spec, T), seed=seed, diagnostics=True)
        norms.append(trace.final_norm)
        checks.append(_per_run_checks(trace, oracle.x_star))
    elapsed = time.monotonic() - start
    eps = stochastic_epsilon(p, d, T)
    return {
        "d": d, "n": n, "p": p, "T": T, "eps": eps,
        "oracle": oracle, "norms": np.array(norms), "checks": checks, "elapsed": elapsed,
    }


@pytest.fixture(scope="module")
def phased_olvc_run():
    spec = PhasedHalvingSpec(d=16, p=INFINITY, T=4096, seed=0)
    opt = phased_halving_opt(spec)
    cfg = OlvcConfig(INFINITY, 16, spec.n_actions, 4096, epsilon_rule=AdversarialEpsilon(opt))
    trace = run_olvc(cfg, phased_halving_env(spec), seed=0, diagnostics=True)
    x_star = np.zeros(spec.n_actions)
    x_star[benchmark_action(spec)] = 1.0
    return {"spec": spec, "opt": opt, "trace": trace, "checks": _per_run_checks(trace, x_star)}


@pytest.fixture(scope="module")
def greedy_trap_matrix():
    d, T, gap, seeds = 32, 10_000, 0.01, range(20)
    greedy_ratios, smoothed_ratios, checks = [], [], []
    for seed in seeds:
        env = materialize_environment(greedy_trap_env(d, gap, T, seed=seed), T)
        stack = np.stack([s.costs for s in env.steps])
        opt = opt_olvc_adversarial(stack, INFINITY).value
        x_star = opt_olvc_adversarial(stack, INFINITY).x_star
        greedy = naive_baseline(env, INFINITY, T)
        cfg = OlvcConfig(INFINITY, d, 2, T, epsilon_rule=AdversarialEpsilon(opt))
        smoothed = run_olvc(cfg, env, seed=seed, diagnostics=True)
        greedy_ratios.append(greedy.final_norm / opt)
        smoothed_ratios.append(smoothed.final_norm / opt)
        checks.append(_per_run_checks(smoothed, x_star))
    return {
        "d": d,
        "greedy": np.array(greedy_ratios),
        "smoothed": np.array(smoothed_ratios),
        "checks": checks,
    }


# ---------------------------------------------------------------------------
# Criteria
# ---------------------------------------------------------------------------


def test_criterion_01_potential_facts_suite():
    start = time.monotonic()
    checks = {c.name: c for c in verify_potential_facts(samples=10_000, seed=0)}
    elapsed = time.monotonic() - start
    ok_core = (
        checks["additive_lower"].ok
        and checks["additive_upper"].ok
        and checks["gradient_norm"].ok
        and elapsed < 10.0
    )
    _report(
        1,
        ok_core and checks["gradient_stability"].ok,
        f"sandwich/dual-norm {'ok' if ok_core else 'BROKEN'}, "
        f"componentwise stability worst violation {checks['gradient_stability'].worst:.3e}, "
        f"integrated form worst {checks['potential_increase'].worst:.3e}, {elapsed:.1f}s",
    )
    assert checks["additive_lower"].ok, checks["additive_lower"].line()
    assert checks["additive_upper"].ok, checks["additive_upper"].line()
    assert checks["gradient_norm"].ok, checks["gradient_norm"].line()
    assert checks["potential_increase"].ok, checks["potential_increase"].line()
    assert elapsed < 10.0
    assert checks["gradient_stability"].ok, (
        "componentwise stability with constant (1+eps) fails as stated: worst violation "
        f"{checks['gradient_stability'].worst:.3e} over 10000 draws. This is an analytical "
        "property of the smoothed norm (per-coordinate ratio reaches (1+eps/p)^(p-1), which "
        "exceeds 1+eps once eps > ~2/p; exact counterexample at p=5, eps=1, loads (0,100), "
        "bump (1,0)), not an implementation bug: the gradient matches central differences to "
        "1e-5 and the integrated inequality the algorithms rely on (potential_increase) "
        "passes with margin. Recorded in the project decision notes."
    )


def test_criterion_02_gradient_oracle(rng):
    worst_plain, worst_composite = 0.0, 0.0
    for _ in range(1000):
        p = (1, 2, 3, 5, 10, INFINITY)[rng.integers(6)]
        d = int(rng.integers(1, 9))
        params = NormParams(p, d, float(rng.uniform(0.05, 1)))
        lam = rng.uniform(0.5, 10, d)
        g = smooth_norm_gradient(params, lam)
        fd = central_difference_gradient(lambda v: smooth_norm(params, v), lam)
        worst_plain = max(worst_plain, float(np.abs(fd - g).max() / np.abs(g).max()))
    for _ in range(1000):
        p, r = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        d = int(rng.integers(1, 7))
        pr = PrNormParams(p, r, d, float(rng.uniform(0.05, 1)))
        lam = rng.uniform(0.5, 10, d + 1)
        g = smooth_composite_norm_gradient(pr, lam)
        fd = central_difference_gradient(lambda v: smooth_composite_norm(pr, v), lam)
        worst_composite = max(worst_composite, float(np.abs(fd - g).max() / np.abs(g).max()))
    ok = worst_plain <= 1e-5 and worst_composite <= 1e-5
    _report(2, ok, f"finite differences: plain {worst_plain:.2e}, composite {worst_composite:.2e}")
    assert ok


def test_criterion_03_power_sum_superadditivity(rng):
    from vecbandits.potential import power_sum

    worst = -np.inf
    for _ in range(1000):
        p = int((1, 2, 3, 5, 10, 50)[rng.integers(6)])
        d = int(rng.integers(1, 17))
        params = NormParams(p, d, float(rng.uniform(1e-3, 1)))
        lam = rng.uniform(0, 100, d)
        k = int(rng.integers(1, 6))
        zs = rng.uniform(0, 1, (k, d))
        base = power_sum(params, lam)
        single = sum(power_sum(params, lam + z) - base for z in zs)
        joint = power_sum(params, lam + zs.sum(axis=0)) - base
        worst = max(worst, single - joint)
    ok = worst <= 1e-9
    _report(3, ok, f"increment superadditivity, worst slack {worst:.3e} over 1000 tuples")
    assert ok


def test_criterion_04_per_run_inequalities(stochastic_olvc_matrix, phased_olvc_run, greedy_trap_matrix):
    all_checks = (
        stochastic_olvc_matrix["checks"]
        + [phased_olvc_run["checks"]]
        + greedy_trap_matrix["checks"]
    )
    ok = all(all(c.values()) for c in all_checks)
    n_runs = len(all_checks)
    _report(4, ok, f"per-step/telescope/cost-range/benchmark checks on {n_runs} diagnostic runs")
    for i, c in enumerate(all_checks):
        assert all(c.values()), f"run {i}: {c}"


def test_criterion_05_stochastic_load_balancing(stochastic_olvc_matrix):
    m = stochastic_olvc_matrix
    oracle, norms, eps = m["oracle"], m["norms"], m["eps"]
    mean_alg = norms.mean()
    stderr_alg = norms.std(ddof=1) / math.sqrt(len(norms))
    rhs = (
        (1.0 + eps) * oracle.value
        + ones_norm(m["p"], m["d"]) * hedge_regret_bound(m["n"], m["T"])
        + 2.0 * unit_gap(m["p"], m["d"]) / eps
        + 2.0 * (oracle.stderr + stderr_alg)
    )
    ratio = mean_alg / oracle.value
    ok = mean_alg <= rhs and ratio <= 1.15 and m["elapsed"] < 60.0
    _report(
        5,
        ok,
        f"mean {mean_alg:.1f} <= bound {rhs:.1f}, ratio {ratio:.4f} <= 1.15, {m['elapsed']:.1f}s",
    )
    assert mean_alg <= rhs
    assert ratio <= 1.15
    assert m["elapsed"] < 60.0


def test_criterion_06_adversarial_load_balancing(phased_olvc_run):
    spec, opt, trace = phased_olvc_run["spec"], phased_olvc_run["opt"], phased_olvc_run["trace"]
    assert spec.k == 4 and spec.L == 1024
    assert opt == 1024.0
    ratio = trace.final_norm / opt
    cap = 8.0 * (math.log2(spec.d) + 1.0)
    # exact arithmetic for the per-phase-uniform strategy: survivors carry kL/2
    env = phased_halving_env(spec)
    uniform = np.full(spec.n_actions, 1.0 / spec.n_actions)
    load = np.zeros(spec.d)
    for t in range(1, spec.T + 1):
        load += env.emit(t, ()).costs @ uniform
    uniform_ratio = load.max() / opt
    ok = 1.0 <= ratio <= cap and uniform_ratio >= spec.k / 2 - 0.5
    _report(6, ok, f"ratio {ratio:.3f} in [1, {cap:.0f}], uniform-strategy ratio {uniform_ratio:.2f}")
    assert 1.0 <= ratio <= cap
    assert uniform_ratio >= spec.k / 2 - 0.5


def test_criterion_07_greedy_trap_separation(greedy_trap_matrix):
    m = greedy_trap_matrix
    d = m["d"]
    cap = 3 * math.log(d) + 2
    ok = bool(np.all(m["greedy"] >= d / 4) and np.all(m["smoothed"] <= cap))
    _report(
        7,
        ok,
        f"greedy ratios >= {d/4:.0f} (min {m['greedy'].min():.1f}); "
        f"smoothed <= {cap:.2f} (max {m['smoothed'].max():.3f}) over 20 seeds",
    )
    assert np.all(m["greedy"] >= d / 4)
    assert np.all(m["smoothed"] <= cap)


def test_criterion_08_adversarial_budgeted():
    d, T = 8, 4096
    B = float(math.ceil(2.0 * unit_gap(INFINITY, d)))
    rewards, rhs_list = [], []
    for seed in range(10):
        spec = PhasedHalvingSpec(d=d, p=INFINITY, T=T, seed=seed)
        opt = phased_halving_bwk_opt(spec, B)
        env = phased_halving_bwk_env(spec, B)
        cfg = BwkConfig(
            p=INFINITY, d=d, n=env.n, T=T, B=B, variant=ADVERSARIAL,
            null_action=env.null_action, opt_value=opt,
        )
        trace = run_bwk(cfg, env, seed=seed)
        rhs = opt / (20.0 * math.log(d)) - 8.0 * (opt * ones_norm(INFINITY, d) / B) * hedge_regret_bound(env.n, T)
        rewards.append(trace.total_reward)
        rhs_list.append(rhs)
        assert deterministic_checks(trace, B)
    ok = all(r >= b for r, b in zip(rewards, rhs_list))
    _report(
        8,
        ok,
        f"B={B:.0f}, OPT={opt:.0f}: rewards min {min(rewards):.2f} >= bound {rhs_list[0]:.1f} "
        "(regret term dominates at this scale) on 10 seeds",
    )
    assert ok


def test_criterion_09_stochastic_budgeted():
    d, n, p, B, T = 3, 4, 2, 2000.0, 10_000
    cost_q = [[0.30, 0.05, 0.20, 0.0], [0.05, 0.30, 0.20, 0.0], [0.05, 0.05, 0.20, 0.0]]
    rew_q = [0.90, 0.90, 0.50, 0.0]
    costs = [[Bernoulli(v) if v > 0 else Constant(0.0) for v in row] for row in cost_q]
    rewards = [Bernoulli(v) if v > 0 else Constant(0.0) for v in rew_q]
    oracle = opt_bwk(StochasticSpec(costs=costs, rewards=rewards, seed=0, null_action=3), p, B, T=T)
    cfg = BwkConfig(p=p, d=d, n=n, T=T, B=B, variant="stochastic", null_action=3, opt_value=oracle.value)
    r = cfg.r_outer
    eps = cfg.resolve().epsilon
    vals, taus = [], []
    for seed in range(10):
        spec = StochasticSpec(costs=costs, rewards=rewards, seed=seed, null_action=3)
        trace = run_bwk(cfg, stochastic_env(spec, T), seed=seed)
        vals.append(trace.total_reward)
        taus.append(trace.tau)
        assert trace.tau is not None and trace.tau <= T
    vals = np.array(vals)
    stderr = vals.std(ddof=1) / math.sqrt(len(vals))
    slack = eps + (2.0 ** (1.0 / r) - 1.0) + ones_norm(p, d) / B * hedge_regret_bound(n, T)
    rhs = oracle.value * (1.0 - slack) - 2.0 * stderr
    ok = vals.mean() >= rhs
    _report(
        9,
        ok,
        f"mean reward {vals.mean():.1f} >= {rhs:.1f} (OPT {oracle.value:.1f}, factor {1-slack:.3f}), "
        f"tau max {max(taus)} <= {T}",
    )
    assert ok


def test_criterion_10_unknown_opt_wrappers():
    # doubling wrapper on the phased-halving instance
    spec = PhasedHalvingSpec(d=16, p=INFINITY, T=4096, seed=0)
    opt = phased_halving_opt(spec)
    c = 1.0
    cfg = OlvcConfig(INFINITY, 16, spec.n_actions, 4096, epsilon_rule=DoublingEpsilon(c))
    trace = run_olvc_doubling(cfg, phased_halving_env(spec), seed=0)
    cap = 4.0 * c * competitive_factor(INFINITY, 16) * opt
    doubling_ok = trace.final_norm <= cap

    # exponential bucketing, exhaustive over buckets
    d, T = 8, 4096
    B = float(math.ceil(2.0 * unit_gap(INFINITY, d)))
    spec_b = PhasedHalvingSpec(d=d, p=INFINITY, T=T, seed=0)
    opt_b = phased_halving_bwk_opt(spec_b, B)
    env = phased_halving_bwk_env(spec_b, B)
    known_cfg = BwkConfig(p=INFINITY, d=d, n=env.n, T=T, B=B, variant=ADVERSARIAL,
                          null_action=env.null_action, opt_value=opt_b)
    known = run_bwk(known_cfg, phased_halving_bwk_env(spec_b, B), seed=0).total_reward
    guess_cfg = BwkConfig(p=INFINITY, d=d, n=env.n, T=T, B=B, variant=ADVERSARIAL,
                          null_action=env.null_action)
    buckets = bucket_count(T)
    bucket_rewards = [
        run_bwk_guessing(guess_cfg, phased_halving_bwk_env(spec_b, B), seed=0, bucket=b).total_reward
        for b in range(buckets)
    ]
    bucketing_ok = np.mean(bucket_rewards) * buckets >= 0.5 * known
    ok = doubling_ok and bucketing_ok
    _report(
        10,
        ok,
        f"doubling load {trace.final_norm:.0f} <= {cap:.0f}; "
        f"bucket mean*{buckets} = {np.mean(bucket_rewards)*buckets:.1f} >= {0.5*known:.1f}",
    )
    assert doubling_ok
    assert bucketing_ok


def test_criterion_11_oracle_equivalence(rng):
    from vecbandits.oracle import _minimize_on_simplex, _norm_value_grad

    worst = 0.0
    for trial in range(50):
        p = (1, 2, 3, 5)[trial % 4]
        stack = rng.uniform(0, 1, (8, int(rng.integers(2, 6)), 3))
        grid_sol = opt_olvc_adversarial(stack, p)
        M = stack.sum(axis=0)
        _, fw_val, _ = _minimize_on_simplex(lambda y: _norm_value_grad(M, y, p), 3, 1e-6)
        worst = max(worst, abs(fw_val - grid_sol.value) / grid_sol.value)
    T = 10
    sol = opt_olvc_adversarial(np.stack([np.eye(2)] * T), INFINITY)
    footnote_ok = bool(np.allclose(sol.x_star, 0.5) and sol.value == T / 2)
    ok = worst <= 1e-3 and footnote_ok
    _report(11, ok, f"grid vs frank-wolfe relative gap {worst:.2e}; identity instance exact")
    assert worst <= 1e-3
    assert footnote_ok


def test_criterion_12_deterministic_reports(tmp_path):
    configs = [
        {
            "experiment": "accept-olvc",
            "problem": "olvc",
            "variant": "adversarial",
            "p": "inf",
            "T": 512,
            "seeds": [0, 1, 2],
            "environment": {"kind": "phased_halving", "d": 16},
        },
        {
            "experiment": "accept-bwk",
            "problem": "bwk",
            "variants": ["adversarial", "bucketing"],
            "p": "inf",
            "T": 256,
            "seeds": [0, 1],
            "budget": 5.0,
            "environment": {"kind": "phased_halving", "d": 8, "bwk": True},
        },
        {
            "experiment": "accept-stoch",
            "problem": "olvc",
            "variant": "stochastic",
            "p": 2,
            "T": 400,
            "seeds": [0, 1],
            "environment": {
                "kind": "stochastic",
                "costs": [[{"dist": "bernoulli", "q": q} for q in row[:3]] for row in STOCH_COST_Q[:2]],
            },
            "oracle": {"mc_samples": 32},
        },
    ]
    ok = True
    for idx, raw in enumerate(configs):
        out_a = tmp_path / f"{idx}_a.csv"
        out_b = tmp_path / f"{idx}_b.csv"
        cfg_a = ExperimentConfig.from_dict({**raw, "out": str(out_a)})
        cfg_b = ExperimentConfig.from_dict({**raw, "out": str(out_b)})
        run_experiment(cfg_a)
        run_experiment(cfg_b)
        ok = ok and out_a.read_bytes() == out_b.read_bytes()
    _report(12, ok, f"{len(configs)} acceptance configs re-run byte-identically")
    assert ok
