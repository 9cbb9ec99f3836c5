"""Experiment runner: seeded run matrices, oracle comparisons, CSV reports.

A JSON config names the problem, the algorithm variant(s), an environment
spec, and a list of seeds.  ``run_experiment`` executes every (variant, seed)
pair, invokes the oracle once per realized environment, evaluates bound
checks, and can serialize a byte-reproducible CSV.

Per-run ``bound_ok`` covers the deterministic guarantees (load accounting,
surrogate cost range, the telescoped potential inequality, budget safety) and
the adversarial competitive bounds, which hold run by run.  The stochastic
theorems are statements about expectations, so those inequalities are
evaluated on seed means and reported in ``Report.aggregates``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bwk import ADVERSARIAL, STOCHASTIC, BwkConfig, run_bwk, run_bwk_guessing
from .environment import (
    Bernoulli,
    Constant,
    Environment,
    PhasedHalvingSpec,
    StochasticSpec,
    TraceEnvironment,
    Uniform,
    benchmark_action,
    greedy_trap_env,
    phased_halving_bwk_env,
    phased_halving_bwk_opt,
    phased_halving_env,
    phased_halving_opt,
    stochastic_env,
    trace_env,
)
from .errors import InvalidConfigError
from .learner import BANDIT, FULL, exp3p_regret_bound, hedge_regret_bound
from .olvc import (
    AdversarialEpsilon,
    DoublingEpsilon,
    ExplicitEpsilon,
    OlvcConfig,
    competitive_factor,
    run_olvc,
    run_olvc_doubling,
)
from .oracle import CLOSED_FORM, OracleSolution, opt_bwk, opt_olvc_adversarial, opt_olvc_stochastic
from .potential import (
    INFINITY,
    NormParams,
    PrNormParams,
    composite_norm,
    dual_exponent,
    lp_norm,
    ones_norm,
    smooth_composite_norm,
    smooth_composite_norm_gradient,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
)
from .trace import RunTrace

UNDEFINED = "UNDEFINED"

CSV_HEADER = "experiment,seed,variant,T,n,d,p,alg_value,opt_value,ratio,regret_empirical,tau,bound_ok"


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------


def _parse_p(raw) -> float:
    if isinstance(raw, str):
        if raw.lower() in ("inf", "infinity"):
            return INFINITY
        raise InvalidConfigError(f"bad norm exponent {raw!r}")
    return float(raw)


@dataclass
class ExperimentConfig:
    experiment: str
    problem: str  # "olvc" | "bwk"
    variants: list[str]
    p: float
    T: int
    seeds: list[int]
    environment: dict
    feedback: str = FULL
    epsilon: float | None = None
    opt_guess: float | None = None
    growth_constant: float = 1.0
    budget: float | None = None
    opt_value: float | None = None
    oracle: dict = field(default_factory=dict)
    diagnostics: bool = False
    out: str | None = None

    def __post_init__(self):
        if self.problem not in ("olvc", "bwk"):
            raise InvalidConfigError(f"unknown problem {self.problem!r}")
        if not self.seeds:
            raise InvalidConfigError("need at least one seed")
        if not self.variants:
            raise InvalidConfigError("need at least one variant")
        valid = {"olvc": {"stochastic", "adversarial", "doubling"}, "bwk": {"stochastic", "adversarial", "bucketing"}}
        for v in self.variants:
            if v not in valid[self.problem]:
                raise InvalidConfigError(f"variant {v!r} not valid for {self.problem}")
        if self.problem == "bwk" and self.budget is None:
            raise InvalidConfigError("bwk experiments need a budget")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        raw = dict(raw)
        variants = raw.pop("variants", None)
        if variants is None:
            variants = [raw.pop("variant")]
        elif isinstance(variants, str):
            variants = [variants]
        return cls(
            experiment=raw.pop("experiment", "experiment"),
            problem=raw.pop("problem"),
            variants=list(variants),
            p=_parse_p(raw.pop("p")),
            T=int(raw.pop("T")),
            seeds=[int(s) for s in raw.pop("seeds")],
            environment=raw.pop("environment"),
            feedback=raw.pop("feedback", FULL),
            epsilon=raw.pop("epsilon", None),
            opt_guess=raw.pop("opt_guess", None),
            growth_constant=float(raw.pop("growth_constant", 1.0)),
            budget=raw.pop("budget", None),
            opt_value=raw.pop("opt_value", None),
            oracle=raw.pop("oracle", {}),
            diagnostics=bool(raw.pop("diagnostics", False)),
            out=raw.pop("out", None),
        )

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        except FileNotFoundError:
            raise
        try:
            return cls.from_dict(raw)
        except KeyError as exc:
            raise InvalidConfigError(f"{path}: missing config key {exc}") from None


def _parse_descriptor(raw: dict):
    kind = raw.get("dist")
    if kind == "bernoulli":
        return Bernoulli(float(raw["q"]))
    if kind == "uniform":
        return Uniform(float(raw["a"]), float(raw["b"]))
    if kind == "constant":
        return Constant(float(raw["v"]))
    raise InvalidConfigError(f"unknown distribution descriptor {raw!r}")


def build_environment(env_spec: dict, T: int, p: float, seed: int) -> Environment:
    """Instantiate the environment named by a config dict, seeded per run."""
    kind = env_spec.get("kind")
    if kind == "stochastic":
        costs = [[_parse_descriptor(c) for c in row] for row in env_spec["costs"]]
        rewards = env_spec.get("rewards")
        if rewards is not None:
            rewards = [_parse_descriptor(c) for c in rewards]
        spec = StochasticSpec(costs=costs, rewards=rewards, seed=seed, null_action=env_spec.get("null_action"))
        return stochastic_env(spec, T)
    if kind == "phased_halving":
        spec = PhasedHalvingSpec(d=int(env_spec["d"]), p=p, T=T, seed=seed)
        if env_spec.get("bwk"):
            return phased_halving_bwk_env(spec, float(env_spec.get("budget", 1.0)))
        return phased_halving_env(spec)
    if kind == "greedy_trap":
        return greedy_trap_env(int(env_spec["d"]), float(env_spec["load_gap"]), T, seed)
    if kind == "trace":
        return trace_env(env_spec["path"])
    raise InvalidConfigError(f"unknown environment kind {kind!r}")


def materialize_environment(env: Environment, T: int) -> TraceEnvironment:
    """Record an environment's emissions so the oracle and the run see the
    identical realization.  Valid for play-independent generators."""
    env.reset()
    steps = [env.emit(t, ()) for t in range(1, T + 1)]
    out = TraceEnvironment(steps, env.d, env.n)
    out.null_action = env.null_action
    return out


# ---------------------------------------------------------------------------
# Per-run checks
# ---------------------------------------------------------------------------


def deterministic_checks(trace: RunTrace, budget: float | None = None) -> bool:
    """Guarantees that hold on every run: load accounting, loss range,
    per-step and telescoped potential inequalities, budget safety."""
    resummed = trace.recompute_final_load()
    if np.abs(resummed - trace.final_load).max() > 1e-9 * max(1.0, trace.T / 1000.0):
        return False
    if trace.surrogate_losses.min() < -1e-12 or trace.surrogate_losses.max() > 1 + 1e-12:
        return False
    if trace.problem == "olvc" and trace.variant != "baseline":
        eps = trace.epsilon
        d_psi = np.diff(trace.psi_values)
        rhs = (1.0 + eps) * trace.alg_grad_costs if not math.isnan(eps) else None
        if rhs is not None:
            if np.any(d_psi > rhs + 1e-9):
                return False
            if trace.psi_values[-1] - trace.psi_values[0] > rhs.sum() + 1e-6 * trace.T:
                return False
    if trace.problem == "bwk":
        if budget is None:
            budget = trace.extras.get("budget")
        scale = ones_norm(trace.p, trace.d)
        if trace.final_norm > budget + scale + 1e-9:
            return False
        lag = trace.extras.get("lagrangian")
        bound = trace.extras.get("reward_bound")
        if lag is not None and np.abs(lag).max() > bound + 1e-9:
            return False
        if trace.variant == "stochastic" and (trace.tau is None or trace.tau > trace.T):
            return False
    return True


def _learner_bound(feedback: str, n: int, T: int) -> float:
    if feedback == BANDIT:
        return exp3p_regret_bound(n, T)
    return hedge_regret_bound(n, T)


def olvc_adversarial_rhs(p: float, d: int, n: int, T: int, opt: float, feedback: str, K: float = 8.0) -> float:
    return K * competitive_factor(p, d) * opt + K * ones_norm(p, d) * _learner_bound(feedback, n, T)


def olvc_stochastic_rhs(p: float, d: int, n: int, T: int, eps: float, opt: float, stderr: float = 0.0) -> float:
    return (1.0 + eps) * (opt + 2.0 * stderr) + ones_norm(p, d) * hedge_regret_bound(n, T) + 2.0 * unit_gap(p, d) / eps


def bwk_adversarial_rhs(p: float, d: int, n: int, T: int, B: float, opt: float, K: float = 8.0) -> float:
    factor = min(p, math.log(d)) if d > 1 else p
    return opt / (20.0 * factor) - K * (opt * ones_norm(p, d) / B) * hedge_regret_bound(n, T)


def bwk_stochastic_rhs(p: float, d: int, n: int, T: int, B: float, r: int, opt: float) -> float:
    eps = math.sqrt((p + r) * ones_norm(p, d) / B)
    slack = eps + (2.0 ** (1.0 / r) - 1.0) + ones_norm(p, d) / B * hedge_regret_bound(n, T)
    return opt * (1.0 - slack)


# ---------------------------------------------------------------------------
# Experiment execution
# ---------------------------------------------------------------------------


@dataclass
class RunRow:
    experiment: str
    seed: int
    variant: str
    T: int
    n: int
    d: int
    p: float
    alg_value: float
    opt_value: float
    ratio: float | None
    regret_empirical: float
    tau: int | None
    bound_ok: bool

    def to_csv(self) -> str:
        p_str = "inf" if self.p == INFINITY else f"{self.p:.17g}"
        ratio_str = UNDEFINED if self.ratio is None else f"{self.ratio:.17g}"
        tau_str = "" if self.tau is None else str(self.tau)
        return ",".join(
            [
                self.experiment,
                str(self.seed),
                self.variant,
                str(self.T),
                str(self.n),
                str(self.d),
                p_str,
                f"{self.alg_value:.17g}",
                f"{self.opt_value:.17g}",
                ratio_str,
                f"{self.regret_empirical:.17g}",
                tau_str,
                "true" if self.bound_ok else "false",
            ]
        )


@dataclass
class Report:
    rows: list[RunRow]
    aggregates: dict
    traces: list[RunTrace] = field(default_factory=list, repr=False)

    @property
    def all_bounds_ok(self) -> bool:
        per_run = all(r.bound_ok for r in self.rows)
        agg = all(v.get("bound_ok", True) for v in self.aggregates.values())
        return per_run and agg

    def to_csv(self) -> str:
        return "\n".join([CSV_HEADER] + [r.to_csv() for r in self.rows]) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


def _ratio(problem: str, alg: float, opt: float) -> float | None:
    if problem == "olvc":
        return alg / opt if opt > 0 else None
    return opt / alg if alg > 0 else None


# one oracle invocation per distinct environment; realized (seeded) instances
# key on the seed, distribution-level specs do not
_ORACLE_MEMO: dict = {}


def _memo_key(config: ExperimentConfig, seed: int | None) -> str:
    return json.dumps(
        {
            "problem": config.problem,
            "env": config.environment,
            "T": config.T,
            "p": repr(config.p),
            "B": config.budget,
            "oracle": config.oracle,
            "seed": seed,
        },
        sort_keys=True,
    )


def _olvc_oracle(config: ExperimentConfig, env, seed: int) -> OracleSolution:
    kind = config.environment.get("kind")
    res = int(config.oracle.get("grid_resolution", 200))
    if kind == "stochastic":
        key = _memo_key(config, None)
        if key not in _ORACLE_MEMO:
            costs = [[_parse_descriptor(c) for c in row] for row in config.environment["costs"]]
            spec = StochasticSpec(costs=costs, seed=int(config.oracle.get("seed", 0)))
            _ORACLE_MEMO[key] = opt_olvc_stochastic(
                spec, config.T, config.p, mc_samples=int(config.oracle.get("mc_samples", 200)),
                seed=int(config.oracle.get("seed", 0)), grid_resolution=res,
            )
        return _ORACLE_MEMO[key]
    if kind == "phased_halving":
        spec = PhasedHalvingSpec(d=int(config.environment["d"]), p=config.p, T=config.T, seed=seed)
        x = np.zeros(spec.n_actions)
        x[benchmark_action(spec)] = 1.0
        return OracleSolution(x, phased_halving_opt(spec), CLOSED_FORM, 0.0)
    key = _memo_key(config, seed)
    if key not in _ORACLE_MEMO:
        stack = np.stack([s.costs for s in env.steps])
        _ORACLE_MEMO[key] = opt_olvc_adversarial(stack, config.p, grid_resolution=res)
    return _ORACLE_MEMO[key]


def _bwk_opt(config: ExperimentConfig, env, seed: int) -> float:
    if config.opt_value is not None:
        return float(config.opt_value)
    kind = config.environment.get("kind")
    if kind == "phased_halving":
        spec = PhasedHalvingSpec(d=int(config.environment["d"]), p=config.p, T=config.T, seed=seed)
        return phased_halving_bwk_opt(spec, config.budget)
    if kind == "stochastic":
        key = _memo_key(config, None)
        if key not in _ORACLE_MEMO:
            costs = [[_parse_descriptor(c) for c in row] for row in config.environment["costs"]]
            rewards = [_parse_descriptor(c) for c in config.environment["rewards"]]
            spec = StochasticSpec(costs=costs, rewards=rewards, seed=0)
            _ORACLE_MEMO[key] = opt_bwk(spec, config.p, config.budget, T=config.T)
        return _ORACLE_MEMO[key].value
    stack = np.stack([s.costs for s in env.steps])
    rews = np.stack([s.rewards for s in env.steps])
    return opt_bwk((stack, rews), config.p, config.budget).value


def _execute_run(config: ExperimentConfig, variant: str, seed: int):
    env = build_environment(config.environment, config.T, config.p, seed)
    if config.environment.get("kind") != "stochastic":
        env = materialize_environment(env, config.T)

    if config.problem == "olvc":
        oracle_sol = _olvc_oracle(config, env, seed)
        opt = oracle_sol.value
        if variant == "stochastic":
            rule = ExplicitEpsilon(config.epsilon) if config.epsilon is not None else None
            cfg = OlvcConfig(config.p, env.d, env.n, config.T, config.feedback, rule)
            trace = run_olvc(cfg, env, seed, diagnostics=config.diagnostics)
            eps = trace.epsilon
            bound = deterministic_checks(trace)
        elif variant == "adversarial":
            if config.epsilon is not None:
                rule = ExplicitEpsilon(config.epsilon)
            else:
                rule = AdversarialEpsilon(config.opt_guess if config.opt_guess is not None else opt)
            cfg = OlvcConfig(config.p, env.d, env.n, config.T, config.feedback, rule)
            trace = run_olvc(cfg, env, seed, diagnostics=config.diagnostics)
            rhs = olvc_adversarial_rhs(config.p, env.d, env.n, config.T, opt, config.feedback)
            bound = deterministic_checks(trace) and trace.final_norm <= rhs
        else:  # doubling
            rule = DoublingEpsilon(config.growth_constant)
            cfg = OlvcConfig(config.p, env.d, env.n, config.T, config.feedback, rule)
            trace = run_olvc_doubling(cfg, env, seed, diagnostics=config.diagnostics)
            cap = 4.0 * config.growth_constant * competitive_factor(config.p, env.d) * opt
            bound = deterministic_checks(trace) and trace.final_norm <= cap
        alg_value = trace.final_norm
        tau = None
        extras = {"oracle": oracle_sol}
    else:
        opt = _bwk_opt(config, env, seed)
        null = env.null_action
        if null is None:
            raise InvalidConfigError("bwk experiments need an environment with a null action")
        bcfg = BwkConfig(
            p=config.p, d=env.d, n=env.n, T=config.T, B=config.budget,
            variant=ADVERSARIAL if variant in ("adversarial", "bucketing") else STOCHASTIC,
            null_action=null,
            opt_value=None if variant == "bucketing" else opt,
        )
        if variant == "bucketing":
            trace = run_bwk_guessing(bcfg, env, seed, diagnostics=config.diagnostics)
        else:
            trace = run_bwk(bcfg, env, seed, diagnostics=config.diagnostics)
        alg_value = trace.total_reward
        tau = trace.tau
        bound = deterministic_checks(trace, config.budget)
        if variant == "adversarial":
            rhs = bwk_adversarial_rhs(config.p, env.d, env.n, config.T, config.budget, opt)
            bound = bound and alg_value >= rhs
        extras = {}

    row = RunRow(
        experiment=config.experiment,
        seed=seed,
        variant=variant,
        T=config.T,
        n=env.n,
        d=env.d,
        p=config.p,
        alg_value=float(alg_value),
        opt_value=float(opt),
        ratio=_ratio(config.problem, float(alg_value), float(opt)),
        regret_empirical=trace.regret_empirical,
        tau=tau,
        bound_ok=bool(bound),
    )
    return row, trace, extras


def run_experiment(config: ExperimentConfig, jobs: int = 1, keep_traces: bool = False) -> Report:
    """Execute the (variant x seed) matrix and aggregate.

    Results are merged in config order regardless of completion order, so the
    CSV is identical under any ``jobs`` setting.
    """
    tasks = [(variant, seed) for variant in config.variants for seed in config.seeds]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda vs: _execute_run(config, *vs), tasks))
    else:
        results = [_execute_run(config, variant, seed) for variant, seed in tasks]

    rows = [r for r, _, _ in results]
    traces = [t for _, t, _ in results]
    aggregates: dict = {}
    for variant in config.variants:
        vrows = [r for r in rows if r.variant == variant]
        vals = np.array([r.alg_value for r in vrows])
        opts = np.array([r.opt_value for r in vrows])
        mean_alg = float(vals.mean())
        stderr_alg = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else 0.0
        agg = {
            "mean_alg": mean_alg,
            "stderr_alg": stderr_alg,
            "mean_opt": float(opts.mean()),
            "bound_ok": all(r.bound_ok for r in vrows),
        }
        ratios = [r.ratio for r in vrows if r.ratio is not None]
        if ratios:
            agg["mean_ratio"] = float(np.mean(ratios))
        first = next(t for r, t, _ in results if r.variant == variant)
        if config.problem == "olvc" and variant == "stochastic":
            sol = next(e["oracle"] for r, _, e in results if r.variant == variant)
            rhs = olvc_stochastic_rhs(
                config.p, vrows[0].d, vrows[0].n, config.T, first.epsilon, sol.value, sol.stderr
            ) + 2.0 * stderr_alg
            agg["theorem_rhs"] = rhs
            agg["bound_ok"] = agg["bound_ok"] and mean_alg <= rhs
        if config.problem == "bwk" and variant == "stochastic":
            r_outer = BwkConfig(
                p=config.p, d=vrows[0].d, n=vrows[0].n, T=config.T, B=config.budget,
                variant=STOCHASTIC, null_action=0, opt_value=float(opts.mean()),
            ).r_outer
            rhs = bwk_stochastic_rhs(
                config.p, vrows[0].d, vrows[0].n, config.T, config.budget, r_outer, float(opts.mean())
            ) - 2.0 * stderr_alg
            agg["theorem_rhs"] = rhs
            agg["bound_ok"] = agg["bound_ok"] and mean_alg >= rhs
        aggregates[variant] = agg

    report = Report(rows=rows, aggregates=aggregates, traces=traces if keep_traces else [])
    if config.out:
        report.write_csv(config.out)
    return report


# ---------------------------------------------------------------------------
# Naive baseline: greedy on the exact norm increment
# ---------------------------------------------------------------------------


def naive_baseline(env: Environment, p: float, T: int) -> RunTrace:
    """Unsmoothed greedy: each step play the single action whose column
    increases the exact l_p norm the least (ties to the lowest index).

    For p = 1 the increments coincide with the smoothed surrogate costs; for
    larger p this is the myopic strategy the smoothing exists to beat.
    """
    env.reset()
    d, n = env.d, env.n
    scale = ones_norm(p, d)
    load = np.zeros(d)
    plays = np.zeros((T, n))
    realized = np.zeros((T, d))
    losses = np.zeros((T, n))
    psi = np.zeros(T + 1)
    alg_dot = np.zeros(T)
    history: list[np.ndarray] = []
    for t in range(1, T + 1):
        C = env.emit(t, history).costs
        base = lp_norm(load, p)
        candidates = load[:, None] + C  # (d, n)
        if p == INFINITY:
            norms = candidates.max(axis=0)
        elif p == 1:
            norms = candidates.sum(axis=0)
        else:
            m = candidates.max(axis=0)
            safe = np.where(m > 0, m, 1.0)
            norms = m * ((candidates / safe) ** p).sum(axis=0) ** (1.0 / p)
        increments = norms - base
        i = int(np.argmin(increments))
        x = np.zeros(n)
        x[i] = 1.0
        history.append(x)
        load = load + C[:, i]
        k = t - 1
        plays[k] = x
        realized[k] = C[:, i]
        losses[k] = np.clip(increments / scale, 0.0, 1.0)
        psi[t] = lp_norm(load, p)
        alg_dot[k] = increments[i]
    from .trace import empirical_regret

    return RunTrace(
        problem="olvc",
        variant="baseline",
        p=p,
        d=d,
        n=n,
        T=T,
        epsilon=float("nan"),
        feedback=FULL,
        seed=None,
        plays=plays,
        realized_costs=realized,
        surrogate_losses=losses,
        psi_values=psi,
        alg_grad_costs=alg_dot,
        final_load=load,
        final_norm=lp_norm(load, p),
        loss_scale=scale,
        regret_empirical=empirical_regret(losses, plays),
    )


# ---------------------------------------------------------------------------
# Potential fact sweeps (shared by the CLI and the acceptance suite)
# ---------------------------------------------------------------------------


@dataclass
class FactCheck:
    name: str
    ok: bool
    worst: float  # largest violation seen (negative means comfortable margin)
    samples: int

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return f"{status} {self.name}: worst violation {self.worst:.3e} over {self.samples} samples"


_P_CHOICES = (1, 2, 3, 5, 10, 50, INFINITY)


def verify_potential_facts(samples: int = 10000, seed: int = 0) -> list[FactCheck]:
    """Random sweep of the smoothed-norm facts at the tolerances the library
    promises.

    ``gradient_stability`` is the componentwise claim with constant (1+eps);
    it is known to fail for large p with eps near 1 (the per-coordinate
    factor reaches e^(eps(1-1/p)) when the power sum barely moves), which the
    sweep reports honestly.  ``potential_increase`` is the integrated form
    the algorithms actually rely on: smooth_norm(L+z) - smooth_norm(L)
    <= (1+eps) <z, grad(L)>; it holds for every eps <= 1.
    """
    rng = np.random.default_rng(seed)
    worst = {
        "additive_lower": -np.inf,
        "additive_upper": -np.inf,
        "gradient_norm": -np.inf,
        "gradient_stability": -np.inf,
        "potential_increase": -np.inf,
    }
    for _ in range(samples):
        p = _P_CHOICES[rng.integers(len(_P_CHOICES))]
        d = int(rng.integers(1, 17))
        eps = float(rng.uniform(1e-3, 1.0))
        lam = rng.uniform(0.0, 100.0, d)
        z = rng.uniform(0.0, 1.0, d)
        params = NormParams(p, d, eps)
        val = smooth_norm(params, lam)
        base = lp_norm(lam, p)
        worst["additive_lower"] = max(worst["additive_lower"], base - val)
        worst["additive_upper"] = max(worst["additive_upper"], val - base - params.additive_overhead)
        g = smooth_norm_gradient(params, lam)
        worst["gradient_norm"] = max(worst["gradient_norm"], lp_norm(g, dual_exponent(p)) - 1.0)
        g2 = smooth_norm_gradient(params, lam + z)
        worst["gradient_stability"] = max(worst["gradient_stability"], float((g2 - (1.0 + eps) * g).max()))
        worst["potential_increase"] = max(
            worst["potential_increase"],
            smooth_norm(params, lam + z) - val - (1.0 + eps) * float(z @ g),
        )
    slacks = {
        "additive_lower": 1e-9,
        "additive_upper": 1e-9,
        "gradient_norm": 1e-12,
        "gradient_stability": 1e-12,
        "potential_increase": 1e-9,
    }
    return [FactCheck(k, worst[k] <= slacks[k], worst[k], samples) for k in worst]


def verify_composite_facts(samples: int = 2000, seed: int = 0, stability_k: float = 4.0) -> list[FactCheck]:
    """Same sweep for the composite (p, r) potential on d+1 coordinates."""
    rng = np.random.default_rng(seed)
    worst = {"composite_additive_lower": -np.inf, "composite_additive_upper": -np.inf,
             "composite_gradient_norm": -np.inf, "composite_gradient_stability": -np.inf}
    finite_p = (1, 2, 3, 5, 10)
    for _ in range(samples):
        p = finite_p[rng.integers(len(finite_p))]
        r = int(finite_p[rng.integers(len(finite_p))])
        d = int(rng.integers(1, 9))
        eps = float(rng.uniform(1e-3, 1.0))
        pr = PrNormParams(p, r, d, eps)
        lam = rng.uniform(0.0, 100.0, d + 1)
        z = rng.uniform(0.0, 1.0, d + 1)
        val = smooth_composite_norm(pr, lam)
        base = composite_norm(lam, p, r)
        worst["composite_additive_lower"] = max(worst["composite_additive_lower"], base - val)
        worst["composite_additive_upper"] = max(
            worst["composite_additive_upper"], val - base - pr.additive_overhead
        )
        g = smooth_composite_norm_gradient(pr, lam)
        worst["composite_gradient_norm"] = max(
            worst["composite_gradient_norm"], composite_norm(g, pr.q, pr.s) - 1.0
        )
        g2 = smooth_composite_norm_gradient(pr, lam + z)
        worst["composite_gradient_stability"] = max(
            worst["composite_gradient_stability"], float((g2 - (1.0 + stability_k * eps) * g).max())
        )
    slacks = {"composite_additive_lower": 1e-9, "composite_additive_upper": 1e-9,
              "composite_gradient_norm": 1e-12, "composite_gradient_stability": 1e-12}
    return [FactCheck(k, worst[k] <= slacks[k], worst[k], samples) for k in worst]
