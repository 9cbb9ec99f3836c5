"""Online learning with vector costs: the d-dimensional load-balancing
problem reduced to a one-dimensional surrogate game.

Each step the algorithm charges action i the gradient-weighted cost
``<C e_i, grad(load)>`` where the gradient is taken on the smoothed norm of
the load accumulated so far, feeds the scaled costs to a no-regret learner,
and incurs the realized load.  Tuning of the smoothing parameter is carried
by an epsilon rule; the doubling wrapper handles an unknown optimal load by
restarting with geometrically growing guesses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, UnsupportedOperationError
from .learner import BANDIT, FULL, Learner
from .potential import (
    NormParams,
    lp_norm,
    ones_norm,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
)
from .trace import RunTrace, empirical_regret


# ---------------------------------------------------------------------------
# Epsilon rules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitEpsilon:
    value: float


@dataclass(frozen=True)
class AdversarialEpsilon:
    """eps = min(1, ||1||_p / (5 * opt_guess))."""

    opt_guess: float


@dataclass(frozen=True)
class DoublingEpsilon:
    """Restart-based rule for unknown optimal load; phase i guesses 2^i."""

    growth_constant: float = 1.0

    def __post_init__(self):
        if self.growth_constant < 1.0:
            raise InvalidConfigError("growth constant must be >= 1")


def adversarial_epsilon(p: float, d: int, opt_guess: float) -> float:
    if opt_guess <= 0:
        raise InvalidInputError("opt_guess must be positive")
    return min(1.0, ones_norm(p, d) / (5.0 * opt_guess))


def stochastic_epsilon(p: float, d: int, T: int) -> float:
    """Default smoothing balancing the two eps-dependent terms of the
    stochastic load bound: min(1, sqrt(p(||1||_p - 1) / (||1||_p sqrt(T))))."""
    gap = unit_gap(p, d)
    if gap == 0.0:  # d == 1: no smoothing overhead at all
        return 1.0
    return min(1.0, math.sqrt(gap / (ones_norm(p, d) * math.sqrt(T))))


def competitive_factor(p: float, d: int) -> float:
    """min(p, log2(d) + 1): the dimension factor in adversarial guarantees."""
    return min(p, math.log2(d) + 1.0)


# ---------------------------------------------------------------------------
# Config and state
# ---------------------------------------------------------------------------


@dataclass
class OlvcConfig:
    p: float
    d: int
    n: int
    T: int
    feedback: str = FULL
    epsilon_rule: ExplicitEpsilon | AdversarialEpsilon | DoublingEpsilon | None = None
    failure_prob: float = 0.01  # bandit learner confidence

    def __post_init__(self):
        if self.T < 1:
            raise InvalidConfigError("T must be >= 1")
        if self.n < 1:
            raise InvalidConfigError("n must be >= 1")
        if self.feedback not in (FULL, BANDIT):
            raise InvalidConfigError(f"unknown feedback mode {self.feedback!r}")

    def resolve_epsilon(self) -> float:
        rule = self.epsilon_rule
        if rule is None:
            return stochastic_epsilon(self.p, self.d, self.T)
        if isinstance(rule, ExplicitEpsilon):
            return rule.value
        if isinstance(rule, AdversarialEpsilon):
            return adversarial_epsilon(self.p, self.d, rule.opt_guess)
        raise InvalidConfigError("doubling configs run via run_olvc_doubling")

    def new_learner(self) -> Learner:
        if self.feedback == FULL:
            return Learner.full(self.n, self.T)
        return Learner.bandit(self.n, self.T, self.failure_prob)


@dataclass
class OlvcState:
    params: NormParams
    learner: Learner
    load: np.ndarray
    step: int = 0
    rng: np.random.Generator | None = None
    phase_index: int = 1
    phase_load: np.ndarray | None = None  # reset-at-phase load, doubling only

    @property
    def governing_load(self) -> np.ndarray:
        return self.load if self.phase_load is None else self.phase_load


@dataclass
class OlvcStepResult:
    x: np.ndarray  # distribution played
    realized: np.ndarray  # incurred cost vector
    losses: np.ndarray  # scaled surrogate losses in [0,1]
    gradient: np.ndarray
    alg_grad_cost: float  # <realized, gradient>
    sampled: int | None = None


def surrogate_costs(params: NormParams, load, cost_matrix) -> np.ndarray:
    """Per-action surrogate cost <C e_i, grad>; each lies in [0, ||1||_p]."""
    C = _check_costs(cost_matrix, params.d)
    g = smooth_norm_gradient(params, load)
    return C.T @ g


def _check_costs(cost_matrix, d: int) -> np.ndarray:
    C = np.asarray(cost_matrix, dtype=float)
    if C.ndim != 2 or C.shape[0] != d:
        raise InvalidInputError(f"cost matrix must be ({d}, n), got {C.shape}")
    if not np.all(np.isfinite(C)):
        raise InvalidInputError("cost matrix has non-finite entries")
    if C.min() < 0.0 or C.max() > 1.0:
        raise InvalidInputError("cost entries must lie in [0,1]")
    return C


def olvc_step(state: OlvcState, config: OlvcConfig, cost_matrix) -> OlvcStepResult:
    """Play one step: emit the learner's distribution, incur load, update.

    FULL feedback plays the fractional distribution and feeds the whole scaled
    cost vector; BANDIT feedback samples one action from the injected stream,
    incurs that action's column, and feeds only its scaled cost.  The gradient
    is always taken at the load before this step's update.
    """
    if state.step >= config.T:
        raise InvalidInputError("stepping past the horizon")
    C = _check_costs(cost_matrix, config.d)
    g = smooth_norm_gradient(state.params, state.governing_load)
    costs = C.T @ g
    scale = state.params.ones_norm
    if costs.min() < -1e-9 * scale or costs.max() > scale * (1.0 + 1e-9):
        raise InvalidInputError("surrogate cost escaped [0, ||1||_p]; gradient is corrupt")
    losses = np.clip(costs / scale, 0.0, 1.0)
    x = state.learner.next_distribution()
    sampled = None
    if config.feedback == FULL:
        state.learner.update_full(losses)
        realized = C @ x
    else:
        if state.rng is None:
            raise InvalidInputError("bandit mode needs an injected random stream")
        sampled = int(state.rng.choice(config.n, p=x))
        state.learner.update_bandit(sampled, float(losses[sampled]), float(x[sampled]))
        realized = C[:, sampled].copy()
    state.load = state.load + realized
    if state.phase_load is not None:
        state.phase_load = state.phase_load + realized
    state.step += 1
    return OlvcStepResult(
        x=x,
        realized=realized,
        losses=losses,
        gradient=g,
        alg_grad_cost=float(realized @ g),
        sampled=sampled,
    )


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------


def run_olvc(config: OlvcConfig, env, seed: int = 0, diagnostics: bool = False) -> RunTrace:
    """Execute T steps against an environment and return the full trace."""
    if isinstance(config.epsilon_rule, DoublingEpsilon):
        raise InvalidConfigError("use run_olvc_doubling for the doubling rule")
    _check_env(config, env)
    eps = config.resolve_epsilon()
    params = NormParams(config.p, config.d, eps)
    state = OlvcState(
        params=params,
        learner=config.new_learner(),
        load=np.zeros(config.d),
        rng=np.random.default_rng([seed, 1]),
    )
    return _drive(config, env, state, seed, diagnostics, variant="fixed")


def run_olvc_doubling(
    config: OlvcConfig, env, seed: int = 0, diagnostics: bool = False
) -> RunTrace:
    """Unknown-OPT wrapper: phase i guesses the optimal load to be 2^i.

    Each phase imagines a fresh zero load and a fresh learner, with the
    smoothing set from the guess.  The phase advances (by exactly one) once
    the phase load's norm exceeds c * min(p, log2 d + 1) * 2^i.  The trace
    reports the true, un-reset cumulative load.
    """
    rule = config.epsilon_rule
    if not isinstance(rule, DoublingEpsilon):
        raise InvalidConfigError("run_olvc_doubling needs a DoublingEpsilon rule")
    _check_env(config, env)
    eps1 = adversarial_epsilon(config.p, config.d, 2.0)
    state = OlvcState(
        params=NormParams(config.p, config.d, eps1),
        learner=config.new_learner(),
        load=np.zeros(config.d),
        rng=np.random.default_rng([seed, 1]),
        phase_index=1,
        phase_load=np.zeros(config.d),
    )
    factor = competitive_factor(config.p, config.d)

    def after_step(state: OlvcState):
        threshold = rule.growth_constant * factor * (2.0 ** state.phase_index)
        if lp_norm(state.phase_load, config.p) > threshold:
            state.phase_index += 1
            state.phase_load = np.zeros(config.d)
            state.learner = config.new_learner()
            state.params = NormParams(
                config.p, config.d, adversarial_epsilon(config.p, config.d, 2.0 ** state.phase_index)
            )

    return _drive(config, env, state, seed, diagnostics, variant="doubling", after_step=after_step)


def _check_env(config: OlvcConfig, env) -> None:
    if env.d != config.d or env.n != config.n:
        raise InvalidInputError(
            f"environment shape ({env.d},{env.n}) does not match config ({config.d},{config.n})"
        )
    if env.T < config.T:
        raise InvalidInputError(f"environment has only {env.T} steps, config wants {config.T}")


def _drive(config, env, state, seed, diagnostics, variant, after_step=None) -> RunTrace:
    T, d, n = config.T, config.d, config.n
    env.reset()
    plays = np.zeros((T, n))
    realized = np.zeros((T, d))
    losses = np.zeros((T, n))
    psi = np.zeros(T + 1)
    alg_dot = np.zeros(T)
    sampled = np.full(T, -1, dtype=int) if config.feedback == BANDIT else None
    phases = np.zeros(T, dtype=int) if variant == "doubling" else None
    grads = np.zeros((T, d)) if diagnostics else None
    mats = np.zeros((T, d, n)) if diagnostics else None

    psi[0] = smooth_norm(state.params, state.governing_load)
    history: list[np.ndarray] = []
    for t in range(1, T + 1):
        step_data = env.emit(t, history)
        res = olvc_step(state, config, step_data.costs)
        history.append(res.x)
        i = t - 1
        plays[i] = res.x
        realized[i] = res.realized
        losses[i] = res.losses
        alg_dot[i] = res.alg_grad_cost
        psi[t] = smooth_norm(state.params, state.governing_load)
        if sampled is not None:
            sampled[i] = res.sampled
        if phases is not None:
            phases[i] = state.phase_index
        if diagnostics:
            grads[i] = res.gradient
            mats[i] = step_data.costs
        if after_step is not None:
            after_step(state)

    return RunTrace(
        problem="olvc",
        variant=variant,
        p=config.p,
        d=d,
        n=n,
        T=T,
        epsilon=state.params.epsilon if variant != "doubling" else float("nan"),
        feedback=config.feedback,
        seed=seed,
        plays=plays,
        realized_costs=realized,
        surrogate_losses=losses,
        psi_values=psi,
        alg_grad_costs=alg_dot,
        final_load=state.load.copy(),
        final_norm=lp_norm(state.load, config.p),
        loss_scale=ones_norm(config.p, config.d),
        sampled_actions=sampled,
        phases=phases,
        regret_empirical=empirical_regret(losses, plays),
        gradients=grads,
        cost_matrices=mats,
        extras={"epsilon_first_phase": state.params.epsilon} if variant == "doubling" else {},
    )


# ---------------------------------------------------------------------------
# Benchmark diagnostic
# ---------------------------------------------------------------------------


def benchmark_bound_holds(trace: RunTrace, x_star, slack_per_step: float = 1e-6) -> bool:
    """Check the benchmark's surrogate cost against the run's own cost.

    For any fixed distribution x* with total-load norm V, the run must satisfy

        sum_t <C_t x*, g_t>  <=  (exp(eps*V/||1||_p) - 1)
                                 * ((1+eps) * sum_t <C_t x_t, g_t> + ||1||_p/eps)

    up to ``slack_per_step * T``.  Needs a trace recorded with diagnostics.
    """
    if not trace.has_diagnostics:
        raise UnsupportedOperationError("trace was recorded without gradients")
    if trace.variant == "doubling":
        raise UnsupportedOperationError("diagnostic is defined for fixed-epsilon runs")
    x_star = np.asarray(x_star, dtype=float)
    bench_vectors = np.einsum("tdn,n->td", trace.cost_matrices, x_star)
    lhs = float(np.einsum("td,td->", bench_vectors, trace.gradients))
    opt = lp_norm(bench_vectors.sum(axis=0), trace.p)
    eps = trace.epsilon
    scale = ones_norm(trace.p, trace.d)
    rhs = math.expm1(eps * opt / scale) * (
        (1.0 + eps) * float(trace.alg_grad_costs.sum()) + scale / eps
    )
    return lhs <= rhs + slack_per_step * trace.T
