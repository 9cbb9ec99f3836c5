"""Bandits with knapsacks under l_p budget constraints.

Reward maximization with a vector cost per step and a budget B on the norm of
the cumulative cost.  The budget constraint is folded into a Lagrangian
reward per action,

    R_i = r_i - lambda * <C e_i, grad(load)>     while within budget,
    R_i = 0                                      afterwards,

which a full-information learner maximizes after an affine rescale to [0,1]
losses.  Two variants:

* adversarial: plain smoothed l_p potential, lambda = OPT/(2B),
  eps = 2p(||1||_p - 1)/B, requires B >= 2p(||1||_p - 1);
* stochastic: a dummy time resource consuming B/T per step rides in
  coordinate 0, the potential is the composite (p, r) smoothing, the budget
  check uses the (p, inf) norm, lambda = OPT/B, eps = sqrt((p+r)||1_d||_p/B).

Reward accrual ceases after the step on which the budget norm first crosses
B; the crossing step itself still counts.  An exponential-bucketing wrapper
covers unknown OPT.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .learner import Learner
from .potential import (
    INFINITY,
    NormParams,
    PrNormParams,
    composite_norm,
    lp_norm,
    ones_norm,
    smooth_composite_norm,
    smooth_composite_norm_gradient,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
)
from .trace import RunTrace, empirical_regret

ADVERSARIAL = "adversarial"
STOCHASTIC = "stochastic"


def outer_exponent(p: float, d: int, B: float) -> int:
    """Stochastic outer exponent r: nearest integer >= 1 of (B/||1_d||_p)^(1/3)."""
    return max(1, round((B / ones_norm(p, d)) ** (1.0 / 3.0)))


@dataclass
class BwkConfig:
    p: float
    d: int
    n: int  # includes the null action
    T: int
    B: float
    variant: str
    null_action: int
    opt_value: float | None = None  # None means unknown
    lambda_override: float | None = field(default=None, repr=False)
    epsilon_override: float | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.variant not in (ADVERSARIAL, STOCHASTIC):
            raise InvalidConfigError(f"unknown variant {self.variant!r}")
        if self.B <= 0:
            raise InvalidConfigError("budget must be positive")
        if not 0 <= self.null_action < self.n:
            raise InvalidConfigError("null action index out of range")
        if self.T < 1:
            raise InvalidConfigError("T must be >= 1")
        overridden = self.lambda_override is not None and self.epsilon_override is not None
        if self.variant == ADVERSARIAL and not overridden:
            gap = unit_gap(self.p, self.d)
            if self.B < 2.0 * gap:
                raise InvalidConfigError(
                    f"adversarial variant needs B >= 2p(||1||_p - 1) = {2.0 * gap:.6g}, got {self.B}"
                )

    @property
    def alpha(self) -> float:
        """Benchmark down-scaling 5p(||1||_p - 1)/||1||_p, diagnostics only."""
        return 5.0 * unit_gap(self.p, self.d) / ones_norm(self.p, self.d)

    @property
    def r_outer(self) -> int:
        return outer_exponent(self.p, self.d, self.B)

    def resolve(self, opt_value: float | None = None) -> "ResolvedBwk":
        """Pin lambda, epsilon and the potential; needs a known OPT value."""
        opt = self.opt_value if opt_value is None else opt_value
        lam = self.lambda_override
        eps = self.epsilon_override
        if lam is None or eps is None:
            if opt is None:
                raise InvalidConfigError("OPT value required; use run_bwk_guessing when unknown")
            if self.variant == ADVERSARIAL:
                lam = opt / (2.0 * self.B) if lam is None else lam
                if eps is None:
                    eps = 2.0 * unit_gap(self.p, self.d) / self.B
                    if eps == 0.0:  # d = 1: the potential is exact for any eps
                        eps = 1.0
            else:
                lam = opt / self.B if lam is None else lam
                eps = (
                    math.sqrt((self.p + self.r_outer) * ones_norm(self.p, self.d) / self.B)
                    if eps is None
                    else eps
                )
        return ResolvedBwk(self, lam, eps)


@dataclass
class ResolvedBwk:
    config: BwkConfig
    lambda_: float
    epsilon: float

    def __post_init__(self):
        c = self.config
        if c.variant == ADVERSARIAL:
            self.params = NormParams(c.p, c.d, self.epsilon)
            self.cost_bound = self.params.ones_norm
        else:
            self.params = PrNormParams(c.p, c.r_outer, c.d, self.epsilon)
            # dummy row contributes B/T to every action's cost column
            unit_col = np.concatenate([[c.B / c.T], np.ones(c.d)])
            self.cost_bound = composite_norm(unit_col, c.p, c.r_outer)
        # every Lagrangian reward lies in [-M, M]
        self.reward_bound = self.lambda_ * self.cost_bound + 1.0

    def gradient(self, load: np.ndarray) -> np.ndarray:
        if self.config.variant == ADVERSARIAL:
            return smooth_norm_gradient(self.params, load)
        return smooth_composite_norm_gradient(self.params, load)

    def potential(self, load: np.ndarray) -> float:
        if self.config.variant == ADVERSARIAL:
            return smooth_norm(self.params, load)
        return smooth_composite_norm(self.params, load)

    def budget_norm(self, load: np.ndarray) -> float:
        if self.config.variant == ADVERSARIAL:
            return lp_norm(load, self.config.p)
        return composite_norm(load, self.config.p, INFINITY)

    def crossed(self, load: np.ndarray) -> bool:
        # the dummy resource is exactly exhausted at T, so the stochastic
        # variant treats hitting the budget as crossing it
        if self.config.variant == ADVERSARIAL:
            return self.budget_norm(load) > self.config.B
        return self.budget_norm(load) >= self.config.B


@dataclass
class BwkState:
    resolved: ResolvedBwk
    learner: Learner
    load: np.ndarray  # (d,) adversarial, (d+1,) stochastic with dummy first
    step: int = 0
    total_reward: float = 0.0
    stopped: bool = False
    tau: int | None = None


def new_bwk_state(resolved: ResolvedBwk) -> BwkState:
    c = resolved.config
    dim = c.d if c.variant == ADVERSARIAL else c.d + 1
    return BwkState(resolved=resolved, learner=Learner.full(c.n, c.T), load=np.zeros(dim))


def _check_step_inputs(config: BwkConfig, r_vec, C) -> tuple[np.ndarray, np.ndarray]:
    r = np.asarray(r_vec, dtype=float)
    Cm = np.asarray(C, dtype=float)
    if r.shape != (config.n,):
        raise InvalidInputError(f"expected {config.n} rewards, got {r.shape}")
    if r.min() < 0.0 or r.max() > 1.0:
        raise InvalidInputError("rewards must lie in [0,1]")
    if Cm.shape != (config.d, config.n):
        raise InvalidInputError(f"cost matrix must be ({config.d},{config.n}), got {Cm.shape}")
    if Cm.min() < 0.0 or Cm.max() > 1.0:
        raise InvalidInputError("cost entries must lie in [0,1]")
    if np.any(Cm[:, config.null_action] != 0.0) or r[config.null_action] != 0.0:
        raise InvalidInputError("null action must have zero cost and zero reward")
    return r, Cm


def lagrangian_rewards(state: BwkState, r_vec, C) -> np.ndarray:
    """Per-expert reward r_i - lambda*<C e_i, grad>; all zeros once stopped.

    In the stochastic variant the inner product includes the dummy row's
    B/T * grad_0 term, so even the null action earns a small negative reward
    while the budget lasts.
    """
    resolved = state.resolved
    config = resolved.config
    r, Cm = _check_step_inputs(config, r_vec, C)
    if state.stopped:
        return np.zeros(config.n)
    g = resolved.gradient(state.load)
    if config.variant == ADVERSARIAL:
        surr = Cm.T @ g
    else:
        surr = (config.B / config.T) * g[0] + Cm.T @ g[1:]
    return r - resolved.lambda_ * surr


@dataclass
class BwkStepResult:
    played: np.ndarray
    realized: np.ndarray  # incurred cost (with dummy coordinate if stochastic)
    losses: np.ndarray
    lagrangian: np.ndarray
    gradient: np.ndarray
    alg_grad_cost: float
    reward: float


def bwk_step(state: BwkState, r_vec, C) -> BwkStepResult:
    """One round: play, convert Lagrangian rewards to [0,1] losses, update.

    Losses are the order-reversing affine map (M - R) / (2M) with
    M = lambda * cost_bound + 1, so the learner's argmin matches the argmax
    Lagrangian reward.  After stopping only the null action is played.
    """
    resolved = state.resolved
    config = resolved.config
    if state.step >= config.T:
        raise InvalidInputError("stepping past the horizon")
    g = resolved.gradient(state.load)
    R = lagrangian_rewards(state, r_vec, C)
    M = resolved.reward_bound
    losses = np.clip((M - R) / (2.0 * M), 0.0, 1.0)
    x = state.learner.next_distribution()
    state.learner.update_full(losses)
    if state.stopped:
        played = np.zeros(config.n)
        played[config.null_action] = 1.0
    else:
        played = x
    r = np.asarray(r_vec, dtype=float)
    Cm = np.asarray(C, dtype=float)
    reward = 0.0
    if not state.stopped:
        reward = float(r @ played)
        state.total_reward += reward
    state.step += 1
    real_cost = Cm @ played
    if config.variant == ADVERSARIAL:
        state.load = state.load + real_cost
        realized = real_cost
    else:
        new_load = state.load.copy()
        new_load[1:] += real_cost
        new_load[0] = state.step * (config.B / config.T)  # exact, not accumulated
        state.load = new_load
        realized = np.concatenate([[config.B / config.T], real_cost])
    if not state.stopped and resolved.crossed(state.load):
        state.stopped = True
        state.tau = state.step
    return BwkStepResult(
        played=played,
        realized=realized,
        losses=losses,
        lagrangian=R,
        gradient=g,
        alg_grad_cost=float(realized @ g),
        reward=reward,
    )


def run_bwk(
    config: BwkConfig, env, seed: int = 0, diagnostics: bool = False, opt_value: float | None = None
) -> RunTrace:
    """Run the known-OPT algorithm for T steps and return the trace."""
    if env.d != config.d or env.n != config.n:
        raise InvalidInputError(
            f"environment shape ({env.d},{env.n}) does not match config ({config.d},{config.n})"
        )
    if env.T < config.T:
        raise InvalidInputError(f"environment has only {env.T} steps, config wants {config.T}")
    if env.null_action is not None and env.null_action != config.null_action:
        raise InvalidInputError("null action index disagrees with the environment")
    resolved = config.resolve(opt_value)
    state = new_bwk_state(resolved)
    T, n = config.T, config.n
    load_dim = state.load.shape[0]
    env.reset()

    plays = np.zeros((T, n))
    realized = np.zeros((T, load_dim))
    losses = np.zeros((T, n))
    lagr = np.zeros((T, n))
    psi = np.zeros(T + 1)
    alg_dot = np.zeros(T)
    rewards = np.zeros(T)
    grads = np.zeros((T, load_dim)) if diagnostics else None
    mats = np.zeros((T, config.d, n)) if diagnostics else None
    rvecs = np.zeros((T, n)) if diagnostics else None

    psi[0] = resolved.potential(state.load)
    history: list[np.ndarray] = []
    for t in range(1, T + 1):
        step_data = env.emit(t, history)
        if step_data.rewards is None:
            raise InvalidInputError("budgeted runs need an environment with rewards")
        res = bwk_step(state, step_data.rewards, step_data.costs)
        history.append(res.played)
        i = t - 1
        plays[i] = res.played
        realized[i] = res.realized
        losses[i] = res.losses
        lagr[i] = res.lagrangian
        rewards[i] = res.reward
        alg_dot[i] = res.alg_grad_cost
        psi[t] = resolved.potential(state.load)
        if diagnostics:
            grads[i] = res.gradient
            mats[i] = step_data.costs
            rvecs[i] = step_data.rewards

    return RunTrace(
        problem="bwk",
        variant=config.variant,
        p=config.p,
        d=config.d,
        n=n,
        T=T,
        epsilon=resolved.epsilon,
        feedback="full",
        seed=seed,
        plays=plays,
        realized_costs=realized,
        surrogate_losses=losses,
        psi_values=psi,
        alg_grad_costs=alg_dot,
        final_load=state.load.copy(),
        final_norm=resolved.budget_norm(state.load),
        loss_scale=2.0 * resolved.reward_bound,
        rewards=rewards,
        total_reward=state.total_reward,
        tau=state.tau,
        regret_empirical=empirical_regret(losses, plays),
        gradients=grads,
        cost_matrices=mats,
        reward_vectors=rvecs,
        extras={
            "lagrangian": lagr,
            "reward_bound": resolved.reward_bound,
            "lambda": resolved.lambda_,
            "budget": config.B,
        },
    )


def scaled_benchmark(config: BwkConfig, x_star) -> np.ndarray:
    """Diagnostic comparison point x' = x*/alpha with the slack parked on the
    null action.  The algorithm itself never sees this; it exists so analyses
    can compare against a benchmark that strictly respects the budget."""
    x_star = np.asarray(x_star, dtype=float)
    alpha = config.alpha
    if alpha <= 1.0:
        return x_star.copy()
    scaled = x_star / alpha
    scaled[config.null_action] += 1.0 - scaled.sum()
    return scaled


def bucket_count(T: int) -> int:
    return max(1, math.ceil(math.log2(T)))


def run_bwk_guessing(
    config: BwkConfig,
    env,
    seed: int = 0,
    bucket: int | None = None,
    diagnostics: bool = False,
) -> RunTrace:
    """Unknown-OPT wrapper: draw a bucket i uniformly from {0..ceil(log2 T)-1},
    guess OPT = 2^i, and run the known-OPT algorithm with that guess.

    ``bucket`` can be forced for exhaustive sweeps over all guesses.
    """
    if config.opt_value is not None:
        raise InvalidConfigError("guessing wrapper is for unknown OPT")
    if config.T < 2:
        raise InvalidConfigError("guessing needs T >= 2")
    buckets = bucket_count(config.T)
    if bucket is None:
        bucket = int(np.random.default_rng([seed, 2]).integers(buckets))
    if not 0 <= bucket < buckets:
        raise InvalidInputError(f"bucket must lie in [0, {buckets})")
    guess = float(2**bucket)
    trace = run_bwk(config, env, seed=seed, diagnostics=diagnostics, opt_value=guess)
    trace.variant = "bucketing"
    trace.extras.update({"bucket": bucket, "bucket_total": buckets, "opt_guess": guess})
    return trace
