"""Online learning with vector costs and bandits with knapsacks.

A numpy library for load balancing under l_p norms with full or bandit
feedback, built on a smoothed-norm reduction to one-dimensional no-regret
learning, plus the budgeted (knapsack) reward-maximization variant, instance
generators, an offline oracle, and a reproducible experiment harness.
"""

from .potential import (
    INFINITY,
    NormParams,
    PrNormParams,
    composite_norm,
    dual_exponent,
    lp_norm,
    ones_norm,
    power_sum,
    smooth_composite_norm,
    smooth_composite_norm_gradient,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
)
from .learner import BANDIT, FULL, Learner, exp3p_regret_bound, hedge_regret_bound
from .olvc import (
    AdversarialEpsilon,
    DoublingEpsilon,
    ExplicitEpsilon,
    OlvcConfig,
    adversarial_epsilon,
    benchmark_bound_holds,
    competitive_factor,
    run_olvc,
    run_olvc_doubling,
    stochastic_epsilon,
    surrogate_costs,
)
from .bwk import (
    ADVERSARIAL,
    STOCHASTIC,
    BwkConfig,
    bucket_count,
    lagrangian_rewards,
    run_bwk,
    run_bwk_guessing,
    scaled_benchmark,
)
from .environment import (
    Bernoulli,
    Constant,
    Environment,
    PhasedHalvingSpec,
    StepData,
    StochasticSpec,
    Uniform,
    benchmark_action,
    benchmark_load,
    greedy_trap_env,
    phased_halving_bwk_env,
    phased_halving_bwk_opt,
    phased_halving_env,
    phased_halving_opt,
    record_trace,
    stochastic_env,
    trace_env,
)
from .oracle import OracleSolution, opt_bwk, opt_olvc_adversarial, opt_olvc_stochastic, simplex_grid
from .harness import (
    ExperimentConfig,
    Report,
    naive_baseline,
    run_experiment,
    verify_composite_facts,
    verify_potential_facts,
)
from .trace import RunTrace

__version__ = "0.1.0"
