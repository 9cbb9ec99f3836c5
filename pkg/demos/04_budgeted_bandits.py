"""Bandits with knapsacks: collect reward until an l_p budget runs out.

The budget constraint is folded into a Lagrangian reward per action
(reward minus a price times the gradient-weighted cost) and handed to the
same no-regret machinery.  The stochastic variant adds a dummy resource
that burns B/T per step so the run always terminates by the horizon.
"""

import math

import numpy as np

from vecbandits import (
    INFINITY,
    Bernoulli,
    BwkConfig,
    Constant,
    PhasedHalvingSpec,
    StochasticSpec,
    bucket_count,
    opt_bwk,
    phased_halving_bwk_env,
    phased_halving_bwk_opt,
    run_bwk,
    run_bwk_guessing,
    stochastic_env,
)

print("=== stochastic variant: three products, one shared budget ===")
d, n, p, B, T = 3, 4, 2, 2000.0, 10_000
cost_q = [[0.30, 0.05, 0.20, 0.0], [0.05, 0.30, 0.20, 0.0], [0.05, 0.05, 0.20, 0.0]]
rew_q = [0.90, 0.90, 0.50, 0.0]
costs = [[Bernoulli(v) if v > 0 else Constant(0.0) for v in row] for row in cost_q]
rewards = [Bernoulli(v) if v > 0 else Constant(0.0) for v in rew_q]

oracle = opt_bwk(StochasticSpec(costs=costs, rewards=rewards, seed=0, null_action=3), p, B, T=T)
print(f"benchmark mixture x* = {np.round(oracle.x_star, 3)}  (last entry = idle action)")
print(f"benchmark reward     = {oracle.value:.0f}   (prefix-scan form: {oracle.alt_value:.0f})")

cfg = BwkConfig(p=p, d=d, n=n, T=T, B=B, variant="stochastic", null_action=3, opt_value=oracle.value)
trace = run_bwk(cfg, stochastic_env(StochasticSpec(costs=costs, rewards=rewards, seed=1, null_action=3), T), seed=1)
print(f"algorithm reward     = {trace.total_reward:.0f}   stopped at t = {trace.tau} of {T}")
print(f"final budget usage   = {trace.final_norm:.1f} of {B:.0f}")

print()
print("=== adversarial variant on the phased-halving instance ===")
d, T = 8, 4096
B = float(math.ceil(2.0 * math.log(d)))  # smallest admissible integer budget
spec = PhasedHalvingSpec(d=d, p=INFINITY, T=T, seed=0)
opt = phased_halving_bwk_opt(spec, B)
env = phased_halving_bwk_env(spec, B)
cfg = BwkConfig(p=INFINITY, d=d, n=env.n, T=T, B=B, variant="adversarial",
                null_action=env.null_action, opt_value=opt)
trace = run_bwk(cfg, env, seed=0)
print(f"budget {B:.0f}, closed-form OPT {opt:.0f}: reward {trace.total_reward:.2f}, stop time {trace.tau}")

print()
print("=== unknown OPT: exponential bucketing ===")
guess_cfg = BwkConfig(p=INFINITY, d=d, n=env.n, T=T, B=B, variant="adversarial",
                      null_action=env.null_action)
buckets = bucket_count(T)
vals = []
for b in range(buckets):
    tg = run_bwk_guessing(guess_cfg, phased_halving_bwk_env(spec, B), seed=0, bucket=b)
    vals.append(tg.total_reward)
    print(f"  guess 2^{b:<2d} = {2**b:>5}: reward {tg.total_reward:6.2f}")
print(f"mean over {buckets} buckets x {buckets} = {np.mean(vals) * buckets:.1f} "
      f"vs known-OPT reward {trace.total_reward:.1f}")
