"""Vector-cost online learning on i.i.d. and adversarial instances.

Each step an unknown d x n cost matrix arrives, we commit to a distribution
over the n actions, and the column mix piles onto a load vector.  The goal
is a small l_p norm of the final load.  The reduction charges each action
its gradient-weighted cost and lets a one-dimensional no-regret learner do
the rest.
"""

import numpy as np

from vecbandits import (
    INFINITY,
    AdversarialEpsilon,
    Bernoulli,
    DoublingEpsilon,
    OlvcConfig,
    PhasedHalvingSpec,
    StochasticSpec,
    opt_olvc_stochastic,
    phased_halving_env,
    phased_halving_opt,
    run_olvc,
    run_olvc_doubling,
    stochastic_env,
)

print("=== stochastic arrivals: four machines, five job types ===")
d, n, p, T = 4, 5, 2, 5000
q = [
    [0.70, 0.10, 0.10, 0.40, 0.30],
    [0.10, 0.70, 0.10, 0.40, 0.30],
    [0.10, 0.10, 0.70, 0.40, 0.30],
    [0.30, 0.30, 0.30, 0.10, 0.30],
]
costs = [[Bernoulli(v) for v in row] for row in q]

oracle = opt_olvc_stochastic(StochasticSpec(costs=costs, seed=0), T, p, mc_samples=100, seed=0)
print(f"offline benchmark: x* = {np.round(oracle.x_star, 3)}, value = {oracle.value:.1f}")

trace = run_olvc(OlvcConfig(p, d, n, T), stochastic_env(StochasticSpec(costs=costs, seed=7), T), seed=7)
print(f"online run:        final l_{p} load = {trace.final_norm:.1f}  (ratio {trace.final_norm / oracle.value:.3f})")
print(f"last-step play: {np.round(trace.plays[-1], 3)}")

print()
print("=== bandit feedback on the same instance ===")
bandit = run_olvc(
    OlvcConfig(p, d, n, T, feedback="bandit"),
    stochastic_env(StochasticSpec(costs=costs, seed=7), T),
    seed=7,
)
print(f"bandit run:        final l_{p} load = {bandit.final_norm:.1f}  (ratio {bandit.final_norm / oracle.value:.3f})")
print("(only the sampled action's column is revealed each step)")

print()
print("=== adversarial arrivals: the phased-halving hard instance ===")
spec = PhasedHalvingSpec(d=16, p=INFINITY, T=4096, seed=0)
opt = phased_halving_opt(spec)
print(f"{spec.k} phases of {spec.L} steps, 2^{spec.k} actions; hindsight optimum = {opt:.0f}")

cfg = OlvcConfig(INFINITY, 16, spec.n_actions, 4096, epsilon_rule=AdversarialEpsilon(opt))
adv = run_olvc(cfg, phased_halving_env(spec), seed=0)
print(f"known-OPT tuning:   max load {adv.final_norm:.0f}  (ratio {adv.final_norm / opt:.2f};")
print("  no online algorithm can beat ~min(p, log d)/2 here)")

cfg_dbl = OlvcConfig(INFINITY, 16, spec.n_actions, 4096, epsilon_rule=DoublingEpsilon(1.0))
dbl = run_olvc_doubling(cfg_dbl, phased_halving_env(spec), seed=0)
print(f"doubling wrapper:   max load {dbl.final_norm:.0f}, reached phase {dbl.phases[-1]}")
