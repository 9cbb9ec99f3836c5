"""Tour of the smoothed norms that power everything else.

The l_p norm of a load vector is what we ultimately pay, but its gradient is
unstable (for p = infinity it is a hard argmax).  The smoothed proxy trades
an additive offset for a gradient that moves by at most a constant factor
per unit load step, which is exactly what the online reduction needs.
"""

import numpy as np

from vecbandits import (
    INFINITY,
    NormParams,
    PrNormParams,
    lp_norm,
    smooth_composite_norm,
    smooth_norm,
    smooth_norm_gradient,
    unit_gap,
    verify_potential_facts,
)

rng = np.random.default_rng(0)

print("=== additive sandwich ===")
for p in (1, 2, INFINITY):
    params = NormParams(p, d=4, epsilon=0.5)
    load = rng.uniform(0, 30, 4)
    exact = lp_norm(load, p)
    smooth = smooth_norm(params, load)
    print(
        f"p={str(p):>4}: ||load||_p = {exact:8.3f}   smoothed = {smooth:8.3f}   "
        f"offset cap = {unit_gap(p, 4) / params.epsilon:6.3f}"
    )

print()
print("=== the gradient is a soft version of 'which dimension is maxed' ===")
params = NormParams(INFINITY, 4, epsilon=0.5)
for scale in (0.0, 2.0, 10.0):
    load = np.array([1.0, 2.0, 3.0, 4.0]) * scale
    g = smooth_norm_gradient(params, load)
    print(f"load {np.round(load, 1)} -> gradient {np.round(g, 4)}")
print("as loads spread out, the gradient concentrates on the leader,")
print("but never jumps: one extra unit of load moves it by a bounded factor.")

print()
print("=== composite norm with a dummy first coordinate ===")
pr = PrNormParams(p=2, r=8, d=3, epsilon=0.5)
load = np.array([5.0, 1.0, 2.0, 2.0])
print(f"delta = eps/(p+r) = {pr.delta:.4f}")
print(f"smoothed composite value at {load}: {smooth_composite_norm(pr, load):.4f}")

print()
print("=== property sweep (same checks the CLI verify-potentials runs) ===")
for check in verify_potential_facts(samples=2000, seed=1):
    print(" ", check.line())
print()
print("note: the componentwise stability line fails by design; the claimed")
print("(1+eps) constant is analytically wrong for large p with eps near 1.")
print("The potential_increase line is the inequality the algorithms use.")
