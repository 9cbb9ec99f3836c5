"""Per-run records.

A RunTrace stores everything one seeded run produced: per-step plays, realized
costs, the [0,1] losses of the induced one-dimensional game, potential values,
and the summary quantities the harness reports.  Diagnostics (per-step
gradients and full cost matrices) are kept only when requested because the
benchmark-cost check needs them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def empirical_regret(losses: np.ndarray, plays: np.ndarray) -> float:
    """Realized regret of the one-dimensional game: sum <loss_t, x_t> - best fixed action."""
    incurred = float((losses * plays).sum())
    best_fixed = float(losses.sum(axis=0).min())
    return incurred - best_fixed


@dataclass
class RunTrace:
    problem: str
    variant: str
    p: float
    d: int
    n: int
    T: int
    epsilon: float
    feedback: str
    seed: int | None

    plays: np.ndarray  # (T, n) distributions actually played
    realized_costs: np.ndarray  # (T, load_dim) cost vector incurred each step
    surrogate_losses: np.ndarray  # (T, n) losses of the induced 1-d game, in [0,1]
    psi_values: np.ndarray  # (T+1,) smoothed norm of the governing load
    alg_grad_costs: np.ndarray  # (T,) <incurred cost, gradient at previous load>
    final_load: np.ndarray
    final_norm: float

    loss_scale: float  # raw surrogate cost = loss * loss_scale (olvc)
    rewards: np.ndarray | None = None  # (T,) realized reward accrued per step
    total_reward: float = 0.0
    tau: int | None = None
    sampled_actions: np.ndarray | None = None  # (T,) bandit-mode draws
    phases: np.ndarray | None = None  # (T,) doubling phase index per step
    regret_empirical: float = 0.0

    gradients: np.ndarray | None = None  # (T, load_dim), diagnostics only
    cost_matrices: np.ndarray | None = None  # (T, load_dim, n), diagnostics only
    reward_vectors: np.ndarray | None = None  # (T, n), diagnostics only
    extras: dict = field(default_factory=dict)

    def recompute_final_load(self) -> np.ndarray:
        return self.realized_costs.sum(axis=0)

    def recompute_total_reward(self) -> float:
        return 0.0 if self.rewards is None else float(self.rewards.sum())

    @property
    def has_diagnostics(self) -> bool:
        return self.gradients is not None and self.cost_matrices is not None
