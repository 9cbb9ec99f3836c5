"""One-dimensional no-regret learning over n actions.

Two feedback modes share one weight vector:

* FULL: exponential weights on the whole loss vector (Hedge).
* BANDIT: importance-weighted updates with an optimistic confidence bonus
  (the EXP3.P schedule), observing only the played action's loss.

Both consume losses normalized to [0, 1] and never peek at future losses;
their state is a function of past feedback only.  Randomness is injected by
the caller, so BANDIT runs are deterministic given the stream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

FULL = "full"
BANDIT = "bandit"

_LOSS_SLACK = 1e-9
# rescale early enough that one more exp(-eta*loss) factor cannot reach 0.0
_UNDERFLOW_FLOOR = 1e-150
_OVERFLOW_CEIL = 1e150


def hedge_regret_bound(n: int, T: int) -> float:
    """Worst-case regret bound of the full-information learner.

    sqrt(T ln n / 2) + ln n / eta with the constructed rate eta.
    """
    if n <= 1:
        return 0.0
    eta = math.sqrt(8.0 * math.log(n) / T)
    return math.sqrt(T * math.log(n) / 2.0) + math.log(n) / eta


def exp3p_regret_bound(n: int, T: int, failure_prob: float = 0.01) -> float:
    """High-probability regret scale of the bandit learner, 5.15*sqrt(T n ln(n/delta))."""
    if n <= 1:
        return 0.0
    return 5.15 * math.sqrt(T * n * math.log(n / failure_prob))


@dataclass
class Learner:
    """Weight-based learner state.  Build via ``Learner.full`` or ``Learner.bandit``."""

    n: int
    mode: str
    weights: np.ndarray
    learning_rate: float
    horizon: int
    step_count: int = 0
    exploration_mix: float = 0.0
    confidence_width: float = 0.0
    failure_prob: float = field(default=0.01, repr=False)

    @classmethod
    def full(cls, n: int, T: int) -> "Learner":
        """Full-information exponential weights with rate sqrt(8 ln n / T)."""
        if n < 1:
            raise InvalidInputError("need at least one action")
        if T < 1:
            raise InvalidInputError("horizon must be >= 1")
        rate = math.sqrt(8.0 * math.log(n) / T) if n > 1 else 0.0
        return cls(n=n, mode=FULL, weights=np.ones(n), learning_rate=rate, horizon=T)

    @classmethod
    def bandit(cls, n: int, T: int, failure_prob: float = 0.01) -> "Learner":
        """Bandit-feedback learner on the standard EXP3.P schedule.

        exploration_mix  gamma = min(0.5, 1.05*sqrt(n ln n / T))
        learning_rate    eta   = 0.95*sqrt(ln n / (n T))
        confidence_width beta  = sqrt(ln(n/delta) / (n T))
        """
        if n < 1:
            raise InvalidInputError("need at least one action")
        if T < 1:
            raise InvalidInputError("horizon must be >= 1")
        if not (0.0 < failure_prob < 1.0):
            raise InvalidInputError(f"failure_prob must be in (0,1), got {failure_prob}")
        log_n = math.log(n) if n > 1 else 0.0
        gamma = min(0.5, 1.05 * math.sqrt(n * log_n / T))
        eta = 0.95 * math.sqrt(log_n / (n * T))
        beta = math.sqrt(math.log(n / failure_prob) / (n * T))
        return cls(
            n=n,
            mode=BANDIT,
            weights=np.ones(n),
            learning_rate=eta,
            horizon=T,
            exploration_mix=gamma,
            confidence_width=beta,
            failure_prob=failure_prob,
        )

    def next_distribution(self) -> np.ndarray:
        """Current play: normalized weights, mixed with uniform exploration in bandit mode."""
        probs = self.weights / self.weights.sum()
        if self.mode == BANDIT and self.exploration_mix > 0.0:
            probs = (1.0 - self.exploration_mix) * probs + self.exploration_mix / self.n
        return probs

    def _rescale(self):
        m = self.weights.max()
        if m == 0.0 or not np.isfinite(m):
            raise InvalidInputError("weights under/overflowed; the learning rate is far too large")
        if m < _UNDERFLOW_FLOOR or m > _OVERFLOW_CEIL:
            self.weights /= m

    def _check_horizon(self):
        if self.step_count >= self.horizon:
            raise InvalidInputError("learner was built for a shorter horizon")

    def update_full(self, losses) -> None:
        """Multiply weight_i by exp(-eta * loss_i).  Losses must lie in [0, 1]."""
        if self.mode != FULL:
            raise InvalidInputError("update_full called on a bandit learner")
        self._check_horizon()
        arr = np.asarray(losses, dtype=float)
        if arr.shape != (self.n,):
            raise InvalidInputError(f"expected {self.n} losses, got shape {arr.shape}")
        if np.any(arr < -_LOSS_SLACK) or np.any(arr > 1.0 + _LOSS_SLACK):
            raise InvalidInputError(
                "loss outside [0,1]; the caller is responsible for scaling"
            )
        arr = np.clip(arr, 0.0, 1.0)
        self.weights *= np.exp(-self.learning_rate * arr)
        self._rescale()
        self.step_count += 1

    def update_bandit(self, played: int, observed_loss: float, played_prob: float) -> None:
        """Importance-weighted update for the played action plus the optimism bonus.

        ``played_prob`` must be the probability that next_distribution assigned
        to ``played`` when the action was drawn.
        """
        if self.mode != BANDIT:
            raise InvalidInputError("update_bandit called on a full-information learner")
        self._check_horizon()
        if not 0 <= played < self.n:
            raise InvalidInputError(f"action index {played} out of range")
        if played_prob <= 0.0:
            raise InvalidInputError("played_prob must be positive")
        if observed_loss < -_LOSS_SLACK or observed_loss > 1.0 + _LOSS_SLACK:
            raise InvalidInputError("observed loss outside [0,1]")
        probs = self.next_distribution()
        if abs(probs[played] - played_prob) > 1e-9:
            raise InvalidInputError("played_prob does not match the current distribution")
        gain = 1.0 - min(max(observed_loss, 0.0), 1.0)
        est = self.confidence_width / probs
        est[played] += gain / probs[played]
        self.weights *= np.exp(self.learning_rate * est)
        self._rescale()
        self.step_count += 1
