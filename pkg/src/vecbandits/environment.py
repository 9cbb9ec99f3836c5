"""Instance generators.

Environments emit one cost matrix (and optionally a reward vector) per step.
An environment may condition on the algorithm's past plays - ``emit`` receives
the plays from steps 1..t-1 - but never on the current one; the sequential
cursor enforces the ordering.  All randomness comes from the seed carried by
the spec, so identical spec + seed reproduces the emission sequence exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnvironmentExhaustedError, InvalidInputError, TraceParseError
from .potential import INFINITY, lp_norm


@dataclass
class StepData:
    costs: np.ndarray  # (d, n) entries in [0, 1]
    rewards: np.ndarray | None = None  # (n,) in [0, 1]


class Environment:
    """Base class: subclasses implement _emit(t, past_plays) -> StepData."""

    d: int
    n: int
    T: int
    null_action: int | None = None
    has_rewards: bool = False

    def __init__(self):
        self._cursor = 1

    def reset(self) -> None:
        self._cursor = 1

    def emit(self, t: int, past_plays=()) -> StepData:
        if t > self.T:
            raise EnvironmentExhaustedError(f"step {t} beyond horizon {self.T}")
        if t != self._cursor:
            raise InvalidInputError(f"steps must be emitted in order; expected {self._cursor}, got {t}")
        self._cursor += 1
        step = self._emit(t, past_plays)
        if step.costs.shape != (self.d, self.n):
            raise InvalidInputError(f"bad cost shape {step.costs.shape}")
        return step

    def _emit(self, t: int, past_plays) -> StepData:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# Distribution descriptors for i.i.d. environments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Bernoulli:
    q: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise InvalidInputError(f"Bernoulli parameter outside [0,1]: {self.q}")

    @property
    def mean(self) -> float:
        return self.q


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not (0.0 <= self.low <= self.high <= 1.0):
            raise InvalidInputError(f"Uniform support outside [0,1]: ({self.low}, {self.high})")

    @property
    def mean(self) -> float:
        return 0.5 * (self.low + self.high)


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise InvalidInputError(f"Constant outside [0,1]: {self.value}")

    @property
    def mean(self) -> float:
        return self.value


Distribution = Bernoulli | Uniform | Constant

# codes for the vectorized transform
_BER, _UNI, _CON = 0, 1, 2


def _compile_cells(cells: np.ndarray):
    """Flatten a descriptor array into (kind, a, b) arrays for one-draw sampling."""
    kind = np.empty(cells.shape, dtype=np.int8)
    a = np.zeros(cells.shape)
    b = np.zeros(cells.shape)
    for idx, cell in np.ndenumerate(cells):
        if isinstance(cell, Bernoulli):
            kind[idx], a[idx] = _BER, cell.q
        elif isinstance(cell, Uniform):
            kind[idx], a[idx], b[idx] = _UNI, cell.low, cell.high
        elif isinstance(cell, Constant):
            kind[idx], a[idx] = _CON, cell.value
        else:
            raise InvalidInputError(f"unknown distribution descriptor {cell!r}")
    return kind, a, b


def _transform(u: np.ndarray, kind, a, b) -> np.ndarray:
    out = np.where(kind == _BER, (u < a).astype(float), 0.0)
    out = np.where(kind == _UNI, a + (b - a) * u, out)
    out = np.where(kind == _CON, a, out)
    return out


@dataclass
class StochasticSpec:
    """Per-cell distribution descriptors for an i.i.d. environment.

    ``costs`` is a d x n nested list of descriptors, ``rewards`` an optional
    length-n list.  Every support must lie inside [0, 1].
    """

    costs: list
    rewards: list | None = None
    seed: int = 0
    null_action: int | None = None

    def __post_init__(self):
        self._cost_cells = np.array(self.costs, dtype=object)
        if self._cost_cells.ndim != 2:
            raise InvalidInputError("costs must be a d x n grid of descriptors")
        self._reward_cells = None
        if self.rewards is not None:
            self._reward_cells = np.array(self.rewards, dtype=object)
            if self._reward_cells.shape != (self._cost_cells.shape[1],):
                raise InvalidInputError("rewards must have one descriptor per action")

    @property
    def d(self) -> int:
        return self._cost_cells.shape[0]

    @property
    def n(self) -> int:
        return self._cost_cells.shape[1]

    def cost_means(self) -> np.ndarray:
        return np.array([[cell.mean for cell in row] for row in self.costs])

    def reward_means(self) -> np.ndarray | None:
        if self.rewards is None:
            return None
        return np.array([cell.mean for cell in self.rewards])


class StochasticEnvironment(Environment):
    def __init__(self, spec: StochasticSpec, T: int):
        super().__init__()
        self.spec = spec
        self.d, self.n, self.T = spec.d, spec.n, T
        self.null_action = spec.null_action
        self.has_rewards = spec.rewards is not None
        self._ck, self._ca, self._cb = _compile_cells(spec._cost_cells)
        if spec._reward_cells is not None:
            self._rk, self._ra, self._rb = _compile_cells(spec._reward_cells)
        self.reset()

    def reset(self) -> None:
        super().reset()
        self._rng = np.random.default_rng(self.spec.seed)

    def _emit(self, t, past_plays):
        u = self._rng.random((self.d, self.n))
        costs = _transform(u, self._ck, self._ca, self._cb)
        rewards = None
        if self.has_rewards:
            ur = self._rng.random(self.n)
            rewards = _transform(ur, self._rk, self._ra, self._rb)
        return StepData(costs, rewards)


def stochastic_env(spec: StochasticSpec, T: int) -> StochasticEnvironment:
    """i.i.d. environment: step t emits an independent draw from the spec."""
    return StochasticEnvironment(spec, T)


# ---------------------------------------------------------------------------
# Phased-halving adversary
# ---------------------------------------------------------------------------


@dataclass
class PhasedHalvingSpec:
    """Hard instance with k = min(p, log2 d) phases of length L = floor(T/k).

    The d dimensions start active.  At the end of phase i a coin R_i retires
    either the top half (R_i = 0) or the bottom half (R_i = 1) of the active
    dimensions.  There are 2^k actions, action a read as a k-bit string
    (phase i uses bit i-1); in phase i action a puts unit load on the top or
    bottom half of the active dimensions according to that bit.  The action
    whose bits equal the coins loads exactly the dimensions about to retire,
    so it accumulates L on each dimension it ever touches.  Steps beyond k*L
    emit all-zero matrices.
    """

    d: int
    p: float
    T: int
    seed: int = 0

    def __post_init__(self):
        if self.d < 2 or self.d & (self.d - 1) != 0:
            raise InvalidInputError(f"d must be a power of two >= 2, got {self.d}")
        log2d = int(math.log2(self.d))
        self.k = int(min(self.p, log2d)) if self.p != INFINITY else log2d
        if self.k < 1:
            raise InvalidInputError("need at least one phase")
        self.L = self.T // self.k
        if self.L < 1:
            raise InvalidInputError(f"horizon {self.T} too short for {self.k} phases")
        rng = np.random.default_rng(self.seed)
        self.coins = rng.integers(0, 2, size=self.k)

    @property
    def n_actions(self) -> int:
        return 2 ** self.k

    def active_dims(self, phase: int) -> np.ndarray:
        """Dimensions still active during a 1-based phase."""
        dims = np.arange(self.d)
        for i in range(phase - 1):
            half = dims.shape[0] // 2
            dims = dims[half:] if self.coins[i] == 0 else dims[:half]
        return dims

    def loaded_dims(self, phase: int, bit: int) -> np.ndarray:
        dims = self.active_dims(phase)
        half = dims.shape[0] // 2
        return dims[:half] if bit == 0 else dims[half:]


def benchmark_action(spec: PhasedHalvingSpec) -> int:
    """Index of the action whose bits match the coins."""
    return int(sum(int(spec.coins[i]) << i for i in range(spec.k)))


def benchmark_load(spec: PhasedHalvingSpec) -> np.ndarray:
    """Cumulative load of the benchmark action: L on every dimension it loads."""
    load = np.zeros(spec.d)
    for i in range(1, spec.k + 1):
        load[spec.loaded_dims(i, int(spec.coins[i - 1]))] += spec.L
    return load


def phased_halving_opt(spec: PhasedHalvingSpec) -> float:
    """l_p norm of the benchmark action's total load (exactly L for p = INFINITY)."""
    return lp_norm(benchmark_load(spec), spec.p)


class PhasedHalvingEnvironment(Environment):
    def __init__(self, spec: PhasedHalvingSpec, with_rewards: bool = False):
        super().__init__()
        self.spec = spec
        self.d, self.T = spec.d, spec.T
        self.with_rewards = with_rewards
        self.has_rewards = with_rewards
        self.n = spec.n_actions + 1 if with_rewards else spec.n_actions
        self.null_action = spec.n_actions if with_rewards else None
        self._phase_matrices = [self._build_matrix(i) for i in range(1, spec.k + 1)]

    def _build_matrix(self, phase: int) -> np.ndarray:
        C = np.zeros((self.d, self.n))
        for a in range(self.spec.n_actions):
            bit = (a >> (phase - 1)) & 1
            C[self.spec.loaded_dims(phase, bit), a] = 1.0
        return C

    def _emit(self, t, past_plays):
        spec = self.spec
        rewards = None
        if t > spec.k * spec.L:
            costs = np.zeros((self.d, self.n))
            if self.with_rewards:
                rewards = np.zeros(self.n)
        else:
            phase = (t - 1) // spec.L + 1
            costs = self._phase_matrices[phase - 1]
            if self.with_rewards:
                rewards = np.ones(self.n)
                rewards[self.null_action] = 0.0
        return StepData(costs, rewards)


def phased_halving_env(spec: PhasedHalvingSpec) -> PhasedHalvingEnvironment:
    return PhasedHalvingEnvironment(spec, with_rewards=False)


def phased_halving_bwk_env(spec: PhasedHalvingSpec, B: float) -> PhasedHalvingEnvironment:
    """Budgeted variant: unit reward on every non-null action, plus a null column.

    ``B`` is carried by the caller's config; the emission itself does not
    depend on it.  Remainder steps beyond k*L give zero reward as well, which
    keeps the closed-form optimum intact.
    """
    if B <= 0:
        raise InvalidInputError("budget must be positive")
    return PhasedHalvingEnvironment(spec, with_rewards=True)


def phased_halving_bwk_opt(spec: PhasedHalvingSpec, B: float) -> float:
    """Closed-form optimal reward for the budgeted instance, l_inf budgets only.

    For B >= L the coin-matching action never exceeds the budget and collects
    k*L.  For B <= L/2 the budget binds inside a single phase and balanced
    play collects exactly 2B.  The window in between has no clean closed form.
    """
    if spec.p != INFINITY:
        raise InvalidInputError("closed form implemented for p = INFINITY only")
    if B >= spec.L:
        return float(spec.k * spec.L)
    if 2 * B <= spec.L:
        return float(2 * B)
    raise InvalidInputError(f"no closed form for budget {B} between L/2 and L (L={spec.L})")


# ---------------------------------------------------------------------------
# Greedy-trap instance
# ---------------------------------------------------------------------------


class GreedyTrapEnvironment(Environment):
    """Two actions: a safe one loading (1 - gap) everywhere, and a risky one
    loading a single uniformly random dimension (redrawn every step)."""

    def __init__(self, d: int, load_gap: float, T: int, seed: int = 0):
        super().__init__()
        if not 0.0 < load_gap < 0.5:
            raise InvalidInputError(f"load_gap must be in (0, 0.5), got {load_gap}")
        self.d, self.n, self.T = d, 2, T
        self.load_gap = load_gap
        self.seed = seed
        self.reset()

    def reset(self) -> None:
        super().reset()
        self._rng = np.random.default_rng(self.seed)

    def _emit(self, t, past_plays):
        C = np.zeros((self.d, 2))
        C[:, 0] = 1.0 - self.load_gap
        C[self._rng.integers(self.d), 1] = 1.0
        return StepData(C)


def greedy_trap_env(d: int, load_gap: float, T: int, seed: int = 0) -> GreedyTrapEnvironment:
    return GreedyTrapEnvironment(d, load_gap, T, seed)


# ---------------------------------------------------------------------------
# Trace recording and replay
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def write_trace(path, steps: list[StepData], d: int, n: int) -> None:
    """Write steps in the line-oriented trace format (shortest exact decimals)."""
    has_rewards = steps and steps[0].rewards is not None
    lines = [f"olvc-trace v1 d={d} n={n} T={len(steps)} rewards={1 if has_rewards else 0}"]
    for t, step in enumerate(steps, start=1):
        cols = []
        for i in range(n):
            col = ",".join(_fmt(step.costs[j, i]) for j in range(d))
            if has_rewards:
                col += ";" + _fmt(step.rewards[i])
            cols.append(col)
        lines.append(f"t={t} " + " ".join(cols))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trace(path) -> tuple[list[StepData], int, int]:
    """Parse a trace file; raises TraceParseError with the offending line number."""
    with open(path) as fh:
        raw = fh.read().splitlines()
    if not raw:
        raise TraceParseError("empty file", 1)
    header = raw[0].split()
    if len(header) != 6 or header[0] != "olvc-trace" or header[1] != "v1":
        raise TraceParseError(f"bad header {raw[0]!r}", 1)
    try:
        fields = dict(tok.split("=") for tok in header[2:])
        d, n, T = int(fields["d"]), int(fields["n"]), int(fields["T"])
        has_rewards = fields["rewards"] == "1"
    except (ValueError, KeyError) as exc:
        raise TraceParseError(f"bad header fields: {exc}", 1) from None
    steps = []
    for lineno, line in enumerate(raw[1:], start=2):
        if not line.strip():
            continue
        toks = line.split()
        if not toks[0].startswith("t="):
            raise TraceParseError("step line must start with t=<t>", lineno)
        if len(toks) != n + 1:
            raise TraceParseError(f"expected {n} action columns, got {len(toks) - 1}", lineno)
        costs = np.zeros((d, n))
        rewards = np.zeros(n) if has_rewards else None
        for i, tok in enumerate(toks[1:]):
            if has_rewards:
                if ";" not in tok:
                    raise TraceParseError("missing reward field", lineno)
                cost_part, reward_part = tok.rsplit(";", 1)
                try:
                    rewards[i] = float(reward_part)
                except ValueError:
                    raise TraceParseError(f"bad reward {reward_part!r}", lineno) from None
            else:
                cost_part = tok
            entries = cost_part.split(",")
            if len(entries) != d:
                raise TraceParseError(f"expected {d} cost entries, got {len(entries)}", lineno)
            try:
                costs[:, i] = [float(e) for e in entries]
            except ValueError:
                raise TraceParseError(f"bad cost entry in {tok!r}", lineno) from None
        steps.append(StepData(costs, rewards))
    if len(steps) != T:
        raise TraceParseError(f"header promised T={T} steps, found {len(steps)}", len(raw))
    return steps, d, n


class TraceEnvironment(Environment):
    def __init__(self, steps: list[StepData], d: int, n: int):
        super().__init__()
        self.steps = steps
        self.d, self.n, self.T = d, n, len(steps)
        self.has_rewards = bool(steps) and steps[0].rewards is not None

    def _emit(self, t, past_plays):
        return self.steps[t - 1]


def trace_env(path) -> TraceEnvironment:
    """Replay a recorded trace file."""
    steps, d, n = read_trace(path)
    return TraceEnvironment(steps, d, n)


def record_trace(env: Environment, T: int, path) -> None:
    """Materialize T steps of an environment into a trace file.

    Adaptive environments are recorded against the empty history; all the
    generators in this module ignore past plays, so the round-trip is exact.
    """
    env.reset()
    steps = [env.emit(t, ()) for t in range(1, T + 1)]
    write_trace(path, steps, env.d, env.n)
    env.reset()
