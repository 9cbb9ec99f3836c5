"""Smooth approximations of l_p norms and their gradients.

Everything here is a pure function of its inputs.  The two central objects
are the smoothed norm

    smooth_norm(params, load) = (p/eps) * (||1 + eps*load/p||_p - 1)

which upper-bounds ||load||_p within an additive term (p/eps)*(||1||_p - 1),
and its composite cousin smooth_composite_norm for the nested norm
||(x_0, ||y||_p)||_r used when a dummy budget coordinate rides along.

``p`` (and the outer exponent ``r``) may be the value ``INFINITY``, in which
case the smoothed norm becomes the classic log-sum-exp softmax potential.
All power computations are routed through exp/log with max-factoring so that
large exponents and loads of order 1e5 do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, UnsupportedOperationError

INFINITY = math.inf


def _logsumexp(u: np.ndarray) -> float:
    # 1-d only; scipy's version dominates the per-step profile
    m = u.max()
    if not np.isfinite(m):
        return float(m)
    return float(m + math.log(np.exp(u - m).sum()))


def _check_exponent(p: float, name: str = "p", integer: bool = False) -> float:
    if p == INFINITY:
        return p
    if not np.isfinite(p) or p < 1:
        raise InvalidInputError(f"{name} must be >= 1 or INFINITY, got {p}")
    if integer and int(p) != p:
        raise InvalidInputError(f"{name} must be an integer or INFINITY, got {p}")
    return float(p)


def dual_exponent(p: float) -> float:
    """Holder conjugate q with 1/p + 1/q = 1 (q=inf for p=1, q=1 for p=inf)."""
    if p == INFINITY:
        return 1.0
    if p == 1:
        return INFINITY
    return p / (p - 1.0)


def ones_norm(p: float, d: int) -> float:
    """||1_d||_p = d^(1/p); equals 1 for p = INFINITY."""
    if p == INFINITY:
        return 1.0
    return float(d) ** (1.0 / p)


def unit_gap(p: float, d: int) -> float:
    """p * (||1_d||_p - 1), taken in the limit ln(d) for p = INFINITY.

    This is the scale of the additive smoothing overhead: the smoothed norm
    at zero load equals unit_gap(p, d) / eps.
    """
    if p == INFINITY:
        return math.log(d)
    return p * (float(d) ** (1.0 / p) - 1.0)


@dataclass(frozen=True)
class NormParams:
    """Exponent, dimension and smoothing parameter of a smoothed l_p norm.

    Attributes:
        p: norm exponent, integer >= 1 or INFINITY.
        d: number of load dimensions, >= 1.
        epsilon: smoothing parameter in (0, 1].
    """

    p: float
    d: int
    epsilon: float

    def __post_init__(self):
        _check_exponent(self.p, integer=True)
        if self.d < 1:
            raise InvalidInputError(f"d must be >= 1, got {self.d}")
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def q(self) -> float:
        return dual_exponent(self.p)

    @property
    def ones_norm(self) -> float:
        return ones_norm(self.p, self.d)

    @property
    def unit_gap(self) -> float:
        return unit_gap(self.p, self.d)

    @property
    def additive_overhead(self) -> float:
        """Value of the smoothed norm at zero load, (p/eps)(||1||_p - 1)."""
        return self.unit_gap / self.epsilon


@dataclass(frozen=True)
class PrNormParams:
    """Parameters of the composite (p, r) smoothed norm on d+1 coordinates.

    Coordinate 0 is the dummy coordinate, coordinates 1..d the real ones.
    The internal smoothing step is delta = epsilon / (p + r).
    """

    p: float
    r: int
    d: int
    epsilon: float

    def __post_init__(self):
        _check_exponent(self.p, integer=True)
        _check_exponent(self.r, "r", integer=True)
        if self.p == INFINITY or self.r == INFINITY:
            raise InvalidInputError("the composite smoothed norm needs finite p and r")
        if self.d < 1:
            raise InvalidInputError(f"d must be >= 1, got {self.d}")
        if not (self.epsilon > 0.0 and np.isfinite(self.epsilon)):
            raise InvalidInputError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def delta(self) -> float:
        return self.epsilon / (self.p + self.r)

    @property
    def q(self) -> float:
        return dual_exponent(self.p)

    @property
    def s(self) -> float:
        return dual_exponent(self.r)

    @property
    def inner_ones_norm(self) -> float:
        """||1_d||_p over the real coordinates only."""
        return ones_norm(self.p, self.d)

    @property
    def additive_overhead(self) -> float:
        """Upper bound on the smoothed value at zero load, (p+r)/eps * ||1_d||_p."""
        return (self.p + self.r) / self.epsilon * self.inner_ones_norm


def _as_load(v, d: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise InvalidInputError(f"expected a 1-d vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("load vector has non-finite entries")
    if np.any(arr < 0):
        raise InvalidInputError("load vector has negative entries")
    if d is not None and arr.shape[0] != d:
        raise InvalidInputError(f"dimension mismatch: expected {d}, got {arr.shape[0]}")
    return arr


def lp_norm(v, p: float) -> float:
    """l_p norm of a nonnegative vector; p = INFINITY gives the max.

    The max entry is factored out before exponentiation so that large p and
    large entries never overflow.
    """
    arr = _as_load(v)
    _check_exponent(p)
    if arr.size == 0:
        return 0.0
    m = float(arr.max())
    if p == INFINITY or m == 0.0:
        return m
    if p == 1:
        return float(arr.sum())
    # m * (sum (v/m)^p)^(1/p), in log space
    with np.errstate(divide="ignore"):
        logs = p * np.log(arr / m, out=np.full_like(arr, -np.inf), where=arr > 0)
    return m * math.exp(_logsumexp(logs) / p)


def composite_norm(v, p: float, r: float) -> float:
    """Nested norm ||(v_0, ||(v_1..v_d)||_p)||_r on a (d+1)-vector.

    Supports r = INFINITY, where it reduces to max(v_0, ||y||_p).
    """
    arr = _as_load(v)
    if arr.shape[0] < 2:
        raise InvalidInputError("composite norm needs at least 2 entries (dummy + 1)")
    inner = lp_norm(arr[1:], p)
    return lp_norm(np.array([arr[0], inner]), r)


# ---------------------------------------------------------------------------
# Smoothed l_p norm
# ---------------------------------------------------------------------------


def smooth_norm(params: NormParams, load) -> float:
    """Smooth upper proxy for ||load||_p.

    Finite p:    (p/eps) * (||1 + eps*load/p||_p - 1)
    p = INFINITY: (1/eps) * ln(sum_j exp(eps*load_j)), evaluated stably.
    """
    arr = _as_load(load, params.d)
    eps = params.epsilon
    if params.p == INFINITY:
        m = float(arr.max())
        return m + math.log(np.exp(eps * (arr - m)).sum()) / eps
    p = params.p
    u = np.log1p(eps * arr / p)
    s = _logsumexp(p * u) / p  # log ||1 + eps*load/p||_p
    return (p / eps) * math.expm1(s)


def smooth_norm_gradient(params: NormParams, load) -> np.ndarray:
    """Gradient of smooth_norm; every component lies in (0, 1].

    Finite p: component j is (1 + eps*load_j/p)^(p-1) * S^(-1/q) with
    S = sum_j (1 + eps*load_j/p)^p.  For p = INFINITY this is the softmax
    of eps*load.
    """
    arr = _as_load(load, params.d)
    eps = params.epsilon
    if params.p == INFINITY:
        z = eps * arr
        z -= z.max()
        e = np.exp(z)
        return e / e.sum()
    p = params.p
    u = np.log1p(eps * arr / p)
    s = _logsumexp(p * u) / p
    # (p-1)*(u_j - s) <= 0, so components never exceed 1 and never underflow to 0
    # for the loads this library produces.
    return np.exp((p - 1.0) * (u - s))


def power_sum(params: NormParams, load) -> float:
    """The inner power sum sum_j (1 + eps*load_j/p)^p; finite p only."""
    if params.p == INFINITY:
        raise UnsupportedOperationError("power_sum is undefined for p = INFINITY")
    arr = _as_load(load, params.d)
    u = np.log1p(params.epsilon * arr / params.p)
    return float(np.exp(params.p * u).sum())


# ---------------------------------------------------------------------------
# Smoothed composite (p, r) norm with a dummy coordinate
# ---------------------------------------------------------------------------


def _composite_logs(pr: PrNormParams, arr: np.ndarray):
    """log(1+delta*x0), log||1+delta*y||_p and log of the outer power sum."""
    delta = pr.delta
    log_head = math.log1p(delta * arr[0])
    u = np.log1p(delta * arr[1:])
    log_inner = _logsumexp(pr.p * u) / pr.p
    log_outer = _logsumexp(np.array([pr.r * log_head, pr.r * log_inner]))
    return log_head, u, log_inner, log_outer


def smooth_composite_norm(pr: PrNormParams, load) -> float:
    """Smooth proxy for the composite norm of a (d+1)-dim load.

    (1/delta) * [((1 + delta*x_0)^r + ||1_d + delta*y||_p^r)^(1/r) - 1]
    with delta = eps/(p+r).  Inner powers are evaluated in log space so that
    large r stays stable.
    """
    arr = _as_load(load, pr.d + 1)
    _, _, _, log_outer = _composite_logs(pr, arr)
    return math.expm1(log_outer / pr.r) / pr.delta


def smooth_composite_norm_gradient(pr: PrNormParams, load) -> np.ndarray:
    """Gradient of smooth_composite_norm; all components are positive.

    d/dx_0 = (1 + delta*x_0)^(r-1) / S^(1-1/r)
    d/dy_i = P^(r/p - 1) * (1 + delta*y_i)^(p-1) / S^(1-1/r)

    with P = ||1_d + delta*y||_p^p and S the outer power sum.  The dual
    composite norm of the result never exceeds 1.
    """
    arr = _as_load(load, pr.d + 1)
    log_head, u, log_inner, log_outer = _composite_logs(pr, arr)
    r, p = pr.r, pr.p
    out_scale = (1.0 - 1.0 / r) * log_outer
    g = np.empty(pr.d + 1)
    g[0] = math.exp((r - 1.0) * log_head - out_scale)
    # log P = p * log_inner
    g[1:] = np.exp((r / p - 1.0) * p * log_inner + (p - 1.0) * u - out_scale)
    return g
