"""Finite-round certification of a win-probability gap.

p-values are upper binomial tails under the best classical win probability.
The required round count is the smallest m whose expected quantum win count
``ceil(m * omega_q)`` already has tail probability below alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from lctc.errors import UncertifiableError

DEFAULT_CAP = 10**9
SUMMATION_LIMIT = 10_000
# m * omega_q within this of an integer counts as that integer
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class CertificationQuery:
    omega_c: float
    omega_q: float
    alpha: float
    t_env: float

    def __post_init__(self):
        if not 0.0 < self.omega_c < self.omega_q <= 1.0:
            raise ValueError(
                f"need 0 < omega_c < omega_q <= 1, got {self.omega_c!r}, {self.omega_q!r}"
            )
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.t_env > 0.0:
            raise ValueError(f"t_env must be positive, got {self.t_env!r}")


@dataclass(frozen=True)
class ScoreBounds:
    u_min: float = 0.0
    u_max: float = 1.0

    def __post_init__(self):
        if not self.u_min < self.u_max:
            raise ValueError(f"need u_min < u_max, got {self.u_min!r}, {self.u_max!r}")


def expected_wins(m, omega_q):
    """``ceil(m * omega_q)`` with a small slack against rounding noise."""
    return np.ceil(np.asarray(m, dtype=float) * omega_q - _CEIL_SLACK).astype(np.int64)


def _log_tail_sum(v: int, m: int, w: float) -> float:
    k = np.arange(v, m + 1, dtype=float)
    log_terms = (
        special.gammaln(m + 1.0)
        - special.gammaln(k + 1.0)
        - special.gammaln(m - k + 1.0)
        + k * math.log(w)
        + (m - k) * math.log1p(-w)
    )
    return float(special.logsumexp(log_terms))


def _log_tail_beta(v: int, m: int, w: float) -> float:
    p = float(special.betainc(v, m - v + 1, w))
    if p > 0.0:
        return math.log(p)
    # Deep tail: betainc underflowed. Sum terms from v upward; past the mean
    # they decay geometrically, so a short window holds all the mass.
    width = int(min(m - v, 200 + 50 * math.sqrt(m)))
    return _log_tail_sum_window(v, v + width, m, w)


def _log_tail_sum_window(k_lo: int, k_hi: int, m: int, w: float) -> float:
    k = np.arange(k_lo, k_hi + 1, dtype=float)
    log_terms = (
        special.gammaln(m + 1.0)
        - special.gammaln(k + 1.0)
        - special.gammaln(m - k + 1.0)
        + k * math.log(w)
        + (m - k) * math.log1p(-w)
    )
    return float(special.logsumexp(log_terms))


def log_binomial_pvalue(v: int, m: int, omega_c: float) -> float:
    """Natural log of ``sum_{k>=v} C(m,k) w^k (1-w)^(m-k)``."""
    if m < 0 or v > m:
        raise ValueError(f"need 0 <= v <= m, got v={v}, m={m}")
    if v <= 0:
        return 0.0
    if omega_c <= 0.0:
        return -math.inf
    if omega_c >= 1.0:
        return 0.0
    if m <= SUMMATION_LIMIT:
        return min(0.0, _log_tail_sum(v, m, omega_c))
    return min(0.0, _log_tail_beta(v, m, omega_c))


def binomial_pvalue(v: int, m: int, omega_c: float) -> float:
    return math.exp(log_binomial_pvalue(v, m, omega_c))


def _tail_array(v: np.ndarray, m: np.ndarray, w: float) -> np.ndarray:
    """Vectorized upper tail for scanning; agrees with binomial_pvalue to ~1e-14."""
    v = np.asarray(v)
    m = np.asarray(m)
    out = np.ones(np.broadcast(v, m).shape)
    mask = v > 0
    if np.any(mask):
        vv = np.broadcast_to(v, out.shape)[mask].astype(float)
        mm = np.broadcast_to(m, out.shape)[mask].astype(float)
        out[mask] = special.betainc(vv, mm - vv + 1.0, w)
    return np.clip(out, 0.0, 1.0)


def _first_below(pvalue_fn, alpha: float, cap: int, exact_fn) -> int:
    """Smallest m in [1, cap] with pvalue_fn(m) < alpha.

    The condition is not monotone in m, so bisection is unsafe. An
    exponential bracket finds some certifying m, then an exhaustive scan of
    [1, bracket] finds the first one.
    """
    hi = 1
    while True:
        if pvalue_fn(np.array([hi]))[0] < alpha:
            break
        if hi >= cap:
            raise UncertifiableError(f"no certifying round count up to cap={cap}")
        hi = min(2 * hi, cap)

    block = 1 << 16
    start = 1
    while start <= hi:
        ms = np.arange(start, min(start + block, hi + 1), dtype=np.int64)
        p = pvalue_fn(ms)
        # re-check razor-edge comparisons with the scalar route
        near = np.abs(p - alpha) <= 1e-9 * alpha
        for i in np.flatnonzero(near):
            p[i] = exact_fn(int(ms[i]))
        hits = np.flatnonzero(p < alpha)
        if hits.size:
            return int(ms[hits[0]])
        start += block
    # bracket point passed with the vector route but not the scalar one
    return hi


def certifies_within(omega_c: float, omega_q: float, alpha: float, m_max: int) -> bool:
    """True when n_required(omega_c, omega_q, alpha) <= m_max, by exhaustive scan."""
    if not omega_q > omega_c or m_max < 1:
        return False
    ms = np.arange(1, int(m_max) + 1, dtype=np.int64)
    v = expected_wins(ms, omega_q)
    p = _tail_array(v, ms, omega_c)
    near = np.abs(p - alpha) <= 1e-9 * alpha
    for i in np.flatnonzero(near):
        p[i] = binomial_pvalue(int(v[i]), int(ms[i]), omega_c)
    return bool(np.any(p < alpha))


def n_required(omega_c: float, omega_q: float, alpha: float, cap: int = DEFAULT_CAP) -> int:
    if not omega_q > omega_c:
        raise UncertifiableError(f"no gap: omega_q={omega_q!r} <= omega_c={omega_c!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")

    def pv(ms):
        return _tail_array(expected_wins(ms, omega_q), ms, omega_c)

    def exact(m):
        return binomial_pvalue(int(expected_wins(m, omega_q)), m, omega_c)

    return _first_below(pv, alpha, cap, exact)


def rate_required(q: CertificationQuery, cap: int = DEFAULT_CAP) -> float:
    return n_required(q.omega_c, q.omega_q, q.alpha, cap=cap) / q.t_env


def _log_tail_array(v, m, w: float) -> np.ndarray:
    v = np.minimum(v, m).astype(np.int64)
    m = m.astype(np.int64)
    with np.errstate(divide="ignore"):
        out = np.log(_tail_array(v, m, w))
    shape = np.shape(out)
    out = np.array(out, dtype=float, ndmin=1)
    v, m = np.broadcast_to(v, out.shape), np.broadcast_to(m, out.shape)
    # deep tails underflow in the vector route; redo those in log space
    bad = ~np.isfinite(out)
    if np.any(bad):
        for i in zip(*np.nonzero(bad)):
            out[i] = log_binomial_pvalue(int(v[i]), int(m[i]), w)
    return out.reshape(shape)


def _log_score_bound(c, m, omega_c: float, b: ScoreBounds):
    span = b.u_max - b.u_min
    xi = (omega_c - b.u_min) / span
    if not 0.0 < xi < 1.0:
        raise ValueError(f"classical value maps outside (0, 1): xi={xi!r}")
    c = np.asarray(c, dtype=float)
    m = np.asarray(m, dtype=float)
    mu = (c - m * b.u_min) / span
    lo = np.floor(mu + 1e-12)
    hi = np.ceil(mu - 1e-12)
    frac = np.clip(mu - lo, 0.0, 1.0)
    log_lo = _log_tail_array(lo, m, xi)
    log_hi = _log_tail_array(hi, m, xi)
    with np.errstate(invalid="ignore"):
        total = 1.0 + np.where(frac < 1.0, (1.0 - frac) * log_lo, 0.0) + np.where(
            frac > 0.0, frac * log_hi, 0.0
        )
    return np.minimum(total, 0.0)


def score_pvalue_bound(c: float, m: int, omega_c: float, b: ScoreBounds) -> float:
    """Upper bound on the classical probability of a total score >= c.

    Geometric interpolation between the binomial tails at floor and ceil of
    the rescaled score, times e; clamped to 1.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    if not b.u_min - 1e-12 <= c / m <= b.u_max + 1e-12:
        raise ValueError(f"average score {c / m!r} outside [{b.u_min}, {b.u_max}]")
    if m <= SUMMATION_LIMIT:
        # log-space summation route for small m
        span = b.u_max - b.u_min
        xi = (omega_c - b.u_min) / span
        if not 0.0 < xi < 1.0:
            raise ValueError(f"classical value maps outside (0, 1): xi={xi!r}")
        mu = (c - m * b.u_min) / span
        lo = math.floor(mu + 1e-12)
        hi = math.ceil(mu - 1e-12)
        frac = min(max(mu - lo, 0.0), 1.0)
        total = 1.0
        if frac < 1.0:
            total += (1.0 - frac) * log_binomial_pvalue(min(lo, m), m, xi)
        if frac > 0.0:
            total += frac * log_binomial_pvalue(min(hi, m), m, xi)
        return math.exp(min(total, 0.0))
    return float(np.exp(_log_score_bound(c, m, omega_c, b)))


def n_required_general(
    omega_c: float, omega_q: float, alpha: float, b: ScoreBounds, cap: int = DEFAULT_CAP
) -> int:
    if not omega_q > omega_c:
        raise UncertifiableError(f"no gap: omega_q={omega_q!r} <= omega_c={omega_c!r}")
    if not b.u_min <= omega_q <= b.u_max:
        raise ValueError("omega_q must lie within the score bounds")

    def pv(ms):
        c = expected_wins(ms, omega_q).astype(float)
        # integer scores above m * u_max are unreachable; clip to the bound
        c = np.minimum(c, ms * b.u_max)
        return np.exp(_log_score_bound(c, ms, omega_c, b))

    def exact(m):
        c = min(float(expected_wins(m, omega_q)), m * b.u_max)
        return score_pvalue_bound(c, m, omega_c, b)

    return _first_below(pv, alpha, cap, exact)
