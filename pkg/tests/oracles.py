"""Independent reference implementations used to freeze derived values.

These avoid the package's own code paths: exact rational binomial tails,
brute-force strategy search over explicit qubit operators, and direct
state-vector evaluation.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import optimize


def exact_tail(v: int, m: int, w: Fraction) -> Fraction:
    """P(X >= v) for X ~ Binomial(m, w), exactly."""
    return sum(
        (Fraction(math.comb(m, k)) * w**k * (1 - w) ** (m - k) for k in range(max(v, 0), m + 1)),
        Fraction(0),
    )


def exact_n_required(omega_c, omega_q, alpha, limit=10_000):
    """Smallest m with P(X >= ceil(m omega_q) | omega_c) < alpha, by linear scan."""
    w = Fraction(omega_c).limit_denominator(10**12)
    a = Fraction(alpha).limit_denominator(10**12)
    for m in range(1, limit + 1):
        v = math.ceil(m * omega_q - 1e-9)
        if exact_tail(v, m, w) < a:
            return m
    return None


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_SINGLET = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2)


def _obs(angle):
    return math.cos(angle) * _Z + math.sin(angle) * _X


def xor_bias_state_search(m, restarts=40, seed=0) -> float:
    """max sum M_xy <psi| A_x (x) B_y |psi> over planar observables on the singlet."""
    m = np.asarray(m, dtype=float)

    def neg(v):
        a = [_obs(v[0]), _obs(v[1])]
        b = [_obs(v[2]), _obs(v[3])]
        total = 0.0
        for x, y in itertools.product((0, 1), repeat=2):
            total += m[x, y] * np.real(_SINGLET.conj() @ np.kron(a[x], b[y]) @ _SINGLET)
        return -total

    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(restarts):
        res = optimize.minimize(neg, rng.uniform(0, 2 * math.pi, 4), method="BFGS")
        best = max(best, -res.fun)
    return best


def xor_classical_brute(m) -> float:
    m = np.asarray(m, dtype=float)
    return max(
        sum(m[x, y] * s[x] * s[2 + y] for x, y in itertools.product((0, 1), repeat=2))
        for s in itertools.product((-1, 1), repeat=4)
    )


def ghz_bias_state_search(m, restarts=30, seed=0) -> float:
    """max sum_x M_x <GHZ| A1 A2 A3 |GHZ> over equatorial qubit observables."""
    m = np.asarray(m, dtype=float)
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / math.sqrt(2)
    bits = list(itertools.product((0, 1), repeat=3))

    def eq(phi):
        return np.array([[0, np.exp(-1j * phi)], [np.exp(1j * phi), 0]])

    def neg(v):
        total = 0.0
        for k, (b1, b2, b3) in enumerate(bits):
            op = np.kron(np.kron(eq(v[b1]), eq(v[2 + b2])), eq(v[4 + b3]))
            total += m[k] * np.real(ghz.conj() @ op @ ghz)
        return -total

    rng = np.random.default_rng(seed)
    best = -math.inf
    for _ in range(restarts):
        res = optimize.minimize(neg, rng.uniform(0, 2 * math.pi, 6), method="BFGS")
        best = max(best, -res.fun)
    return best
