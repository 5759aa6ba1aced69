"""Three-party XOR game with a softened majority-vote utility.

Inputs are indexed as ``x = 4*x1 + 2*x2 + x3``. The quantum strategy uses a
GHZ state with equatorial measurements, so every correlator has the form
``cos(phi0 + phi . x)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from lctc import certify
from lctc.simulate import TrialLog

BITS = np.array(list(itertools.product((0, 1), repeat=3)), dtype=float)  # (8, 3)
WEIGHT = BITS.sum(axis=1).astype(int)
MAJORITY = (WEIGHT >= 2).astype(int)
_LATTICE = np.array(list(itertools.product(np.arange(4) * math.pi / 2, repeat=3)))


@dataclass(frozen=True, eq=False)
class MultiInputDistribution:
    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(8)
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def uniform(cls) -> MultiInputDistribution:
        return cls(np.full(8, 0.125))

    @classmethod
    def bernoulli(cls, p: float) -> MultiInputDistribution:
        return cls(p**WEIGHT * (1.0 - p) ** (3 - WEIGHT))


@dataclass(frozen=True, eq=False)
class ThreePartyGame:
    m: np.ndarray
    beta: float = 0.0

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(8)
        if not np.all(np.isfinite(m)):
            raise ValueError("game weights must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)


@dataclass(frozen=True)
class GhzAngles:
    phi0: float
    phi1: float
    phi2: float
    phi3: float

    def phases(self) -> np.ndarray:
        """Correlator phase ``phi0 + phi . x`` for each of the 8 inputs."""
        return self.phi0 + BITS @ np.array([self.phi1, self.phi2, self.phi3])


@dataclass(frozen=True)
class GhzNoise:
    eps_ghz: float = 0.0
    eps_meas: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eps_ghz <= 7.0 / 8.0:
            raise ValueError(f"eps_ghz must lie in [0, 7/8], got {self.eps_ghz!r}")
        if not 0.0 <= self.eps_meas <= 0.5:
            raise ValueError(f"eps_meas must lie in [0, 1/2], got {self.eps_meas!r}")


def majority_utility(beta: float) -> np.ndarray:
    """Utility table ``u[o, x]`` over output parity o."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta!r}")
    u = np.empty((2, 8))
    u[0] = 1.0 - MAJORITY
    u[1] = MAJORITY
    soft = (WEIGHT % 3) != 0
    u[:, soft] = (1.0 - beta) * u[:, soft] + beta * (1.0 - u[:, soft])
    return u


def build_three_party(P: MultiInputDistribution, beta: float) -> ThreePartyGame:
    u = majority_utility(beta)
    return ThreePartyGame(P.p * (u[0] - u[1]), beta)


def _strategy_tables():
    tables, signs = [], []
    for flat in itertools.product((0, 1), repeat=6):
        table = (flat[0:2], flat[2:4], flat[4:6])
        parity = [table[0][b[0]] ^ table[1][b[1]] ^ table[2][b[2]] for b in BITS.astype(int)]
        tables.append(table)
        signs.append([1 - 2 * v for v in parity])
    return tuple(tables), np.array(signs, dtype=float)


_TABLES, _SIGNS = _strategy_tables()  # 64 tables, (64, 8) parity signs


def classical_strategy_three(g: ThreePartyGame) -> tuple[float, tuple]:
    """Best of the 64 deterministic strategies.

    The table lists ``(a_i(0), a_i(1))`` per party; ties go to the first
    in enumeration order.
    """
    values = _SIGNS @ g.m
    k = int(np.argmax(values))
    return float(values[k]), _TABLES[k]


def classical_value_three(g: ThreePartyGame) -> float:
    return classical_strategy_three(g)[0]


def _abs_s(m: np.ndarray, phis: np.ndarray):
    """|S| and its gradient for a batch of (phi1, phi2, phi3) rows."""
    z = m * np.exp(1j * phis @ BITS.T)  # (n, 8)
    s = z.sum(axis=1)
    ds = 1j * z @ BITS  # (n, 3)
    mag = np.abs(s)
    with np.errstate(invalid="ignore", divide="ignore"):
        grad = np.where(mag[:, None] > 0, np.real(np.conj(s)[:, None] * ds) / mag[:, None], 0.0)
    return mag, grad, s


def quantum_strategy_three(g: ThreePartyGame, iterations: int = 150) -> tuple[float, GhzAngles]:
    """Maximize ``sum_x M_x cos(phi0 + phi . x)``.

    For fixed (phi1, phi2, phi3) the best phi0 is ``-arg S`` with
    ``S = sum_x M_x exp(i phi . x)``, leaving ``max |S|``. That is found by
    batched gradient ascent from 64 lattice starts and a BFGS polish
    of the best one.
    """
    m = g.m
    weight = float(np.abs(m).sum())
    if weight == 0.0:
        return 0.0, GhzAngles(0.0, 0.0, 0.0, 0.0)
    phis = _LATTICE.copy()
    # curvature of |S| along any unit direction is at most 3 * weight
    step = 1.0 / (3.0 * weight)
    for _ in range(iterations):
        _, grad, _ = _abs_s(m, phis)
        if np.max(np.abs(grad)) < 1e-9 * weight:
            break
        phis += step * grad
    mag, _, _ = _abs_s(m, phis)
    # max, then lexicographic tie-break on the wrapped angles
    wrapped = np.mod(phis, 2 * math.pi)
    order = np.lexsort((wrapped[:, 2], wrapped[:, 1], wrapped[:, 0], -np.round(mag, 12)))
    start = phis[order[0]]

    res = optimize.minimize(
        lambda v: -_abs_s(m, v[None, :])[0][0],
        start,
        jac=lambda v: -_abs_s(m, v[None, :])[1][0],
        method="BFGS",
        options={"gtol": 1e-13},
    )
    best = res.x if -res.fun >= mag[order[0]] else start
    value, _, s = _abs_s(m, best[None, :])
    phi0 = -float(np.angle(s[0]))
    angles = GhzAngles(*(math.remainder(v, 2 * math.pi) for v in (phi0, *best)))
    return float(value[0]), angles


def quantum_value_three(g: ThreePartyGame) -> float:
    return quantum_strategy_three(g)[0]


def ghz_combined_infidelity(n: GhzNoise) -> float:
    return 1.0 - (1.0 - 8.0 * n.eps_ghz / 7.0) * (1.0 - 2.0 * n.eps_meas) ** 3


@dataclass(frozen=True)
class ThreePartyReport:
    classical: float
    quantum: float
    omega_c: float
    omega_q: float
    gap: float
    eps_th: float | None
    angles: GhzAngles
    table: tuple


def analyze_three(g: ThreePartyGame) -> ThreePartyReport:
    c, table = classical_strategy_three(g)
    q, angles = quantum_strategy_three(g)
    eps_th = max(0.0, 1.0 - c / q) if q > 1e-15 else None
    return ThreePartyReport(
        classical=c,
        quantum=q,
        omega_c=(1.0 + c) / 2.0,
        omega_q=(1.0 + q) / 2.0,
        gap=(q - c) / 2.0,
        eps_th=eps_th,
        angles=angles,
        table=table,
    )


def ghz_threshold(g: ThreePartyGame, eps_prime: float, report: ThreePartyReport | None = None):
    """Advantage flag and margin ``gap(eps') = gap(0) - eps' (omega_q(0) - 1/2)``."""
    r = report if report is not None else analyze_three(g)
    margin = r.gap - eps_prime * (r.omega_q - 0.5)
    return margin > 0.0, margin


def ghz_eps_threshold(g: ThreePartyGame) -> float:
    r = analyze_three(g)
    if r.omega_q <= 0.5:
        raise ValueError("threshold needs omega_q(0) > 1/2")
    return r.gap / (r.omega_q - 0.5)


def behavior_three(eps_prime: float, a: GhzAngles) -> np.ndarray:
    """``p[x, a1, a2, a3]``: parity biased by the correlator, uniform within parity."""
    corr = (1.0 - eps_prime) * np.cos(a.phases())
    p = np.empty((8, 2, 2, 2))
    for a1, a2, a3 in itertools.product((0, 1), repeat=3):
        sign = -1.0 if (a1 ^ a2 ^ a3) else 1.0
        p[:, a1, a2, a3] = (1.0 + sign * corr) / 8.0
    return p


def ghz_density_behavior(n: GhzNoise, a: GhzAngles) -> np.ndarray:
    """Same table from the noisy 8x8 GHZ state and flipped equatorial POVMs.

    Party 1 carries phi0 in its base angle; parties 2 and 3 start at 0.
    """
    ghz = np.zeros(8, dtype=complex)
    ghz[0] = ghz[7] = 1 / math.sqrt(2)
    rho = (1 - 8 * n.eps_ghz / 7) * np.outer(ghz, ghz.conj()) + n.eps_ghz / 7 * np.eye(8)
    contrast = 1.0 - 2.0 * n.eps_meas
    base = (a.phi0, 0.0, 0.0)
    slopes = (a.phi1, a.phi2, a.phi3)

    def povm(angle, out):
        sigma = np.array([[0, np.exp(-1j * angle)], [np.exp(1j * angle), 0]])
        return 0.5 * (np.eye(2) + (-1) ** out * contrast * sigma)

    p = np.empty((8, 2, 2, 2))
    for xi, bits in enumerate(BITS.astype(int)):
        for outs in itertools.product((0, 1), repeat=3):
            op = np.array([[1.0]])
            for i in range(3):
                op = np.kron(op, povm(base[i] + slopes[i] * bits[i], outs[i]))
            p[(xi, *outs)] = float(np.real(np.trace(rho @ op)))
    return p


def simulate_rounds_three(
    P: MultiInputDistribution, beta: float, behavior: np.ndarray, rounds: int, seed: int,
    omega_c: float | None = None,
) -> TrialLog:
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    u = majority_utility(beta)
    input_ss, output_ss, win_ss = np.random.SeedSequence(seed).spawn(3)
    cum_in = np.cumsum(P.p)
    cum_in[-1] = 1.0
    x = np.searchsorted(cum_in, np.random.default_rng(input_ss).random(rounds), side="right")
    cum_out = np.cumsum(np.asarray(behavior).reshape(8, 8), axis=1)
    cum_out[:, -1] = 1.0
    r = np.random.default_rng(output_ss).random(rounds)
    out = (r[:, None] >= cum_out[x]).sum(axis=1)
    parity = (out >> 2) ^ ((out >> 1) & 1) ^ (out & 1)
    scores = u[parity, x]
    total = float(scores.sum())
    wins = int(np.count_nonzero(np.random.default_rng(win_ss).random(rounds) < scores))
    if omega_c is None:
        omega_c = (1.0 + classical_value_three(build_three_party(P, beta))) / 2.0
    return TrialLog(
        rounds=rounds,
        total_score=total,
        wins=wins,
        empirical_omega=total / rounds,
        pvalue=certify.binomial_pvalue(wins, rounds, omega_c),
        seed=seed,
    )
