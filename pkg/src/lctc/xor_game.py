"""Bipartite binary XOR games.

A game is reduced to its 2x2 weight matrix ``M[x, y]``; every strategy is
then scored by ``sum(M * E)`` where ``E[x, y]`` is the parity correlator.
The builders own all sign bookkeeping, so ``M`` always follows the
convention ``M[x, y] = P(x, y) * (u(0|x,y) - u(1|x,y))``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from lctc.errors import DegenerateGameError

GRID_POINTS = 4096
_ZERO = 1e-15


@dataclass(frozen=True)
class InputDistribution:
    """Joint distribution P(x, y) over two binary inputs."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        probs = self.as_array()
        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError(f"probabilities must lie in [0, 1], got {probs.ravel()}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {probs.sum()!r}")

    def as_array(self) -> np.ndarray:
        return np.array([[self.p00, self.p01], [self.p10, self.p11]], dtype=float)

    @classmethod
    def from_array(cls, probs) -> InputDistribution:
        probs = np.asarray(probs, dtype=float).reshape(2, 2)
        return cls(*(float(v) for v in probs.ravel()))

    @classmethod
    def uniform(cls) -> InputDistribution:
        return cls(0.25, 0.25, 0.25, 0.25)

    @classmethod
    def bernoulli(cls, p: float) -> InputDistribution:
        """Independent inputs with P(x=1) = P(y=1) = p."""
        q = 1.0 - p
        return cls(q * q, q * p, p * q, p * p)

    @classmethod
    def correlated(cls, p11: float) -> InputDistribution:
        """P(1,1) = 2 P(0,1) = 2 P(1,0) = p11; requires p11 <= 1/2."""
        return cls(1.0 - 2.0 * p11, p11 / 2, p11 / 2, p11)


@dataclass(frozen=True)
class UtilityWeights:
    """Mismatch penalties of the load-balancing utility."""

    beta1: float = 0.0
    beta2: float = 0.0

    def __post_init__(self):
        for name in ("beta1", "beta2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True, eq=False)
class GameMatrix:
    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=float).reshape(2, 2)
        if not np.all(np.isfinite(m)):
            raise ValueError("game matrix entries must be finite")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    def __eq__(self, other):
        return isinstance(other, GameMatrix) and np.array_equal(self.m, other.m)

    def __hash__(self):
        return hash(self.m.tobytes())

    def scaled(self, c: float) -> GameMatrix:
        return GameMatrix(c * self.m)


@dataclass(frozen=True)
class MeasurementAngles:
    """Planar measurement axes.

    Alice measures along angle 0 for x=0 and ``theta`` for x=1; Bob measures
    along ``phi0`` and ``phi1``.
    """

    theta: float
    phi0: float
    phi1: float

    def alice(self) -> np.ndarray:
        return np.array([[1.0, 0.0], [math.cos(self.theta), math.sin(self.theta)]])

    def bob(self) -> np.ndarray:
        return np.array(
            [[math.cos(self.phi0), math.sin(self.phi0)], [math.cos(self.phi1), math.sin(self.phi1)]]
        )

    def overlaps(self) -> np.ndarray:
        """Inner products ``a_x . b_y`` as a 2x2 array."""
        return self.alice() @ self.bob().T


@dataclass(frozen=True)
class NoiseModel:
    """Werner-state infidelity plus symmetric measurement flip probability."""

    eps_s: float = 0.0
    eps_meas: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eps_s <= 0.75:
            raise ValueError(f"eps_s must lie in [0, 3/4], got {self.eps_s!r}")
        if not 0.0 <= self.eps_meas <= 0.5:
            raise ValueError(f"eps_meas must lie in [0, 1/2], got {self.eps_meas!r}")


# Utility tables are arrays u[o, x, y] over the output parity o = a xor b.


def chsh_utility() -> np.ndarray:
    u = np.zeros((2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        u[x * y, x, y] = 1.0
    return u


def load_balancing_utility(w: UtilityWeights) -> np.ndarray:
    """Generalized XOR utility with asymmetric mismatch penalties.

    The preferred parity is ``o = x*y``; on mixed inputs the non-preferred
    parity earns ``beta1`` (for x=0) or ``beta2`` (for x=1).
    """
    betas = (w.beta1, w.beta2)
    u = np.zeros((2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        mixed = x ^ y
        beta = betas[x]
        u[x * y, x, y] = (1.0 - beta) ** mixed
        u[1 - x * y, x, y] = mixed * beta
    return u


def build_game_matrix_general(P: InputDistribution, u) -> GameMatrix:
    u = np.asarray(u, dtype=float).reshape(2, 2, 2)
    if not np.all(np.isfinite(u)):
        raise ValueError("utility entries must be finite")
    return GameMatrix(P.as_array() * (u[0] - u[1]))


def build_game_matrix(P: InputDistribution, w: UtilityWeights) -> GameMatrix:
    """Game matrix of the load-balancing utility.

    Equal to ``[[P00, P01(1-2b1)], [P10(1-2b2), -P11]]``; the (1,1) entry is
    negative because that input pair rewards the odd parity.
    """
    p = P.as_array()
    return GameMatrix(
        [
            [p[0, 0], p[0, 1] * (1.0 - 2.0 * w.beta1)],
            [p[1, 0] * (1.0 - 2.0 * w.beta2), -p[1, 1]],
        ]
    )


def chsh_matrix() -> GameMatrix:
    return build_game_matrix(InputDistribution.uniform(), UtilityWeights())


def classical_strategy(M: GameMatrix) -> tuple[float, tuple[int, int, int, int]]:
    """Best deterministic sign assignment ``(na0, na1, nb0, nb1)``.

    Ties resolve to the lexicographically smallest assignment with -1 < +1.
    """
    m = M.m
    best_value = -math.inf
    best_signs = None
    for signs in itertools.product((-1, 1), repeat=4):
        na = np.array(signs[:2], dtype=float)
        nb = np.array(signs[2:], dtype=float)
        value = float(na @ m @ nb)
        if value > best_value:
            best_value, best_signs = value, signs
    return best_value, best_signs


def classical_value(M: GameMatrix) -> float:
    return classical_strategy(M)[0]


def _q_of_theta(m: np.ndarray, theta):
    theta = np.asarray(theta, dtype=float)
    # Column y of M combines Alice's axes a0 = (1, 0), a1 = (cos t, sin t).
    vx = m[0][:, None] + m[1][:, None] * np.cos(theta)
    vy = m[1][:, None] * np.sin(theta)
    return np.hypot(vx, vy).sum(axis=0)


def _bob_angles(m: np.ndarray, theta: float) -> tuple[float, float]:
    phis = []
    for y in (0, 1):
        vx = m[0, y] + m[1, y] * math.cos(theta)
        vy = m[1, y] * math.sin(theta)
        # antiparallel to sum_x M[x, y] a_x; arbitrary when that sum vanishes
        phis.append(math.atan2(-vy, -vx) if math.hypot(vx, vy) > _ZERO else 0.0)
    return phis[0], phis[1]


def quantum_strategy(M: GameMatrix, grid_points: int = GRID_POINTS) -> tuple[float, MeasurementAngles]:
    """Planar optimum of ``sum(-M[x,y] a_x . b_y)``.

    Bob's axes are eliminated in closed form, leaving a 1-D problem in
    Alice's relative angle, solved by a dense grid plus golden-section
    refinement around the best grid point.
    """
    m = M.m
    thetas = np.linspace(0.0, 2.0 * math.pi, grid_points, endpoint=False)
    values = _q_of_theta(m, thetas)
    k = int(np.argmax(values))
    best_theta, best_value = float(thetas[k]), float(values[k])

    h = thetas[1] - thetas[0]
    bracket = (best_theta - h, best_theta, best_theta + h)
    f_lo, f_hi = _q_of_theta(m, [bracket[0], bracket[2]])
    if best_value > max(f_lo, f_hi) + 1e-15:
        res = optimize.minimize_scalar(
            lambda t: -float(_q_of_theta(m, [t])[0]),
            bracket=bracket,
            method="golden",
            tol=1e-12,
        )
        if -res.fun > best_value:
            best_theta, best_value = float(res.x), float(-res.fun)

    best_theta = math.remainder(best_theta, 2.0 * math.pi)
    phi0, phi1 = _bob_angles(m, best_theta)
    angles = MeasurementAngles(best_theta, phi0, phi1)
    return best_value, angles


def quantum_value(M: GameMatrix) -> float:
    return quantum_strategy(M)[0]


def correlators(eps: float, angles: MeasurementAngles) -> np.ndarray:
    """Noisy correlators ``E[x, y] = -(1 - eps) a_x . b_y``."""
    return -(1.0 - eps) * angles.overlaps()


def combined_infidelity(n: NoiseModel) -> float:
    return 1.0 - (1.0 - 4.0 * n.eps_s / 3.0) * (1.0 - 2.0 * n.eps_meas) ** 2


def omega_classical(M: GameMatrix) -> float:
    return (1.0 + classical_value(M)) / 2.0


def omega_quantum(eps: float, M: GameMatrix) -> float:
    return (1.0 + (1.0 - eps) * quantum_value(M)) / 2.0


def gap(eps: float, M: GameMatrix) -> float:
    return ((1.0 - eps) * quantum_value(M) - classical_value(M)) / 2.0


def epsilon_threshold(M: GameMatrix) -> float:
    q = quantum_value(M)
    if q <= _ZERO:
        raise DegenerateGameError("quantum value is zero; the game carries no weight")
    return max(0.0, 1.0 - classical_value(M) / q)


@dataclass(frozen=True)
class GapReport:
    """All game-level quantities for one matrix and noise level."""

    classical: float
    quantum: float
    omega_c: float
    omega_q: float
    gap: float
    eps: float
    eps_th: float | None
    angles: MeasurementAngles
    signs: tuple[int, int, int, int]

    @property
    def advantage(self) -> bool:
        return self.gap > 1e-12


def analyze(M: GameMatrix, eps: float = 0.0) -> GapReport:
    """Compute values, gap and threshold in one pass (each optimization runs once)."""
    c, signs = classical_strategy(M)
    q, angles = quantum_strategy(M)
    eps_th = max(0.0, 1.0 - c / q) if q > _ZERO else None
    return GapReport(
        classical=c,
        quantum=q,
        omega_c=(1.0 + c) / 2.0,
        omega_q=(1.0 + (1.0 - eps) * q) / 2.0,
        gap=((1.0 - eps) * q - c) / 2.0,
        eps=eps,
        eps_th=eps_th,
        angles=angles,
        signs=signs,
    )
