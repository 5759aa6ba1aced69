"""Monte Carlo game rounds and a discrete-event model of the HEG pipeline."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numba
import numpy as np

from lctc import certify, hardware
from lctc.xor_game import (
    GameMatrix,
    InputDistribution,
    MeasurementAngles,
    NoiseModel,
    classical_strategy,
    combined_infidelity,
)

_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Behavior:
    """Conditional distribution stored as ``p[x, y, a, b] = P(a, b | x, y)``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.array(self.p, dtype=float).reshape(2, 2, 2, 2)
        if np.any(p < -_TOL) or not np.all(np.isfinite(p)):
            raise ValueError("behavior entries must be finite and non-negative")
        if np.max(np.abs(p.sum(axis=(2, 3)) - 1.0)) > _TOL:
            raise ValueError("each conditional distribution must sum to 1")
        alice = p.sum(axis=3)  # [x, y, a]
        bob = p.sum(axis=2)  # [x, y, b]
        if np.max(np.abs(alice[:, 0] - alice[:, 1])) > _TOL or np.max(
            np.abs(bob[0] - bob[1])
        ) > _TOL:
            raise ValueError("behavior violates no-signaling")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    def expected_utility(self, P: InputDistribution, u) -> float:
        u = np.asarray(u, dtype=float).reshape(2, 2, 2)
        total = 0.0
        probs = P.as_array()
        for x, y, a, b in itertools.product((0, 1), repeat=4):
            total += probs[x, y] * self.p[x, y, a, b] * u[a ^ b, x, y]
        return total


@dataclass(frozen=True)
class TrialLog:
    rounds: int
    total_score: float
    wins: int
    empirical_omega: float
    pvalue: float
    seed: int


def behavior_from_correlators(E) -> Behavior:
    E = np.asarray(E, dtype=float).reshape(2, 2)
    p = np.empty((2, 2, 2, 2))
    for a, b in itertools.product((0, 1), repeat=2):
        p[:, :, a, b] = 0.25 * (1.0 + (-1) ** (a ^ b) * E)
    return Behavior(p)


def behavior_from_strategy(n: NoiseModel, a: MeasurementAngles) -> Behavior:
    eps = combined_infidelity(n)
    return behavior_from_correlators(-(1.0 - eps) * a.overlaps())


def best_classical_behavior(M: GameMatrix) -> Behavior:
    """Deterministic behavior from the classical optimum; a_x = 0 iff n_a,x = +1."""
    _, (na0, na1, nb0, nb1) = classical_strategy(M)
    a_out = [0 if s > 0 else 1 for s in (na0, na1)]
    b_out = [0 if s > 0 else 1 for s in (nb0, nb1)]
    p = np.zeros((2, 2, 2, 2))
    for x, y in itertools.product((0, 1), repeat=2):
        p[x, y, a_out[x], b_out[y]] = 1.0
    return Behavior(p)


def classical_omega_general(P: InputDistribution, u) -> float:
    """Best deterministic expected utility, by enumeration of all 16 strategies."""
    u = np.asarray(u, dtype=float).reshape(2, 2, 2)
    probs = P.as_array()
    best = -math.inf
    for a0, a1, b0, b1 in itertools.product((0, 1), repeat=4):
        a, b = (a0, a1), (b0, b1)
        value = sum(
            probs[x, y] * u[a[x] ^ b[y], x, y] for x, y in itertools.product((0, 1), repeat=2)
        )
        best = max(best, value)
    return best


def simulate_rounds(
    P: InputDistribution, u, B: Behavior, rounds: int, seed: int
) -> TrialLog:
    """Sample ``rounds`` independent game rounds.

    Scores must lie in [0, 1]. Each round also yields a win with probability
    equal to its score, so the win count is binomial with mean omega and the
    exact tail against the classical optimum applies.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be >= 1, got {rounds}")
    u = np.asarray(u, dtype=float).reshape(2, 2, 2)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("utility entries must lie in [0, 1]")
    input_ss, output_ss, win_ss = np.random.SeedSequence(seed).spawn(3)

    cum_inputs = np.cumsum(P.as_array().ravel())
    cum_inputs[-1] = 1.0
    xy = np.searchsorted(cum_inputs, np.random.default_rng(input_ss).random(rounds), side="right")
    x, y = xy >> 1, xy & 1

    cum_out = np.cumsum(B.p.reshape(2, 2, 4), axis=2)
    cum_out[..., -1] = 1.0
    r = np.random.default_rng(output_ss).random(rounds)
    ab = (r[:, None] >= cum_out[x, y]).sum(axis=1)
    parity = (ab >> 1) ^ (ab & 1)

    scores = u[parity, x, y]
    total = float(scores.sum())
    wins = int(np.count_nonzero(np.random.default_rng(win_ss).random(rounds) < scores))
    omega_c = classical_omega_general(P, u)
    return TrialLog(
        rounds=rounds,
        total_score=total,
        wins=wins,
        empirical_omega=total / rounds,
        pvalue=certify.binomial_pvalue(wins, rounds, omega_c),
        seed=seed,
    )


# ---------------------------------------------------------------- pipeline

TRIGGERS = ("unlimited", "fixed", "poisson")


@dataclass(frozen=True)
class PipelineConfig:
    timings: hardware.NodeTimings
    link: hardware.LinkBudget
    duration: float
    seed: int = 0
    trigger: str = "unlimited"
    trigger_rate: float = 0.0
    p_ent: float | None = None

    def __post_init__(self):
        if not self.duration > 0.0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        if self.trigger not in TRIGGERS:
            raise ValueError(f"trigger must be one of {TRIGGERS}, got {self.trigger!r}")
        if self.trigger != "unlimited" and not self.trigger_rate > 0.0:
            raise ValueError("fixed and poisson triggers need a positive trigger_rate")
        if hardware.trial_period(self.timings) <= 0.0:
            raise ValueError("trial period must be positive")
        if self.p_ent is not None and not 0.0 <= self.p_ent <= 1.0:
            raise ValueError(f"p_ent must lie in [0, 1], got {self.p_ent!r}")

    def success_prob(self) -> float:
        if self.p_ent is not None:
            return self.p_ent
        return hardware.ent_success_prob(self.timings, self.link)


@dataclass(frozen=True)
class PipelineStats:
    attempts: int
    heralds: int
    successes: int
    consumed: int
    in_flight: int
    achieved_pair_rate: float
    mean_buffer: float
    max_buffer: int
    channel_idle_fraction: float
    stall_fraction: float


@numba.njit(cache=True)
def _run_pipeline(
    n_ticks, tau_e, herald_delay, fail_hold, success_hold, n_a, outcomes, triggers,
    unlimited, duration,
):
    # ring buffers; at most n_a entries live in each
    cap = n_a + 1
    herald_t = np.empty(cap)
    herald_ok = np.empty(cap, dtype=np.bool_)
    fail_t = np.empty(cap)
    succ_t = np.empty(cap)
    h_head = h_tail = f_head = f_tail = s_head = s_tail = 0

    free = n_a
    attempts = heralds = successes = consumed = stalls = 0
    idle_ticks = 0
    buffer = 0
    max_buffer = 0
    area = 0.0
    last_t = 0.0
    trig_i = 0
    n_trig = triggers.shape[0]
    tol = 1e-9 * tau_e

    for k in range(n_ticks + 1):
        # the final pass drains events up to the end of the run
        horizon = k * tau_e if k < n_ticks else duration
        while True:
            # earliest pending event; ties: herald, release, trigger
            best = np.inf
            kind = -1
            if h_head != h_tail and herald_t[h_head] < best:
                best = herald_t[h_head]
                kind = 0
            if f_head != f_tail and fail_t[f_head] < best - tol:
                best = fail_t[f_head]
                kind = 1
            if s_head != s_tail and succ_t[s_head] < best - tol:
                best = succ_t[s_head]
                kind = 2
            if not unlimited and trig_i < n_trig and triggers[trig_i] < best - tol:
                best = triggers[trig_i]
                kind = 3
            if kind < 0 or best > horizon + tol:
                break
            area += buffer * (best - last_t)
            last_t = max(last_t, best)
            if kind == 0:
                ok = herald_ok[h_head]
                h_head = (h_head + 1) % cap
                heralds += 1
                if ok:
                    successes += 1
                    if unlimited:
                        consumed += 1
                        succ_t[s_tail] = best + success_hold
                        s_tail = (s_tail + 1) % cap
                    else:
                        buffer += 1
                        if buffer > max_buffer:
                            max_buffer = buffer
                else:
                    fail_t[f_tail] = best + fail_hold
                    f_tail = (f_tail + 1) % cap
            elif kind == 1:
                f_head = (f_head + 1) % cap
                free += 1
            elif kind == 2:
                s_head = (s_head + 1) % cap
                free += 1
            else:
                trig_i += 1
                if buffer > 0:
                    buffer -= 1
                    consumed += 1
                    succ_t[s_tail] = best + success_hold
                    s_tail = (s_tail + 1) % cap
                else:
                    stalls += 1
        if k == n_ticks:
            break
        if free > 0:
            t = k * tau_e
            free -= 1
            herald_t[h_tail] = t + herald_delay
            herald_ok[h_tail] = outcomes[attempts]
            h_tail = (h_tail + 1) % cap
            attempts += 1
        else:
            idle_ticks += 1

    area += buffer * (duration - last_t)
    n_fired = trig_i
    return (attempts, heralds, successes, consumed, stalls, n_fired, idle_ticks,
            area, max_buffer)


def _trigger_times(c: PipelineConfig, rng: np.random.Generator) -> np.ndarray:
    if c.trigger == "unlimited":
        return np.empty(0)
    if c.trigger == "fixed":
        period = 1.0 / c.trigger_rate
        count = int(math.floor(c.duration / period * (1 + 1e-12)))
        return (np.arange(1, count + 1) * period)[: count]
    count = rng.poisson(c.trigger_rate * c.duration)
    return np.sort(rng.uniform(0.0, c.duration, size=count))


def simulate_pipeline(c: PipelineConfig) -> PipelineStats:
    """Event-driven run of the time-multiplexed attempt pipeline.

    Attempts launch at multiples of tau_e on any free memory. The herald
    returns tau_e + tau_link after launch. A failure frees its memory after
    tau_res. A success waits in a FIFO buffer until a trigger consumes it,
    then frees its memory after tau_dec + tau_res. Unlimited triggers
    consume every success on arrival.
    """
    t, l = c.timings, c.link
    tau_e = hardware.trial_period(t)
    n_ticks = int(math.ceil(c.duration / tau_e - 1e-9))
    outcome_ss, trigger_ss = np.random.SeedSequence(c.seed).spawn(2)
    outcomes = np.random.default_rng(outcome_ss).random(n_ticks) < c.success_prob()
    triggers = _trigger_times(c, np.random.default_rng(trigger_ss))

    (attempts, heralds, successes, consumed, stalls, n_fired, idle_ticks, area,
     max_buffer) = _run_pipeline(
        n_ticks,
        tau_e,
        tau_e + hardware.link_latency(l),
        t.tau_res,
        hardware.decision_latency(t) + t.tau_res,
        int(t.n_a),
        outcomes,
        triggers,
        c.trigger == "unlimited",
        c.duration,
    )
    return PipelineStats(
        attempts=int(attempts),
        heralds=int(heralds),
        successes=int(successes),
        consumed=int(consumed),
        in_flight=int(attempts - heralds),
        achieved_pair_rate=successes / c.duration,
        mean_buffer=float(area / c.duration),
        max_buffer=int(max_buffer),
        channel_idle_fraction=idle_ticks / n_ticks,
        stall_fraction=stalls / n_fired if n_fired else 0.0,
    )
