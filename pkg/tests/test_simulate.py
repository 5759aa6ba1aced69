import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lctc import hardware
from lctc.simulate import (
    Behavior,
    PipelineConfig,
    behavior_from_correlators,
    behavior_from_strategy,
    best_classical_behavior,
    classical_omega_general,
    simulate_pipeline,
    simulate_rounds,
)
from lctc.xor_game import (
    InputDistribution,
    NoiseModel,
    UtilityWeights,
    build_game_matrix,
    chsh_matrix,
    chsh_utility,
    combined_infidelity,
    load_balancing_utility,
    omega_classical,
    omega_quantum,
    quantum_strategy,
)

T, L = hardware.table2_timings(), hardware.table2_link()


def chsh_behavior(eps):
    _, a = quantum_strategy(chsh_matrix())
    return behavior_from_correlators(-(1 - eps) * a.overlaps())


def test_behavior_rejects_signaling():
    p = np.zeros((2, 2, 2, 2))
    for x in (0, 1):
        for y in (0, 1):
            p[x, y, y, 0] = 1.0  # Alice's output copies Bob's input
    with pytest.raises(ValueError, match="no-signaling"):
        Behavior(p)


def test_behavior_rejects_unnormalized():
    with pytest.raises(ValueError):
        Behavior(np.full((2, 2, 2, 2), 0.3))


def test_strategy_behavior_reaches_noisy_value():
    _, a = quantum_strategy(chsh_matrix())
    n = NoiseModel(0.04, 0.002)
    B = behavior_from_strategy(n, a)
    P = InputDistribution.uniform()
    expected = omega_quantum(combined_infidelity(n), chsh_matrix())
    assert B.expected_utility(P, chsh_utility()) == pytest.approx(expected, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.05, 0.95))
def test_classical_behavior_attains_classical_value(b1, b2, p):
    P = InputDistribution.bernoulli(p)
    w = UtilityWeights(b1, b2)
    u = load_balancing_utility(w)
    M = build_game_matrix(P, w)
    B = best_classical_behavior(M)
    assert B.expected_utility(P, u) == pytest.approx(classical_omega_general(P, u), abs=1e-12)
    # the matrix value agrees when utilities pair up as u0 + u1 = 1
    assert classical_omega_general(P, u) == pytest.approx(omega_classical(M), abs=1e-12)


def test_rounds_are_deterministic_per_seed():
    B = chsh_behavior(0.0)
    a = simulate_rounds(InputDistribution.uniform(), chsh_utility(), B, 10_000, 5)
    b = simulate_rounds(InputDistribution.uniform(), chsh_utility(), B, 10_000, 5)
    c = simulate_rounds(InputDistribution.uniform(), chsh_utility(), B, 10_000, 6)
    assert a == b and a != c


def test_rounds_match_analytic_value():
    B = chsh_behavior(0.061)
    log = simulate_rounds(InputDistribution.uniform(), chsh_utility(), B, 200_000, 11)
    w = omega_quantum(0.061, chsh_matrix())
    assert abs(log.empirical_omega - w) < 5 * math.sqrt(w * (1 - w) / 200_000)
    assert log.pvalue < 1e-100


def test_rounds_validate_inputs():
    B = chsh_behavior(0.0)
    with pytest.raises(ValueError):
        simulate_rounds(InputDistribution.uniform(), chsh_utility(), B, 0, 1)
    with pytest.raises(ValueError):
        simulate_rounds(InputDistribution.uniform(), 2 * chsh_utility(), B, 10, 1)


def saturation_config(n_a=1, duration=1.0):
    t = hardware.NodeTimings(
        tau_p=0.4e-3, tau_swap=0.2e-3, tau_rot=0, tau_meas=0, tau_res=0, tau_mem=1.0, n_a=n_a, p_e=1.0
    )
    l = hardware.LinkBudget(0.0, 0.0, 2e8, 1.0, 1.0, 0.0)
    return PipelineConfig(t, l, duration, seed=3, p_ent=1.0)


def test_saturation_reaches_trial_rate_exactly():
    s = simulate_pipeline(saturation_config())
    assert s.successes == 1000 and s.attempts == 1000
    assert s.achieved_pair_rate == pytest.approx(1 / 1e-3, rel=1e-12)
    assert s.channel_idle_fraction == 0.0


def test_memory_bound_pipeline_matches_occupancy_limit():
    # one memory, occupancy of three trial periods
    c = saturation_config()
    t = dataclasses.replace(c.timings, tau_res=2e-3)
    s = simulate_pipeline(dataclasses.replace(c, timings=t))
    assert s.attempts == pytest.approx(1000 / 3, abs=1)
    assert s.channel_idle_fraction == pytest.approx(2 / 3, abs=2e-3)


def test_pipeline_deterministic_and_seed_sensitive():
    c = PipelineConfig(T, L, 0.5, seed=9)
    assert simulate_pipeline(c) == simulate_pipeline(c)
    assert simulate_pipeline(c) != simulate_pipeline(dataclasses.replace(c, seed=10))


def test_pipeline_rate_matches_analytic():
    s = simulate_pipeline(PipelineConfig(T, L, 2.0, seed=4))
    r = hardware.heg_rate(T, L)
    se = math.sqrt(r * 2.0) / 2.0
    assert abs(s.achieved_pair_rate - r) < 4 * se


def test_slow_fixed_trigger_never_stalls():
    s = simulate_pipeline(PipelineConfig(T, L, 1.0, seed=2, trigger="fixed", trigger_rate=100.0))
    assert s.stall_fraction == 0.0
    assert s.consumed == 100
    assert s.max_buffer > 1


def test_fast_poisson_trigger_stalls():
    s = simulate_pipeline(PipelineConfig(T, L, 1.0, seed=2, trigger="poisson", trigger_rate=2e4))
    r = hardware.heg_rate(T, L)
    assert s.stall_fraction == pytest.approx(1 - r / 2e4, abs=0.03)
    assert s.consumed <= s.successes


def test_pipeline_config_validation():
    with pytest.raises(ValueError):
        PipelineConfig(T, L, 0.0)
    with pytest.raises(ValueError):
        PipelineConfig(T, L, 1.0, trigger="fixed")
    with pytest.raises(ValueError):
        PipelineConfig(T, L, 1.0, trigger="burst", trigger_rate=1.0)
    with pytest.raises(ValueError):
        PipelineConfig(T, L, 1.0, p_ent=1.5)
