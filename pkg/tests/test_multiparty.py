import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lctc.multiparty import (
    GhzAngles,
    GhzNoise,
    MultiInputDistribution,
    ThreePartyGame,
    analyze_three,
    behavior_three,
    build_three_party,
    classical_strategy_three,
    classical_value_three,
    ghz_combined_infidelity,
    ghz_density_behavior,
    ghz_eps_threshold,
    ghz_threshold,
    majority_utility,
    quantum_strategy_three,
    simulate_rounds_three,
)
from oracles import ghz_bias_state_search

UNIFORM = build_three_party(MultiInputDistribution.uniform(), 0.0)


def brute_classical(m):
    best = -math.inf
    for f in itertools.product((0, 1), repeat=6):
        total = 0.0
        for k, (x1, x2, x3) in enumerate(itertools.product((0, 1), repeat=3)):
            total += m[k] * (-1) ** (f[x1] ^ f[2 + x2] ^ f[4 + x3])
        best = max(best, total)
    return best


def test_uniform_majority_values():
    r = analyze_three(UNIFORM)
    assert r.omega_c == pytest.approx(0.75, abs=1e-12)
    assert r.omega_q == pytest.approx((1 + 1 / math.sqrt(2)) / 2, abs=1e-12)
    # the signed correlator sum over the 8 inputs is 4 sqrt 2
    assert 8 * r.quantum == pytest.approx(4 * math.sqrt(2), abs=1e-10)


def test_uniform_angles_up_to_symmetry():
    _, a = quantum_strategy_three(UNIFORM)
    value = float(np.sum(UNIFORM.m * np.cos(a.phases())))
    assert value == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert [abs(v) for v in (a.phi1, a.phi2, a.phi3)] == pytest.approx([math.pi / 2] * 3, abs=1e-8)


def test_threshold_is_one_minus_inverse_sqrt2():
    assert ghz_eps_threshold(UNIFORM) == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-9)
    ok, margin = ghz_threshold(UNIFORM, 1 - 1 / math.sqrt(2))
    assert margin == pytest.approx(0.0, abs=1e-12)
    assert ghz_threshold(UNIFORM, 0.2)[0] and not ghz_threshold(UNIFORM, 0.3)[0]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_classical_matches_brute_force(m):
    g = ThreePartyGame(m)
    assert classical_value_three(g) == pytest.approx(brute_classical(m), abs=1e-12)
    value, table = classical_strategy_three(g)
    signs = [(-1) ** (table[0][b[0]] ^ table[1][b[1]] ^ table[2][b[2]])
             for b in itertools.product((0, 1), repeat=3)]
    assert float(np.dot(signs, g.m)) == pytest.approx(value, abs=1e-12)


@pytest.mark.parametrize("seed", range(6))
def test_quantum_matches_state_search(seed):
    m = np.random.default_rng(seed).uniform(-1, 1, 8)
    q, _ = quantum_strategy_three(ThreePartyGame(m))
    assert q == pytest.approx(ghz_bias_state_search(m), abs=1e-8)


def test_quantum_beats_dense_grid():
    rng = np.random.default_rng(42)
    grid = np.linspace(0, 2 * math.pi, 24, endpoint=False)
    phis = np.array(list(itertools.product(grid, repeat=3)))
    bits = np.array(list(itertools.product((0, 1), repeat=3)))
    for _ in range(10):
        m = rng.uniform(-1, 1, 8)
        s = np.abs((m * np.exp(1j * phis @ bits.T)).sum(axis=1)).max()
        assert quantum_strategy_three(ThreePartyGame(m))[0] >= s - 1e-12


def test_behavior_matches_density_matrix():
    _, a = quantum_strategy_three(build_three_party(MultiInputDistribution.bernoulli(0.3), 0.2))
    n = GhzNoise(0.07, 0.013)
    p1 = behavior_three(ghz_combined_infidelity(n), a)
    p2 = ghz_density_behavior(n, a)
    assert np.allclose(p1, p2, atol=1e-14)
    assert np.allclose(p1.sum(axis=(1, 2, 3)), 1.0)


def test_majority_utility():
    u = majority_utility(0.0)
    assert np.array_equal(u[1], [0, 0, 0, 1, 0, 1, 1, 1])
    assert np.array_equal(u[0] + u[1], np.ones(8))
    half = majority_utility(0.5)
    assert np.allclose(half[:, 1:7], 0.5)
    with pytest.raises(ValueError):
        majority_utility(1.5)


@given(st.floats(0.5, 1), st.floats(0, 1))
def test_no_gap_for_large_beta(beta, p):
    r = analyze_three(build_three_party(MultiInputDistribution.bernoulli(p), beta))
    assert r.gap <= 1e-4


def test_simulation_matches_value_and_is_deterministic():
    P = MultiInputDistribution.uniform()
    r = analyze_three(UNIFORM)
    B = behavior_three(0.0, r.angles)
    a = simulate_rounds_three(P, 0.0, B, 200_000, 1, omega_c=r.omega_c)
    assert a == simulate_rounds_three(P, 0.0, B, 200_000, 1, omega_c=r.omega_c)
    sigma = math.sqrt(r.omega_q * (1 - r.omega_q) / 200_000)
    assert abs(a.empirical_omega - r.omega_q) < 5 * sigma


def test_validation():
    with pytest.raises(ValueError):
        MultiInputDistribution(np.full(8, 0.2))
    with pytest.raises(ValueError):
        GhzNoise(0.9, 0.0)
    assert quantum_strategy_three(ThreePartyGame(np.zeros(8)))[0] == 0.0
    assert GhzAngles(0, 0, 0, 0).phases().shape == (8,)
