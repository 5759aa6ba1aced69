import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lctc import certify
from lctc.certify import (
    CertificationQuery,
    ScoreBounds,
    binomial_pvalue,
    expected_wins,
    log_binomial_pvalue,
    n_required,
    n_required_general,
    rate_required,
    score_pvalue_bound,
)
from lctc.errors import UncertifiableError
from oracles import exact_n_required, exact_tail

CHSH_OMEGA_Q = (1 + 1 / math.sqrt(2)) / 2
# frozen from the exact rational scan in oracles.exact_n_required
N_REQ_CHSH_IDEAL = 34
N_REQ_CHSH_REFERENCE = 65  # memory-adjusted eps = 0.0609721006888
EPS_REFERENCE = 0.060972100688815534


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 300), st.data(), st.sampled_from([0.1, 0.5, 0.6, 0.75, 0.9, 0.97]))
def test_pvalue_matches_exact_rational(m, data, w):
    v = data.draw(st.integers(0, m))
    exact = float(exact_tail(v, m, Fraction(w)))
    got = binomial_pvalue(v, m, w)
    assert got == pytest.approx(exact, rel=1e-11, abs=1e-300)


@pytest.mark.parametrize("m", [9_999, 10_000, 10_001, 40_000])
@pytest.mark.parametrize("w", [0.6, 0.75])
def test_routes_agree_across_summation_limit(m, w):
    for frac in (w, w + 0.005, w + 0.02, w + 0.1):
        v = int(math.ceil(m * frac))
        a = certify._log_tail_sum(v, m, w)
        b = certify._log_tail_beta(v, m, w)
        assert a == pytest.approx(b, rel=1e-10, abs=1e-12)


def test_deep_tail_is_finite_in_log_space():
    lp = log_binomial_pvalue(10**6, 10**6, 0.75)
    assert lp == pytest.approx(10**6 * math.log(0.75), rel=1e-12)


def test_vector_route_matches_scalar():
    m = np.arange(1, 3000)
    v = expected_wins(m, 0.8)
    vec = certify._tail_array(v, m, 0.75)
    ref = np.array([binomial_pvalue(int(a), int(b), 0.75) for a, b in zip(v, m)])
    assert np.allclose(vec, ref, rtol=1e-10, atol=0)


def test_pvalue_edges():
    assert binomial_pvalue(0, 10, 0.3) == 1.0
    assert binomial_pvalue(10, 10, 0.5) == pytest.approx(2.0**-10)
    assert binomial_pvalue(3, 10, 0.0) == 0.0
    assert binomial_pvalue(3, 10, 1.0) == 1.0
    with pytest.raises(ValueError):
        binomial_pvalue(11, 10, 0.5)


@given(st.integers(1, 200), st.sampled_from([0.6, 0.75, 0.9]))
def test_pvalue_monotone_in_v(m, w):
    p = [binomial_pvalue(v, m, w) for v in range(m + 1)]
    # log-sum-exp rounding near 1 is a few ulp
    assert all(a >= b - 1e-15 for a, b in zip(p, p[1:]))


def test_expected_wins_ceiling_slack():
    assert int(expected_wins(4, 0.75)) == 3
    assert int(expected_wins(3, 1 / 3 + 1e-13)) == 1
    assert int(expected_wins(3, 1 / 3 + 1e-6)) == 2


def test_trivial_n_required():
    # P(5 wins in 5 | 1/2) = 1/32 < 0.05 while 1/16 is not
    assert n_required(0.5, 1.0, 0.05) == 5


def test_chsh_n_required_frozen():
    assert n_required(0.75, CHSH_OMEGA_Q, 0.05) == N_REQ_CHSH_IDEAL
    q = (1 + (1 - EPS_REFERENCE) / math.sqrt(2)) / 2
    assert n_required(0.75, q, 0.05) == N_REQ_CHSH_REFERENCE


@pytest.mark.parametrize(
    "omega_c,omega_q,alpha",
    [(0.75, CHSH_OMEGA_Q, 0.05), (0.75, CHSH_OMEGA_Q, 1e-3), (0.6, 0.7, 0.05),
     (0.9, 0.95, 0.01), (0.75, 0.8, 0.05), (0.5, 0.55, 0.05)],
)
def test_n_required_matches_exact_scan(omega_c, omega_q, alpha):
    assert n_required(omega_c, omega_q, alpha) == exact_n_required(omega_c, omega_q, alpha)


def test_n_required_is_first_certifying_count():
    m = n_required(0.75, 0.76, 0.05)
    ms = np.arange(1, m + 1)
    p = np.array([binomial_pvalue(int(expected_wins(k, 0.76)), int(k), 0.75) for k in ms])
    assert p[-1] < 0.05 and np.all(p[:-1] >= 0.05)


def test_n_required_grows_as_alpha_shrinks():
    ns = [n_required(0.75, CHSH_OMEGA_Q, a) for a in (0.1, 0.05, 1e-2, 1e-3, 1e-6)]
    assert ns == sorted(ns)


def test_n_required_errors():
    with pytest.raises(UncertifiableError):
        n_required(0.75, 0.75, 0.05)
    with pytest.raises(UncertifiableError):
        n_required(0.75, 0.7501, 0.05, cap=100)
    with pytest.raises(ValueError):
        n_required(0.75, 0.8, 1.5)


def test_rate_required():
    q = CertificationQuery(0.75, CHSH_OMEGA_Q, 0.05, 0.1)
    assert rate_required(q) == pytest.approx(N_REQ_CHSH_IDEAL / 0.1)
    with pytest.raises(ValueError):
        CertificationQuery(0.8, 0.75, 0.05, 0.1)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 2000), st.data(), st.sampled_from([0.6, 0.75, 0.9]))
def test_score_bound_is_e_times_binomial(m, data, w):
    c = data.draw(st.integers(0, m))
    p = binomial_pvalue(c, m, w)
    expected = min(1.0, math.e * p)
    assert score_pvalue_bound(float(c), m, w, ScoreBounds()) == pytest.approx(expected, rel=1e-10)


def test_score_bound_vector_route_large_m():
    m = 20_000
    c = int(m * 0.77)
    got = score_pvalue_bound(float(c), m, 0.75, ScoreBounds())
    assert got == pytest.approx(math.e * binomial_pvalue(c, m, 0.75), rel=1e-10)


@given(st.integers(10, 500))
def test_score_bound_monotone_and_interpolates(m):
    cs = np.linspace(0.7 * m, m, 25)
    vals = [score_pvalue_bound(float(c), m, 0.75, ScoreBounds()) for c in cs]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_score_bound_rescales_bounds():
    # utilities in [-1, 1] map onto unit scores
    a = score_pvalue_bound(60.0, 100, 0.5, ScoreBounds(-1.0, 1.0))
    b = score_pvalue_bound(80.0, 100, 0.75, ScoreBounds())
    assert a == pytest.approx(b, rel=1e-12)


def test_general_n_required_exceeds_binomial():
    # the factor e makes the score test more conservative
    nb = n_required(0.75, CHSH_OMEGA_Q, 0.05)
    ng = n_required_general(0.75, CHSH_OMEGA_Q, 0.05, ScoreBounds())
    assert ng > nb
    with pytest.raises(ValueError):
        n_required_general(0.75, 0.9, 0.05, ScoreBounds(0.0, 0.8))


@settings(max_examples=40, deadline=None)
@given(eps=st.floats(0.0, 0.25), alpha=st.sampled_from([0.05, 1e-3]))
def test_certifies_within_matches_n_required(eps, alpha):
    omega_q = (1 + (1 - eps) / math.sqrt(2)) / 2
    n = certify.n_required(0.75, omega_q, alpha)
    assert certify.certifies_within(0.75, omega_q, alpha, n)
    assert not certify.certifies_within(0.75, omega_q, alpha, n - 1)
