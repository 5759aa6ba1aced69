import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lctc import cqed
from lctc.cqed import (
    CavityParams,
    GhzNetworkSpec,
    PhotonSpectrum,
    ReadoutParams,
    calibration,
    equal_node_spec,
    ghz_generation,
    min_readout_time,
    networking_cavity,
    optimal_threshold,
    readout_error,
    readout_params,
    reflection_coefficients,
    thresholded_error,
    tpi_infidelity,
    tpi_state,
)
from lctc.errors import ConvergenceError, InfeasibleError

P20 = readout_params(20.0)
C_GRID = np.geomspace(2.0, 100.0, 12)
# frozen from the quad route (test_closed_form_matches_quadrature cross-checks it)
TAU_MEAS_C20 = {0.002: 5.5448548081e-06, 0.01: 3.6599559618e-06}


@settings(max_examples=40, deadline=None)
@given(st.floats(1e-7, 2e-5), st.integers(0, 6), st.floats(1, 100))
def test_closed_form_matches_quadrature(tau, n_th, c_in):
    p = readout_params(c_in)
    a = readout_error(tau, n_th, p, "closed")
    b = readout_error(tau, n_th, p, "quad")
    assert a == pytest.approx(b, rel=1e-9, abs=1e-13)


def test_trivial_limit_is_exponential():
    p = ReadoutParams(r_bright=2e6, r_dark=0.0, t_life=1e300)
    for tau in (1e-8, 1e-7, 1e-6, 3e-6):
        p_plus, p_minus = readout_error(tau, 0, p)
        assert p_plus == 0.0
        assert p_minus == pytest.approx(math.exp(-2e6 * tau), rel=1e-12)


def test_optimal_threshold_matches_exhaustive_search():
    for tau in (5e-7, 5e-6, 1e-4, 1e-3):
        lam = P20.r_bright * tau
        cap = int(lam + 10 * math.sqrt(lam) + 10)
        totals = [sum(readout_error(tau, n, P20)) for n in range(cap + 1)]
        n, err = optimal_threshold(tau, P20)
        assert n == int(np.argmin(totals))
        assert err == pytest.approx(min(totals), rel=1e-12)


@pytest.mark.parametrize("target", sorted(TAU_MEAS_C20))
def test_min_readout_time_frozen(target):
    tau = min_readout_time(target, P20)
    assert tau == pytest.approx(TAU_MEAS_C20[target], rel=1e-8)
    assert thresholded_error(tau, P20) == pytest.approx(target, rel=1e-8)
    assert thresholded_error(0.99 * tau, P20) > target


def test_readout_infeasible_at_low_cooperativity():
    with pytest.raises(InfeasibleError):
        min_readout_time(0.002, readout_params(1.0))


def test_readout_faster_with_cooperativity():
    taus = [min_readout_time(0.01, readout_params(c)) for c in (10, 20, 50, 100)]
    assert taus == sorted(taus, reverse=True)


def test_readout_parameter_validation():
    with pytest.raises(ValueError):
        ReadoutParams(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        readout_error(-1.0, 0, P20)
    with pytest.raises(ValueError):
        readout_error(1e-6, 0, P20, method="simpson")


def test_reflection_limits():
    cav = networking_cavity(20.0)
    r0, r1 = reflection_coefficients(cav, np.array([0.0, 1e15]))
    assert r0[0] == pytest.approx((cav.kappa_in - cav.kappa_ex) / cav.kappa)
    assert abs(r0[1]) == pytest.approx(1.0) and abs(r1[1]) == pytest.approx(1.0)
    assert abs(r1[0]) <= 1.0


def test_calibration_requires_overcoupling():
    with pytest.raises(ValueError):
        calibration(CavityParams(g=1.0, kappa_in=2.0, kappa_ex=1.0, gamma=1.0))


def test_ideal_limit():
    g = cqed.TWO_PI * 3e6
    cav = CavityParams(g=g, kappa_in=0.0, kappa_ex=g, gamma=cqed.TWO_PI * 0.1)
    r = ghz_generation(GhzNetworkSpec((cav,) * 3, PhotonSpectrum(1e-2)))
    assert r.fidelity == pytest.approx(1.0, abs=1e-6)
    assert r.p_success == pytest.approx(1.0, abs=1e-6)
    assert r.p_plus == pytest.approx(r.p_minus, rel=1e-3)


@pytest.mark.parametrize("sigma", [0.12, 0.34])
def test_quadrature_self_convergence(sigma):
    spec = equal_node_spec(20.0, sigma)
    r = ghz_generation(spec)
    f2, p2 = (lambda t: (t[2] / (t[0] + t[1]), t[0] + t[1]))(cqed._ghz_at_nodes(spec, 2 * r.nodes_used))
    assert abs(f2 - r.fidelity) < 1e-6 and abs(p2 - r.p_success) < 1e-6


def test_convergence_error_when_budget_too_small():
    with pytest.raises(ConvergenceError):
        ghz_generation(equal_node_spec(20.0, 0.34), n_nodes=2, max_nodes=4, rtol=1e-15)


@pytest.mark.parametrize("sigma", [0.12, 0.34])
def test_fidelity_monotone_in_cooperativity(sigma):
    f = [ghz_generation(equal_node_spec(c, sigma)).fidelity for c in C_GRID]
    assert all(b > a for a, b in zip(f, f[1:]))


@pytest.mark.parametrize("c_in", [2.0, 5.0, 20.0, 100.0])
def test_fidelity_monotone_in_photon_length(c_in):
    f = [ghz_generation(equal_node_spec(c_in, s)).fidelity for s in (0.12, 0.2, 0.34, 0.6)]
    assert all(b > a for a, b in zip(f, f[1:]))


def test_rate_fidelity_tradeoff():
    short = ghz_generation(equal_node_spec(20.0, 0.12))
    long = ghz_generation(equal_node_spec(20.0, 0.34))
    assert short.rate > long.rate and short.fidelity < long.fidelity


def test_tpi():
    assert tpi_infidelity(0.98) == pytest.approx(0.01, abs=1e-15)
    assert tpi_infidelity(1.0) == pytest.approx(0.0, abs=1e-15)
    rho = tpi_state(0.9)
    assert np.trace(rho) == pytest.approx(1.0) and np.allclose(rho, rho.T)
    with pytest.raises(ValueError):
        tpi_state(1.2)


def test_spec_validation():
    with pytest.raises(ValueError):
        PhotonSpectrum(0.0)
    cav = networking_cavity(20.0)
    with pytest.raises(ValueError):
        GhzNetworkSpec((cav, cav), PhotonSpectrum(1e-6))
    with pytest.raises(ValueError):
        GhzNetworkSpec((cav,) * 3, PhotonSpectrum(1e-6), k_window=0)
