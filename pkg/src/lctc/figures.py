"""Figure-ready sweep tables.

Each function returns ``(header, rows)`` with rows in grid order. Grid
points are independent; ``jobs > 1`` spreads them over processes without
changing the output order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from lctc import certify, cqed, multiparty
from lctc.errors import InfeasibleError, UncertifiableError
from lctc.xor_game import (
    GameMatrix,
    InputDistribution,
    UtilityWeights,
    analyze,
    build_game_matrix,
    chsh_matrix,
)

GAP_MASK = 1e-4


def ordered_map(fn, items, jobs: int = 1):
    items = list(items)
    if jobs <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _masked(gap: float) -> float:
    return gap if gap > GAP_MASK else math.nan


# ---------------------------------------------------------------- two-party


def _gap_point(args):
    kind, beta, x, eps = args
    if kind == "bernoulli":
        P = InputDistribution.bernoulli(x)
    else:
        P = InputDistribution.correlated(x)
    r = analyze(build_game_matrix(P, UtilityWeights(beta, beta)), eps)
    return (beta, x, r.gap, _masked(r.gap))


def fig2a(grid: int = 51, eps: float = 0.0, jobs: int = 1):
    """Gap over (beta, p) for i.i.d. Bernoulli(p) inputs."""
    pts = [("bernoulli", b, p, eps) for b in np.linspace(0, 1, grid) for p in np.linspace(0, 1, grid)]
    return ["beta", "p", "gap", "gap_masked"], ordered_map(_gap_point, pts, jobs)


def fig2b(grid: int = 51, eps: float = 0.0, jobs: int = 1):
    """Gap over (beta, p11) for P(1,1) = 2 P(0,1) = 2 P(1,0) = p11."""
    pts = [
        ("correlated", b, p, eps) for b in np.linspace(0, 1, grid) for p in np.linspace(0, 0.5, grid)
    ]
    return ["beta", "p11", "gap", "gap_masked"], ordered_map(_gap_point, pts, jobs)


def fig2c(steps: int = 61, betas=(0.0, 0.1, 0.2, 0.3, 0.4), eps_max: float = 0.3):
    """Gap against infidelity at uniform inputs, symmetric and beta2 = beta1/2."""
    rows = []
    for ratio in (1.0, 0.5):
        for b1 in betas:
            M = build_game_matrix(InputDistribution.uniform(), UtilityWeights(b1, b1 * ratio))
            r = analyze(M)
            for eps in np.linspace(0.0, eps_max, steps):
                gap = ((1 - eps) * r.quantum - r.classical) / 2
                rows.append((b1, b1 * ratio, eps, gap, r.eps_th, r.gap))
    return ["beta1", "beta2", "eps", "gap", "eps_th", "gap0"], rows


def _nreq_point(args):
    M_arr, eps, alpha, cap = args
    r = analyze(GameMatrix(M_arr), eps)
    if r.gap <= 0:
        return None
    try:
        return certify.n_required(r.omega_c, r.omega_q, alpha, cap=cap)
    except UncertifiableError:
        return None


def fig3b(
    steps: int = 59,
    eps_max: float = 0.29,
    t_envs=(0.01, 0.1, 1.0),
    alphas=(0.05, 1e-3),
    r_heg: float | None = None,
    M: GameMatrix | None = None,
    cap: int = certify.DEFAULT_CAP,
    jobs: int = 1,
):
    """Required rate against infidelity; empty n_req past the threshold."""
    M = M if M is not None else chsh_matrix()
    eps_grid = np.linspace(0.0, eps_max, steps)
    pts = [(np.array(M.m), e, a, cap) for a in alphas for e in eps_grid]
    n_reqs = ordered_map(_nreq_point, pts, jobs)
    rows = []
    for (_, eps, alpha, _), n in zip(pts, n_reqs):
        for t_env in t_envs:
            r_req = math.inf if n is None else n / t_env
            ok = "" if r_heg is None else int(r_req <= r_heg)
            rows.append((eps, alpha, t_env, "" if n is None else n, r_req, ok))
    return ["eps", "alpha", "t_env", "n_req", "r_req", "rate_ok"], rows


def rate_crossing(
    r_heg: float, t_env: float, alpha: float, M: GameMatrix | None = None, step: float = 1e-3
) -> float:
    """Largest eps on a grid of the given step where n_req / t_env <= r_heg."""
    M = M if M is not None else chsh_matrix()
    r0 = analyze(M)
    budget = math.floor(r_heg * t_env * (1 + 1e-12))
    best = math.nan
    for eps in np.arange(0.0, r0.eps_th, step):
        omega_q = (1 + (1 - eps) * r0.quantum) / 2
        if certify.certifies_within(r0.omega_c, omega_q, alpha, budget):
            best = float(eps)
    return best


# ---------------------------------------------------------------- multiparty


def _three_point(args):
    beta, p = args
    g = multiparty.build_three_party(multiparty.MultiInputDistribution.bernoulli(p), beta)
    r = multiparty.analyze_three(g)
    return (beta, p, r.omega_c, r.omega_q, r.gap, _masked(r.gap))


def fig6b(grid: int = 50, jobs: int = 1):
    """Three-party gap over (beta, p) with Bernoulli(p) inputs."""
    pts = [(b, p) for b in np.linspace(0, 1, grid) for p in np.linspace(0, 1, grid)]
    header = ["beta", "p", "omega_c", "omega_q", "gap", "gap_masked"]
    return header, ordered_map(_three_point, pts, jobs)


# ---------------------------------------------------------------- cavity QED


def _ghz_point(args):
    sigma, c_in, k_window, p_e_src = args
    res = cqed.ghz_generation(cqed.equal_node_spec(c_in, sigma, k_window=k_window, p_e_src=p_e_src))
    return (sigma, c_in, res.fidelity, 1 - res.fidelity, res.p_success, res.rate, res.nodes_used)


def fig6e(
    c_min=1.0, c_max=100.0, steps=25, sigmas=(0.12, 0.34), k_window=10.0, p_e_src=1.0, jobs=1
):
    pts = [(s, c, k_window, p_e_src) for s in sigmas for c in np.geomspace(c_min, c_max, steps)]
    header = ["sigma_t_gamma", "c_in", "fidelity", "infidelity", "p_success", "rate", "nodes"]
    return header, ordered_map(_ghz_point, pts, jobs)


def _readout_point(args):
    c_in, target, eta, ratio, t_life = args
    p = cqed.readout_params(c_in, eta_det=eta, detuning_ratio=ratio, t_life=t_life)
    try:
        tau = cqed.min_readout_time(target, p)
        n_th = cqed.optimal_threshold(tau, p)[0]
    except InfeasibleError:
        tau, n_th = math.nan, ""
    return (c_in, target, tau, n_th, p.r_bright, p.r_dark)


def fig5d(
    c_min=1.0, c_max=100.0, steps=25, targets=(0.002, 0.01), eta_det=0.9, detuning_ratio=100.0,
    t_life=1.6e-3, jobs=1,
):
    pts = [
        (c, t, eta_det, detuning_ratio, t_life)
        for t in targets
        for c in np.geomspace(c_min, c_max, steps)
    ]
    header = ["c_in", "target", "tau_meas", "n_th", "r_bright", "r_dark"]
    return header, ordered_map(_readout_point, pts, jobs)
