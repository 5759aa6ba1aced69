"""Cavity-QED device models: fluorescence readout and CAPS GHZ generation.

Rates and detunings are angular (rad/s).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from lctc.errors import ConvergenceError, InfeasibleError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class CavityParams:
    g: float
    kappa_in: float
    kappa_ex: float
    gamma: float

    def __post_init__(self):
        for name in ("g", "kappa_ex", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if not (math.isfinite(self.kappa_in) and self.kappa_in >= 0.0):
            raise ValueError(f"kappa_in must be >= 0, got {self.kappa_in!r}")

    @property
    def kappa(self) -> float:
        return self.kappa_ex + self.kappa_in

    @property
    def c_in(self) -> float:
        if self.kappa_in == 0.0:
            return math.inf
        return self.g**2 / (2.0 * self.kappa_in * self.gamma)


@dataclass(frozen=True)
class ReadoutParams:
    r_bright: float
    r_dark: float
    t_life: float
    eta_det: float = 1.0
    detuning: float = math.inf

    def __post_init__(self):
        if not (self.r_bright >= 0.0 and self.r_dark >= 0.0):
            raise ValueError("rates must be >= 0")
        if self.r_dark > self.r_bright:
            raise ValueError(f"r_dark ({self.r_dark!r}) exceeds r_bright ({self.r_bright!r})")
        if not self.t_life > 0.0:
            raise ValueError(f"t_life must be positive, got {self.t_life!r}")


@dataclass(frozen=True)
class PhotonSpectrum:
    """Gaussian photon; ``sigma_t`` is the amplitude-envelope standard deviation."""

    sigma_t: float
    center: float = 0.0

    def __post_init__(self):
        if not self.sigma_t > 0.0:
            raise ValueError(f"sigma_t must be positive, got {self.sigma_t!r}")

    @property
    def sigma_delta(self) -> float:
        # std of |f(Delta)|^2, the Fourier partner of the amplitude envelope
        return 1.0 / (2.0 * self.sigma_t)


@dataclass(frozen=True)
class GhzNetworkSpec:
    nodes: tuple
    spectrum: PhotonSpectrum
    p_e_src: float = 1.0
    k_window: float = 10.0

    def __post_init__(self):
        if len(self.nodes) != 3:
            raise ValueError(f"exactly 3 nodes are supported, got {len(self.nodes)}")
        if not 0.0 <= self.p_e_src <= 1.0:
            raise ValueError(f"p_e_src must lie in [0, 1], got {self.p_e_src!r}")
        if not self.k_window > 0.0:
            raise ValueError(f"k_window must be positive, got {self.k_window!r}")


@dataclass(frozen=True)
class GhzResult:
    fidelity: float
    p_success: float
    p_plus: float
    p_minus: float
    rate: float
    nodes_used: int


# ---------------------------------------------------------------- builders


def networking_cavity(c_in: float, g: float = TWO_PI * 3e6, gamma: float = TWO_PI * 0.24e6):
    """Telecom-interface cavity: kappa_ex = g + 2 kappa_in."""
    kappa_in = g**2 / (2.0 * gamma * c_in)
    return CavityParams(g=g, kappa_in=kappa_in, kappa_ex=g + 2.0 * kappa_in, gamma=gamma)


def readout_cavity(c_in: float, g: float = TWO_PI * 3e6, gamma: float = TWO_PI * 91e3):
    """Measurement cavity: kappa_ex = (g + 2 kappa_in) / 3."""
    kappa_in = g**2 / (2.0 * gamma * c_in)
    return CavityParams(g=g, kappa_in=kappa_in, kappa_ex=(g + 2.0 * kappa_in) / 3.0, gamma=gamma)


def bright_rate(c: CavityParams, eta_det: float) -> float:
    return eta_det * c.kappa_ex * c.g**2 / (4.0 * c.kappa**2)


def dark_rate(r_bright: float, gamma: float, detuning: float) -> float:
    return r_bright * (gamma / detuning) ** 2


def readout_params(
    c_in: float, eta_det: float = 0.9, detuning_ratio: float = 100.0, t_life: float = 1.6e-3
) -> ReadoutParams:
    cav = readout_cavity(c_in)
    rb = bright_rate(cav, eta_det)
    detuning = detuning_ratio * cav.gamma
    return ReadoutParams(
        r_bright=rb,
        r_dark=dark_rate(rb, cav.gamma, detuning),
        t_life=t_life,
        eta_det=eta_det,
        detuning=detuning,
    )


# ---------------------------------------------------------------- readout


def _q_bar(n, lam):
    """Poisson CDF ``e^-lam sum_{m<=n} lam^m / m!``."""
    return special.pdtr(n, lam)


def _p_minus_closed(tau: float, n_th: int, r: float, t_life: float) -> float:
    a = r + 1.0 / t_life
    m = np.arange(n_th + 1)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(r / a) if r > 0 else -np.inf
    weights = np.exp(m * log_ratio) if r > 0 else (m == 0).astype(float)
    integral = float(np.sum(weights * special.gammainc(m + 1, a * tau))) / (t_life * a)
    return integral + math.exp(-tau / t_life) * float(_q_bar(n_th, r * tau))


def _p_minus_quad(tau: float, n_th: int, r: float, t_life: float) -> float:
    integral, _ = integrate.quad(
        lambda t: math.exp(-t / t_life) / t_life * _q_bar(n_th, r * t),
        0.0,
        tau,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=200,
    )
    return integral + math.exp(-tau / t_life) * float(_q_bar(n_th, r * tau))


def readout_error(tau: float, n_th: int, p: ReadoutParams, method: str = "closed"):
    """False-positive and false-negative probabilities ``(P+, P-)``."""
    if tau < 0 or n_th < 0:
        raise ValueError("tau and n_th must be non-negative")
    p_plus = 1.0 - float(_q_bar(n_th, p.r_dark * tau))
    if method == "closed":
        p_minus = _p_minus_closed(tau, n_th, p.r_bright, p.t_life)
    elif method == "quad":
        p_minus = _p_minus_quad(tau, n_th, p.r_bright, p.t_life)
    else:
        raise ValueError(f"unknown method {method!r}")
    return p_plus, p_minus


def _threshold_cap(tau: float, p: ReadoutParams) -> int:
    """Threshold past which P+ is exactly zero.

    P- never decreases with n, so no larger threshold can lower P+ + P-.
    """
    lam = p.r_dark * tau
    n = int(lam + 10.0 * math.sqrt(lam) + 10)
    while _q_bar(n, lam) < 1.0:
        n *= 2
    return n


def _errors_all(tau: float, p: ReadoutParams, cap: int) -> np.ndarray:
    """P+ + P- for every threshold 0..cap (closed form, cumulative)."""
    m = np.arange(cap + 1)
    p_plus = 1.0 - _q_bar(m, p.r_dark * tau)
    r, t_life = p.r_bright, p.t_life
    a = r + 1.0 / t_life
    if r > 0:
        weights = np.exp(m * math.log(r / a))
    else:
        weights = (m == 0).astype(float)
    integral = np.cumsum(weights * special.gammainc(m + 1, a * tau)) / (t_life * a)
    p_minus = integral + math.exp(-tau / t_life) * _q_bar(m, r * tau)
    return p_plus + p_minus


def optimal_threshold(tau: float, p: ReadoutParams) -> tuple[int, float]:
    """Photon-count threshold minimizing P+ + P- (smallest on ties)."""
    totals = _errors_all(tau, p, _threshold_cap(tau, p))
    n = int(np.argmin(totals))
    return n, float(totals[n])


def thresholded_error(tau: float, p: ReadoutParams) -> float:
    return optimal_threshold(tau, p)[1]


def min_readout_time(target_eps: float, p: ReadoutParams, tau_max: float | None = None) -> float:
    """Shortest probe time whose optimally thresholded error reaches target_eps."""
    if not 0.0 < target_eps < 1.0:
        raise ValueError(f"target_eps must lie in (0, 1), got {target_eps!r}")
    if p.r_bright <= 0.0:
        raise InfeasibleError("no bright-state signal")
    tau_max = tau_max if tau_max is not None else 10.0 * p.t_life
    tau_min = min(1e-3 / p.r_bright, tau_max / 1e6)
    grid = np.geomspace(tau_min, tau_max, 400)
    prev = tau_min
    if thresholded_error(tau_min, p) <= target_eps:
        return tau_min
    for tau in grid[1:]:
        if thresholded_error(tau, p) <= target_eps:
            return optimize.brentq(
                lambda t: thresholded_error(t, p) - target_eps, prev, tau, xtol=1e-15, rtol=1e-10
            )
        prev = tau
    floor = min(thresholded_error(t, p) for t in grid)
    raise InfeasibleError(f"error floor {floor:.3g} exceeds target {target_eps:.3g}")


# ---------------------------------------------------------------- CAPS GHZ


def reflection_coefficients(c: CavityParams, delta):
    delta = np.asarray(delta, dtype=float)
    num0 = -c.kappa_ex + c.kappa_in - 1j * delta
    den0 = c.kappa_ex + c.kappa_in - 1j * delta
    atom = c.gamma - 1j * delta
    g2 = c.g**2
    return num0 / den0, (num0 * atom + g2) / (den0 * atom + g2)


def calibration(c: CavityParams) -> tuple[float, float]:
    """Loss-balancing amplitude and delay for the H branch."""
    if c.kappa_ex <= c.kappa_in:
        raise ValueError("calibration delay requires kappa_ex > kappa_in (overcoupled)")
    r_opt = 1.0 - 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * c.c_in)) if math.isfinite(c.c_in) else 1.0
    tau = 2.0 * c.kappa_ex / (c.kappa_ex**2 - c.kappa_in**2)
    return r_opt, tau


_PLUS = np.array([1.0, 1.0]) / math.sqrt(2.0)
_MINUS = np.array([1.0, -1.0]) / math.sqrt(2.0)


def _kron3(a, b, c):
    return np.einsum("ki,kj,kl->kijl", a, b, c).reshape(a.shape[0], 8)


def _ghz_at_nodes(spec: GhzNetworkSpec, n_nodes: int):
    x, w = special.roots_hermitenorm(n_nodes)
    w = w / math.sqrt(2.0 * math.pi)  # weights of the unit normal
    delta = spec.spectrum.center + spec.spectrum.sigma_delta * x

    r_bar, tau_bar = 1.0, 0.0
    factors = []
    for node in spec.nodes:
        r_opt, tau = calibration(node)
        r_bar *= r_opt
        tau_bar += tau
        r0, r1 = reflection_coefficients(node, delta)
        factors.append(np.stack([r0, r1], axis=1) / math.sqrt(2.0))
    v_branch = _kron3(*factors)  # (n, 8)
    plus3 = np.kron(np.kron(_PLUS, _PLUS), _PLUS)
    minus3 = np.kron(np.kron(_MINUS, _MINUS), _MINUS)
    h_branch = (r_bar * np.exp(1j * tau_bar * delta))[:, None] * plus3[None, :]

    ghz_plus = (plus3 + minus3) / math.sqrt(2.0)
    ghz_minus = (plus3 - minus3) / math.sqrt(2.0)
    out = {}
    for sign, target in ((1.0, ghz_minus), (-1.0, ghz_plus)):
        ups = (h_branch + sign * v_branch) / math.sqrt(2.0)
        norm = np.sum(np.abs(ups) ** 2, axis=1)
        overlap = np.abs(ups @ target) ** 2
        out[sign] = (float(np.sum(w * norm) / 2.0), float(np.sum(w * overlap) / 2.0))
    p_plus, f_plus = out[1.0]
    p_minus, f_minus = out[-1.0]
    return p_plus, p_minus, f_plus + f_minus


def ghz_generation(
    spec: GhzNetworkSpec, n_nodes: int = 64, max_nodes: int = 16384, rtol: float = 1e-6
) -> GhzResult:
    """Heralded GHZ fidelity and success probability by Gauss-Hermite quadrature.

    Node counts double until fidelity and success probability change by less
    than ``rtol`` relative.
    """
    prev = _ghz_at_nodes(spec, n_nodes)
    n = n_nodes
    while True:
        n *= 2
        cur = _ghz_at_nodes(spec, n)
        p_prev, p_cur = prev[0] + prev[1], cur[0] + cur[1]
        f_prev = prev[2] / p_prev if p_prev > 0 else 0.0
        f_cur = cur[2] / p_cur if p_cur > 0 else 0.0
        if abs(p_cur - p_prev) <= rtol * max(p_cur, 1e-300) and abs(f_cur - f_prev) <= rtol * max(
            f_cur, 1e-300
        ):
            break
        if n >= max_nodes:
            raise ConvergenceError(f"quadrature not converged at {n} nodes")
        prev = cur
    p_plus, p_minus, weighted = cur
    p_success = p_plus + p_minus
    return GhzResult(
        fidelity=weighted / p_success if p_success > 0 else 0.0,
        p_success=p_success,
        p_plus=p_plus,
        p_minus=p_minus,
        rate=spec.p_e_src * p_success / (spec.k_window * spec.spectrum.sigma_t),
        nodes_used=n,
    )


def equal_node_spec(c_in: float, sigma_t_gamma: float, **kwargs) -> GhzNetworkSpec:
    """Three identical networking cavities; sigma_t given in units of 1/gamma."""
    cav = networking_cavity(c_in)
    return GhzNetworkSpec((cav, cav, cav), PhotonSpectrum(sigma_t_gamma / cav.gamma), **kwargs)


# ---------------------------------------------------------------- TPI


def tpi_state(v: float) -> np.ndarray:
    """Two-atom density matrix ``(1+V)/2 |Psi-><Psi-| + (1-V)/2 |Psi+><Psi+|``."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"trace purity must lie in [0, 1], got {v!r}")
    psi_m = np.array([0, 1, -1, 0]) / math.sqrt(2)
    psi_p = np.array([0, 1, 1, 0]) / math.sqrt(2)
    return (1 + v) / 2 * np.outer(psi_m, psi_m) + (1 - v) / 2 * np.outer(psi_p, psi_p)


def tpi_infidelity(v: float = 0.98) -> float:
    """Psi- infidelity of the TPI mixture; feeds the eps_s budget."""
    psi_m = np.array([0, 1, -1, 0]) / math.sqrt(2)
    return float(1.0 - psi_m @ tpi_state(v) @ psi_m)
