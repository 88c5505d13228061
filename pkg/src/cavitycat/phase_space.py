"""Analytic phase-space picture of a decohering cat in one mode.

The reduced state of either mode is a weighted sum of four Gaussians sharing
one diagonal covariance: two real-centred peaks at ``+-xi`` along the peak
axis and two interference terms with imaginary centres ``+-i mu`` along the
fringe axis. Everything here is evaluated from that structure in terms of
the envelope factors

* ``O = exp(-xi^2 / (2 var_peak))``            peak overlap
* ``R = exp(-2 xi0^2 + mu^2 / (2 var_fringe))``  fringe visibility
* ``D = exp(-2 xi0^2) / O``                      peak distinguishability
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ExperimentConfig, ModeParams, evolve_at

__all__ = [
    "CatWignerParams",
    "cat_norm",
    "cat_params",
    "initial_cat_params",
    "wigner",
    "rho_coordinate",
    "marginal_P",
    "marginal_Q",
    "peak_marginal",
    "fringe_marginal",
    "peak_distributions",
    "negativity_point",
    "gaussian",
]


def cat_norm(xi0: float, sign: int) -> float:
    """Normalisation ``N_+- = 2 (1 +- exp(-2 xi0^2))``."""
    return 2.0 * (1.0 + sign * math.exp(-2.0 * xi0**2))


def gaussian(x, mean, var):
    """Normal density; ``mean`` may be complex (analytic continuation)."""
    x = np.asarray(x)
    return np.exp(-((x - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


@dataclass(frozen=True)
class CatWignerParams:
    mode: ModeParams
    xi0: float
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.xi0 == 0 and self.sign < 0:
            raise ValueError("odd cat with xi0 = 0 is not a state")

    @property
    def norm(self) -> float:
        return cat_norm(self.xi0, self.sign)

    @property
    def var_peak(self) -> float:
        return self.mode.var_peak

    @property
    def var_fringe(self) -> float:
        return self.mode.var_fringe

    @property
    def O(self) -> float:
        return math.exp(-self.mode.xi**2 / (2.0 * self.var_peak))

    @property
    def R(self) -> float:
        return math.exp(-2.0 * self.xi0**2 + self.mode.mu**2 / (2.0 * self.var_fringe))

    @property
    def D(self) -> float:
        return math.exp(-2.0 * self.xi0**2 + self.mode.xi**2 / (2.0 * self.var_peak))

    def components(self):
        """Weights, complex centres ``(q, p)`` and variances of the 4 Gaussians.

        The Wigner function is ``Re sum_k w_k G(Q - q_k; var_q) G(P - p_k; var_p)``.
        """
        xi, mu = self.mode.xi, self.mode.mu
        c = self.sign * math.exp(-2.0 * self.xi0**2)
        weights = np.array([1.0, 1.0, c, c]) / self.norm
        peak = [xi, -xi, 0.0, 0.0]
        fringe = [0.0, 0.0, 1j * mu, -1j * mu]
        if self.mode.peak_axis == "Q":
            centres = np.array([peak, fringe], dtype=complex).T
        else:
            centres = np.array([fringe, peak], dtype=complex).T
        return weights, centres, np.array([self.mode.var_q, self.mode.var_p])


def cat_params(config: ExperimentConfig, G: float, mode: str = "S") -> CatWignerParams:
    s_mode, e_mode = evolve_at(config, G)
    chosen = s_mode if mode == "S" else e_mode
    return CatWignerParams(chosen, config.xi0, config.sign)


def initial_cat_params(xi0: float, sign: int = 1) -> CatWignerParams:
    """The freshly prepared cat ``|Psi_+->`` (peaks along Q)."""
    return CatWignerParams(ModeParams("S", xi0, xi0, 0.25, 0.25), xi0, sign)


def _cat_frame(params: CatWignerParams, Q, P):
    if params.mode.peak_axis == "Q":
        return np.asarray(Q, dtype=float), np.asarray(P, dtype=float)
    return np.asarray(P, dtype=float), np.asarray(Q, dtype=float)


def wigner(params: CatWignerParams, Q, P):
    """Wigner function normalised to unit phase-space integral.

    Written as ``(2/N) G(x) G(y) [O cosh(xi x / var_x) +- R cos(mu y / var_y)]``
    with ``x`` along the peaks and ``y`` along the fringes; the cosh term is
    expanded into its two shifted Gaussians to avoid overflow.
    """
    x, y = _cat_frame(params, Q, P)
    vx, vy = params.var_peak, params.var_fringe
    xi, mu = params.mode.xi, params.mode.mu
    peaks = gaussian(x, xi, vx) + gaussian(x, -xi, vx)
    fringe = 2.0 * params.R * gaussian(x, 0.0, vx) * np.cos(mu * y / vy)
    return gaussian(y, 0.0, vy) * (peaks + params.sign * fringe) / params.norm


def peak_marginal(params: CatWignerParams, x):
    """Marginal along the peak axis: ``(p_L + p_R +- 2 e^{-2 xi0^2} Gamma) / N``."""
    vx, xi = params.var_peak, params.mode.xi
    body = gaussian(x, -xi, vx) + gaussian(x, xi, vx)
    vac = 2.0 * math.exp(-2.0 * params.xi0**2) * gaussian(x, 0.0, vx)
    return (body + params.sign * vac) / params.norm


def fringe_marginal(params: CatWignerParams, y):
    """Marginal along the fringe axis: ``(2/N) Gamma(y) [1 +- R cos(mu y / var)]``."""
    vy, mu = params.var_fringe, params.mode.mu
    y = np.asarray(y, dtype=float)
    osc = 1.0 + params.sign * params.R * np.cos(mu * y / vy)
    return 2.0 * gaussian(y, 0.0, vy) * osc / params.norm


def marginal_Q(params: CatWignerParams, Q):
    """Probability density of the physical Q quadrature."""
    if params.mode.peak_axis == "Q":
        return peak_marginal(params, Q)
    return fringe_marginal(params, Q)


def marginal_P(params: CatWignerParams, P):
    """Probability density of the physical P quadrature."""
    if params.mode.peak_axis == "P":
        return peak_marginal(params, P)
    return fringe_marginal(params, P)


def peak_distributions(params: CatWignerParams):
    """``((centre, var), (centre, var))`` of the left and right marginal peaks."""
    xi, v = abs(params.mode.xi), params.var_peak
    return (-xi, v), (xi, v)


def rho_coordinate(params: CatWignerParams, Q, Qp):
    """Density matrix ``<Q|rho|Q'>`` in the physical Q representation.

    Each Gaussian term ``G(q - q_k) G(p - p_k)`` of the Wigner function
    transforms to ``G(X - q_k) exp(2i p_k y - 2 var_p y^2)`` with
    ``X = (Q + Q')/2`` and ``y = Q - Q'``.
    """
    Q = np.asarray(Q, dtype=float)
    Qp = np.asarray(Qp, dtype=float)
    X = 0.5 * (Q + Qp)
    y = Q - Qp
    weights, centres, (vq, vp) = params.components()
    total = np.zeros(np.broadcast(X, y).shape, dtype=complex)
    for w, (cq, cp) in zip(weights, centres):
        total += w * gaussian(X, cq, vq) * np.exp(2j * cp * y - 2.0 * vp * y**2)
    return total.real


def negativity_point(params: CatWignerParams):
    """Phase-space point where the interference term of ``W_+`` is most negative.

    Returns ``None`` when the fringe displacement vanishes (no fringes).
    """
    mu = params.mode.mu
    if abs(mu) < 1e-12:
        return None
    y = math.pi * params.var_fringe / abs(mu)
    return (0.0, y) if params.mode.peak_axis == "Q" else (y, 0.0)
