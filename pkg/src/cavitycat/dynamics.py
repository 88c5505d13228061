"""Closed-form Gaussian-cat parameters of the system (S) and environment (E) modes.

The two cavity modes are coupled by the excitation-exchange Hamiltonian
``kappa * (a_S^dag a_E + a_E^dag a_S)`` and each is damped towards a thermal
reservoir. Damping rates are *amplitude* decay rates: a coherent amplitude in
an isolated mode decays as ``exp(-gamma t)``, which corresponds to a Lindblad
dissipator ``2 gamma (n + 1) D[a] + 2 gamma n D[a^dag]``.

Quadratures are ``Q = (a + a^dag)/2`` and ``P = (a - a^dag)/(2i)`` so the
vacuum variance is 1/4. The cat is prepared along Q in mode S. Because the
coupling carries a factor ``-i``, the part of the cat transferred into mode E
lies along the P quadrature of E while its interference fringes run along Q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import OverdampedError

__all__ = [
    "ExperimentConfig",
    "DerivedRates",
    "ModeParams",
    "derived_rates",
    "evolve",
    "evolve_at",
    "rescaled_time",
    "amplitude_factors",
]


def _parse_sign(sign) -> int:
    if sign in (1, "+", "plus", "+1"):
        return 1
    if sign in (-1, "-", "minus", "-1"):
        return -1
    raise ValueError(f"cat sign must be + or -, got {sign!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    """Physical knobs of one run.

    ``xi0`` is the real coherent amplitude of the prepared cat, ``r`` the
    squeezing of the environment vacuum (``r > 0`` squeezes Q), ``kappa`` the
    coupling rate, ``gamma_s``/``gamma_e`` amplitude damping rates and
    ``n_s``/``n_e`` the mean thermal occupations of the reservoirs.
    """

    xi0: float = 2.0
    r: float = 2.0
    kappa: float = 1.0
    gamma_s: float = 0.0
    gamma_e: float = 0.0
    n_s: float = 0.0
    n_e: float = 0.0
    sign: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sign", _parse_sign(self.sign))
        for name in ("xi0", "r", "kappa", "gamma_s", "gamma_e", "n_s", "n_e"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.xi0 < 0:
            raise ValueError("xi0 must be >= 0")
        if self.kappa <= 0:
            raise ValueError("kappa must be > 0")
        for name in ("gamma_s", "gamma_e", "n_s", "n_e"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.xi0 == 0 and self.sign < 0:
            raise ValueError("odd cat with xi0 = 0 is not a state")

    @property
    def undamped(self) -> bool:
        return self.gamma_s == 0 and self.gamma_e == 0

    def replace(self, **changes) -> "ExperimentConfig":
        values = {k: getattr(self, k) for k in self.__dataclass_fields__}
        values.update(changes)
        return ExperimentConfig(**values)


@dataclass(frozen=True)
class DerivedRates:
    lam: float
    gamma_plus: float
    gamma_minus: float
    eta_s: float
    eta_e: float


def derived_rates(config: ExperimentConfig) -> DerivedRates:
    """Rates entering the closed forms; raises for overdamped coupling."""
    gamma_minus = config.gamma_e - config.gamma_s
    lam_sq = 4.0 * config.kappa**2 - gamma_minus**2
    if lam_sq <= 0:
        raise OverdampedError(
            "overdamped regime unsupported: need 2*kappa > |gamma_e - gamma_s|"
        )
    return DerivedRates(
        lam=math.sqrt(lam_sq),
        gamma_plus=config.gamma_s + config.gamma_e,
        gamma_minus=gamma_minus,
        eta_s=config.gamma_s * (config.n_s + 0.5),
        eta_e=config.gamma_e * (config.n_e + 0.5),
    )


@dataclass(frozen=True)
class ModeParams:
    """Gaussian-cat parameters of one mode at one time.

    ``xi`` is the displacement of the coherent peaks along the peak axis and
    ``mu`` the interference displacement along the conjugate (fringe) axis.
    ``var_q`` and ``var_p`` are the physical quadrature variances of the mode.
    For mode S the peak axis is Q; for mode E it is P.
    """

    mode: str
    xi: float
    mu: float
    var_q: float
    var_p: float

    @property
    def peak_axis(self) -> str:
        return "Q" if self.mode == "S" else "P"

    @property
    def var_peak(self) -> float:
        return self.var_q if self.mode == "S" else self.var_p

    @property
    def var_fringe(self) -> float:
        return self.var_p if self.mode == "S" else self.var_q


def rescaled_time(G: float, kappa: float = 1.0) -> float:
    """Convert the dimensionless coupling time ``G = kappa t`` to ``t``."""
    if G < 0:
        raise ValueError("G must be >= 0")
    return G / kappa


def _damped_integrals(a: float, lam: float, t: float):
    # int_0^t exp(-a s) {1, cos(lam s), sin(lam s)} ds
    if a == 0:
        return t, math.sin(lam * t) / lam, (1.0 - math.cos(lam * t)) / lam
    e = math.exp(-a * t)
    i0 = -math.expm1(-a * t) / a
    den = a * a + lam * lam
    ic = (a - e * (a * math.cos(lam * t) - lam * math.sin(lam * t))) / den
    is_ = (lam - e * (a * math.sin(lam * t) + lam * math.cos(lam * t))) / den
    return i0, ic, is_


def amplitude_factors(config: ExperimentConfig, t: float):
    """Return the (S->S, S<->E, E->E) amplitude transfer factors at time ``t``.

    A coherent amplitude ``alpha`` in S becomes ``u_ss * alpha`` in S and
    ``-1j * u_se * alpha`` in E.
    """
    rates = derived_rates(config)
    lam, gm = rates.lam, rates.gamma_minus
    half = lam * t / 2.0
    env = math.exp(-rates.gamma_plus * t / 2.0) / lam
    f_plus = gm * math.sin(half) + lam * math.cos(half)
    f_minus = -gm * math.sin(half) + lam * math.cos(half)
    g = 2.0 * config.kappa * math.sin(half)
    return env * f_plus, env * g, env * f_minus


def _noise(config: ExperimentConfig, rates: DerivedRates, t: float):
    if rates.gamma_plus == 0:
        return 0.0, 0.0
    lam, gm, k2 = rates.lam, rates.gamma_minus, config.kappa**2
    i0, ic, is_ = _damped_integrals(rates.gamma_plus, lam, t)
    own = 2.0 * k2 * i0 + 0.5 * (lam**2 - gm**2) * ic
    cross = 2.0 * k2 * (i0 - ic)
    f_s = (rates.eta_s * (own + gm * lam * is_) + rates.eta_e * cross) / lam**2
    f_e = (rates.eta_e * (own - gm * lam * is_) + rates.eta_s * cross) / lam**2
    return f_s, f_e


def evolve(config: ExperimentConfig, t: float) -> tuple[ModeParams, ModeParams]:
    """Closed-form mode parameters of S and E after coupling time ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    rates = derived_rates(config)
    u_ss, u_se, u_ee = amplitude_factors(config, t)
    f_s, f_e = _noise(config, rates, t)

    vq_s0 = vp_s0 = 0.25
    vq_e0 = 0.25 * math.exp(-2.0 * config.r)
    vp_e0 = 0.25 * math.exp(2.0 * config.r)

    xi_s = u_ss * config.xi0
    xi_e = u_se * config.xi0
    s_mode = ModeParams(
        mode="S",
        xi=xi_s,
        mu=xi_s,
        var_q=u_ss**2 * vq_s0 + u_se**2 * vp_e0 + f_s,
        var_p=u_ss**2 * vp_s0 + u_se**2 * vq_e0 + f_s,
    )
    e_mode = ModeParams(
        mode="E",
        xi=xi_e,
        mu=-xi_e,
        var_q=u_ee**2 * vq_e0 + u_se**2 * vp_s0 + f_e,
        var_p=u_ee**2 * vp_e0 + u_se**2 * vq_s0 + f_e,
    )
    return s_mode, e_mode


def evolve_at(config: ExperimentConfig, G: float) -> tuple[ModeParams, ModeParams]:
    """Same as :func:`evolve` with the rescaled time ``G = kappa t``."""
    return evolve(config, rescaled_time(G, config.kappa))


def covariance(mode: ModeParams) -> np.ndarray:
    return np.diag([mode.var_q, mode.var_p])
