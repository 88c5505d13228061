"""Scalar decoherence measures and the relations between them."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dynamics import ExperimentConfig, evolve_at
from .exceptions import DegenerateError
from .phase_space import (
    CatWignerParams,
    cat_norm,
    fringe_marginal,
    initial_cat_params,
    wigner,
)

__all__ = [
    "MetricsRecord",
    "visibility",
    "visibility_from_wigner",
    "overlap_from_wigner",
    "overlap_integral",
    "distinguishability",
    "distinguishability_alt",
    "negativity",
    "purity",
    "renyi",
    "fidelity",
    "gaussian_sum_overlap",
    "vacuum_wigner_origin",
    "mode_record",
    "mode_metrics",
    "complementarity_checks",
]


@dataclass(frozen=True)
class MetricsRecord:
    mode: str
    G: float
    R: float
    O: float
    D: float
    D_alt: float
    N: float
    purity: float
    renyi: float
    fidelity: float

    @property
    def RD(self) -> float:
        return self.R * self.D

    def as_dict(self) -> dict:
        out = asdict(self)
        out["RD"] = self.RD
        return out


def visibility(p_plus0: float, p_minus0: float, xi0: float) -> float:
    """Fringe visibility from the fringe-quadrature densities at the origin."""
    if p_plus0 < 0 or p_minus0 < 0:
        raise ValueError("densities must be non-negative")
    a = cat_norm(xi0, 1) * p_plus0
    b = cat_norm(xi0, -1) * p_minus0
    if a + b == 0:
        raise DegenerateError("both origin densities vanish")
    return (a - b) / (a + b)


def _weighted_origin(w_plus, w_minus, w_vac, xi0):
    if not w_vac > 0:
        raise ValueError("vacuum reference Wigner value must be positive")
    return cat_norm(xi0, 1) * w_plus, cat_norm(xi0, -1) * w_minus


def visibility_from_wigner(w_plus: float, w_minus: float, w_vac: float, xi0: float) -> float:
    a, b = _weighted_origin(w_plus, w_minus, w_vac, xi0)
    return (a - b) / (4.0 * w_vac)


def overlap_from_wigner(w_plus: float, w_minus: float, w_vac: float, xi0: float) -> float:
    a, b = _weighted_origin(w_plus, w_minus, w_vac, xi0)
    return (a + b) / (4.0 * w_vac)


def overlap_integral(left, right) -> float:
    """Square root of the normalised overlap of two Gaussian marginal peaks.

    ``left`` and ``right`` are ``(centre, variance)``. The reference pair has
    the same variances with both centres moved to the origin, so the ratio of
    the two overlap integrals reduces to a Gaussian in the centre separation.
    """
    (a, va), (b, vb) = left, right
    return math.exp(-((a - b) ** 2) / (4.0 * (va + vb)))


def distinguishability(params: CatWignerParams) -> float:
    return params.D


def distinguishability_alt(O: float) -> float:
    if not 0.0 <= O <= 1.0:
        raise ValueError("overlap must lie in [0, 1]")
    return math.sqrt(1.0 - O * O)


def negativity(w_plus: float, w_minus: float, xi0: float) -> float:
    """Wigner-negativity parameter from the even/odd cat origin values.

    Equals ``R D exp(2 xi0^2)``: above 1 exactly when the even-cat Wigner
    function has negative regions.
    """
    a = cat_norm(xi0, 1) * w_plus
    b = cat_norm(xi0, -1) * w_minus
    if a + b == 0:
        raise DegenerateError("negativity undefined: N+W+ + N-W- = 0")
    return (a - b) / (a + b)


def purity(params: CatWignerParams) -> float:
    """``Tr rho^2 = pi * int W^2`` in closed form."""
    R, D, xi0 = params.R, params.D, params.xi0
    e2 = math.exp(-2.0 * xi0**2)
    bracket = 1.0 + R**2 + e2**2 * (1.0 + 1.0 / D**2) + params.sign * 4.0 * e2 * math.sqrt(R / D)
    return bracket / (2.0 * params.norm**2 * math.sqrt(params.mode.var_q * params.mode.var_p))


def renyi(P: float) -> float:
    if not 0.0 < P <= 1.0 + 1e-12:
        raise ValueError("purity must lie in (0, 1]")
    return -math.log(P)


def gaussian_sum_overlap(first: CatWignerParams, second: CatWignerParams) -> float:
    """``pi * int W_1 W_2 dQ dP`` = ``Tr rho_1 rho_2`` for two Gaussian-sum states.

    Uses ``int G_A(x - a) G_B(x - b) dx = G_{A+B}(a - b)`` term by term.
    """
    w1, c1, v1 = first.components()
    w2, c2, v2 = second.components()
    vs = v1 + v2
    d = c1[:, None, :] - c2[None, :, :]
    expo = -0.5 * (d[..., 0] ** 2 / vs[0] + d[..., 1] ** 2 / vs[1])
    pair = np.exp(expo) / (2.0 * math.pi * math.sqrt(vs[0] * vs[1]))
    total = np.sum(w1[:, None] * w2[None, :] * pair)
    return float(math.pi * total.real)


def fidelity(params: CatWignerParams, reference: CatWignerParams | None = None) -> float:
    """``<Psi|rho(t)|Psi>`` with the freshly prepared cat of the same parity."""
    if reference is None:
        reference = initial_cat_params(params.xi0, params.sign)
    return gaussian_sum_overlap(reference, params)


def vacuum_wigner_origin(params: CatWignerParams) -> float:
    """Origin Wigner value of the same evolution with the cat replaced by vacuum."""
    return 1.0 / (2.0 * math.pi * math.sqrt(params.mode.var_q * params.mode.var_p))


def mode_record(params: CatWignerParams, G: float) -> MetricsRecord:
    even = CatWignerParams(params.mode, params.xi0, 1)
    R = params.R
    O = params.O
    if params.xi0 > 0:
        odd = CatWignerParams(params.mode, params.xi0, -1)
        N = negativity(float(wigner(even, 0.0, 0.0)), float(wigner(odd, 0.0, 0.0)), params.xi0)
    else:
        N = negativity(float(wigner(even, 0.0, 0.0)), 0.0, 0.0)
    P = purity(params)
    return MetricsRecord(
        mode=params.mode.mode,
        G=G,
        R=R,
        O=O,
        D=params.D,
        D_alt=distinguishability_alt(min(O, 1.0)),
        N=N,
        purity=P,
        renyi=renyi(min(P, 1.0)),
        fidelity=fidelity(params),
    )


def mode_metrics(config: ExperimentConfig, G: float) -> tuple[MetricsRecord, MetricsRecord]:
    """Closed-form metrics of (S, E) at rescaled time ``G``."""
    s_mode, e_mode = evolve_at(config, G)
    return (
        mode_record(CatWignerParams(s_mode, config.xi0, config.sign), G),
        mode_record(CatWignerParams(e_mode, config.xi0, config.sign), G),
    )


def visibility_via_marginals(params: CatWignerParams) -> float:
    plus = CatWignerParams(params.mode, params.xi0, 1)
    minus = CatWignerParams(params.mode, params.xi0, -1)
    return visibility(float(fringe_marginal(plus, 0.0)), float(fringe_marginal(minus, 0.0)), params.xi0)


def complementarity_checks(
    s: MetricsRecord, e: MetricsRecord, xi0: float, unitary: bool, tol: float = 1e-8
) -> dict[str, bool]:
    """Evaluate the visibility/distinguishability/negativity relations.

    Equalities that only hold for unitary evolution are reported only when
    ``unitary`` is true. The ordered chain is checked with S as the mode that
    holds the larger share of the cat; ``chain_literal`` keeps S and E fixed.
    """
    e1 = math.exp(-2.0 * xi0**2)
    e2 = e1 * e1
    prod = s.RD * e.RD
    checks = {
        "product_bound": prod <= e2 * (1.0 + tol),
        "visibility_overlap": s.R * e.R <= s.O * e.O * (1.0 + tol),
        "negativity_product": s.N * e.N <= 1.0 + tol,
        "alt_relation": abs((s.R / s.N) ** 2 + s.D_alt**2 - 1.0) <= tol
        and abs((e.R / e.N) ** 2 + e.D_alt**2 - 1.0) <= tol,
        "rd_negativity": abs(s.RD - e1 * s.N) <= tol and abs(e.RD - e1 * e.N) <= tol,
    }
    if unitary:
        hi, lo = (s, e) if s.RD >= e.RD else (e, s)
        rel = 1.0 + tol
        checks["product_equality"] = abs(prod / e2 - 1.0) <= tol
        checks["visibility_overlap_equality"] = abs(s.R * e.R - s.O * e.O) <= tol * max(s.O * e.O, 1e-300)
        checks["negativity_equality"] = abs(s.N * e.N - 1.0) <= tol
        checks["chain_ordered"] = e2 <= lo.RD * rel and lo.RD <= e1 * rel and e1 <= hi.RD * rel and hi.RD <= rel
        checks["chain_literal"] = e2 <= e.RD * rel and e.RD <= e1 * rel and e1 <= s.RD * rel and s.RD <= rel
    return checks
