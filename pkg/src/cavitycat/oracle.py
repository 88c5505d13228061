"""Brute-force two-mode Fock-space simulator used as ground truth.

The joint state lives in the Fock basis ``|k, m>`` (k photons in S, m in E)
truncated by total photon number ``k + m <= nmax``. The exchange Hamiltonian
conserves ``k + m``, so the truncated space is exactly invariant under the
coherent part of the evolution; at zero temperature the loss channels only
lower the photon number, so the only truncation error is the discarded tail
of the initial state.

Two propagation paths are provided:

* undamped: pure state, propagated sector by sector with the exact
  eigendecomposition of the tridiagonal sector Hamiltonian;
* damped: density matrix stored as blocks ``rho[N, N']`` between sectors,
  integrated with classical RK4 in the interaction picture, where only the
  (slow) dissipator remains and the rotated jump operators are
  ``c_S(t) = cos(kt) a_S - i sin(kt) a_E`` and ``c_E(t) = cos(kt) a_E - i sin(kt) a_S``.

Damping rates are amplitude rates, matching :mod:`cavitycat.dynamics`:
``L = 2 gamma (n + 1) D[a] + 2 gamma n D[a^dag]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import gammaln

from .dynamics import ExperimentConfig, rescaled_time
from .exceptions import OracleBudgetError, TruncationError
from .metrics import (
    MetricsRecord,
    distinguishability_alt,
    negativity,
    overlap_from_wigner,
    renyi,
    visibility_from_wigner,
)

__all__ = [
    "OracleConfig",
    "PureTwoModeState",
    "BlockDensityMatrix",
    "cat_populations",
    "squeezed_populations",
    "required_nmax",
    "tail_mass",
    "build_cat",
    "build_squeezed",
    "build_coherent",
    "initial_state",
    "evolve_unitary",
    "evolve_lindblad",
    "evolve_oracle",
    "hermite_functions",
    "wigner_parity",
    "wigner_grid",
    "wigner_fourier",
    "marginal_Q",
    "marginal_P",
    "coordinate_rho",
    "oracle_metrics",
    "oracle_mode_metrics",
]

MEMORY_BUDGET_BYTES = 3.0e9
_POP_CAP = 4000


# ---------------------------------------------------------------- states


def _coherent_log_amplitudes(alpha: float, dim: int) -> np.ndarray:
    n = np.arange(dim)
    with np.errstate(divide="ignore"):
        return -0.5 * alpha**2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)


def build_coherent(alpha: complex, dim: int) -> np.ndarray:
    """Coherent-state amplitudes ``<n|alpha>`` for ``n < dim`` (not renormalised)."""
    n = np.arange(dim)
    if alpha == 0:
        out = np.zeros(dim, dtype=complex)
        out[0] = 1.0
        return out
    mag = _coherent_log_amplitudes(abs(alpha), dim)
    return np.exp(mag) * np.exp(1j * n * np.angle(alpha))


def cat_populations(xi0: float, sign: int, dim: int) -> np.ndarray:
    """Exact Fock populations of the normalised cat for ``n < dim``.

    ``sign = 0`` gives the coherent state ``|xi0>`` itself.
    """
    if xi0 == 0:
        out = np.zeros(dim)
        out[0] = 1.0
        return out
    n = np.arange(dim)
    logp = 2.0 * _coherent_log_amplitudes(xi0, dim)
    parity = 1.0 + sign * (-1.0) ** n
    norm = 2.0 * (1.0 + sign * math.exp(-2.0 * xi0**2))
    return 2.0 * parity * np.exp(logp) / norm


def _squeezed_log_amplitudes(r: float, dim: int):
    # <2m|S(r)|0> = (-tanh r)^m sqrt((2m)!) / (2^m m! sqrt(cosh r))
    m = np.arange((dim + 1) // 2)
    if r == 0:
        return m, np.where(m == 0, 0.0, -np.inf), np.ones(m.size)
    logmag = (
        m * math.log(math.tanh(abs(r)))
        + 0.5 * gammaln(2 * m + 1)
        - m * math.log(2.0)
        - gammaln(m + 1)
        - 0.5 * math.log(math.cosh(r))
    )
    signs = (-1.0) ** m if r > 0 else np.ones_like(m, dtype=float)
    return m, logmag, signs


def build_squeezed(r: float, dim: int) -> np.ndarray:
    """Squeezed vacuum ``exp(r/2 (a^2 - a^dag^2))|0>``; ``r > 0`` squeezes Q."""
    m, logmag, signs = _squeezed_log_amplitudes(r, dim)
    out = np.zeros(dim, dtype=complex)
    idx = 2 * m
    keep = idx < dim
    out[idx[keep]] = signs[keep] * np.exp(logmag[keep])
    return out


def squeezed_populations(r: float, dim: int) -> np.ndarray:
    return np.abs(build_squeezed(r, dim)) ** 2


def build_cat(xi0: float, sign: int, dim: int, tol: float | None = None) -> np.ndarray:
    """Normalised cat ``(|xi0> + sign |-xi0>) / sqrt(N)`` truncated to ``dim`` levels.

    With ``tol`` set, raises :class:`TruncationError` if the discarded
    population exceeds it.
    """
    if xi0 == 0:
        if sign < 0:
            raise ValueError("odd cat with xi0 = 0 is not a state")
        return build_coherent(0.0, dim)
    if tol is not None:
        lost = cat_populations(xi0, sign, max(_POP_CAP, 2 * dim))[dim:].sum()
        if lost > tol:
            raise TruncationError(f"cat needs more than {dim} levels (lost {lost:.2e})")
    plus = build_coherent(xi0, dim)
    n = np.arange(dim)
    vec = plus * (1.0 + sign * (-1.0) ** n)
    return vec / math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * xi0**2)))


def tail_mass(p_s: np.ndarray, p_e: np.ndarray, nmax: int) -> float:
    """Probability that ``k + m > nmax`` for independent photon numbers."""
    # summed from the far end so tiny tails keep their relative precision
    total = np.convolve(p_s, p_e)
    return float(total[nmax + 1 :][::-1].sum())


def required_nmax(xi0: float, sign: int, r: float, tol: float = 1e-10) -> int:
    """Smallest total-photon cutoff whose discarded initial tail is below ``tol``."""
    p_s = cat_populations(xi0, sign, _POP_CAP)
    p_e = squeezed_populations(r, _POP_CAP)
    total = np.convolve(p_s, p_e)[:_POP_CAP]
    # tail[n] = P(k + m > n), accumulated from the far end
    tail = np.append(np.cumsum(total[::-1])[::-1][1:], 0.0)
    hits = np.nonzero(tail < tol)[0]
    if hits.size == 0 or total[-50:].sum() > tol:
        raise TruncationError("state too large for the Fock oracle")
    nmax = int(hits[0])
    # the per-mode rule is a floor, never a ceiling
    floor = math.ceil(xi0**2 + 6.0 * xi0 + 10.0)
    floor = max(floor, math.ceil(10.0 + 8.0 * math.sinh(r) ** 2))
    return max(nmax, min(floor, nmax + 10))


# ------------------------------------------------------ two-mode containers


def _sector_index(nmax: int, n: int):
    k = np.arange(n + 1)
    return k, n - k


def _hop(n: int) -> np.ndarray:
    # <k+1, n-k-1| a_S^dag a_E |k, n-k>
    k = np.arange(n)
    return np.sqrt((k + 1.0) * (n - k))


@dataclass
class PureTwoModeState:
    """Pure state as amplitude matrix ``amp[k, m]`` with ``k + m <= nmax``."""

    amp: np.ndarray
    nmax: int

    def sector(self, n: int) -> np.ndarray:
        k, m = _sector_index(self.nmax, n)
        return self.amp[k, m]

    def trace(self) -> float:
        return float(np.vdot(self.amp, self.amp).real)

    def reduced(self, mode: str) -> np.ndarray:
        if mode == "S":
            return self.amp @ self.amp.conj().T
        return self.amp.T @ self.amp.conj()

    def global_purity(self) -> float:
        return self.trace() ** 2

    def overlap(self, other: "PureTwoModeState") -> float:
        """``|<self|other>|^2``."""
        return float(abs(np.vdot(self.amp, other.amp)) ** 2)

    def q_classes(self) -> list[int]:
        """Photon-number differences ``N - N'`` present in the pure-state projector."""
        occupied = [n for n in range(self.nmax + 1) if np.any(self.sector(n) != 0)]
        return sorted({a - b for a in occupied for b in occupied if a >= b})

    def to_blocks(self, q_classes=None) -> "BlockDensityMatrix":
        vecs = [self.sector(n) for n in range(self.nmax + 1)]
        if q_classes is None:
            q_classes = self.q_classes()
        blocks = {}
        for q in q_classes:
            for n2 in range(self.nmax + 1 - q):
                blocks[(n2 + q, n2)] = np.outer(vecs[n2 + q], vecs[n2].conj())
        return BlockDensityMatrix(blocks, self.nmax, tuple(q_classes))

    def to_dense(self) -> np.ndarray:
        d = self.nmax + 1
        vec = np.zeros((d, d), dtype=complex)
        for n in range(d):
            k, m = _sector_index(self.nmax, n)
            vec[k, m] = self.sector(n)
        v = vec.ravel()
        return np.outer(v, v.conj())


@dataclass
class BlockDensityMatrix:
    """Two-mode density matrix stored as sector blocks ``rho[(N, N')]``, ``N >= N'``.

    Block ``(N, N')`` has shape ``(N + 1, N' + 1)`` and is indexed by the
    S photon numbers ``k`` and ``k'``. Only the photon-number differences
    ``N - N'`` listed in ``q_classes`` are kept; the dynamics never mixes them.
    """

    blocks: dict
    nmax: int
    q_classes: tuple = field(default=(0,))

    def block(self, n: int, n2: int) -> np.ndarray:
        if n >= n2:
            return self.blocks[(n, n2)]
        return self.blocks[(n2, n)].conj().T

    def trace(self) -> float:
        return float(sum(np.trace(b).real for (n, n2), b in self.blocks.items() if n == n2))

    def reduced(self, mode: str) -> np.ndarray:
        d = self.nmax + 1
        out = np.zeros((d, d), dtype=complex)
        for (n, n2), b in self.blocks.items():
            q = n - n2
            if mode == "S":
                # same m on both sides: k' = k - q
                k = np.arange(q, n + 1)
                vals = b[k, k - q]
                rows, cols = k, k - q
            else:
                # same k on both sides: m = n - k, m' = n2 - k
                k = np.arange(n2 + 1)
                vals = b[k, k]
                rows, cols = n - k, n2 - k
            out[rows, cols] += vals
            if q:
                out[cols, rows] += vals.conj()
        return out

    def global_purity(self) -> float:
        total = 0.0
        for (n, n2), b in self.blocks.items():
            w = 1.0 if n == n2 else 2.0
            total += w * float(np.vdot(b, b).real)
        return total

    def expectation_pure(self, state: PureTwoModeState) -> float:
        """``<psi|rho|psi>`` for a pure two-mode state."""
        vecs = [state.sector(n) for n in range(self.nmax + 1)]
        total = 0.0
        for (n, n2), b in self.blocks.items():
            val = np.vdot(vecs[n], b @ vecs[n2])
            total += val.real if n == n2 else 2.0 * val.real
        return float(total)

    def to_dense(self) -> np.ndarray:
        d = self.nmax + 1
        rho = np.zeros((d, d, d, d), dtype=complex)
        for (n, n2), b in self.blocks.items():
            k, m = _sector_index(self.nmax, n)
            k2, m2 = _sector_index(self.nmax, n2)
            for i in range(n + 1):
                rho[k[i], m[i], k2, m2] = b[i]
                if n != n2:
                    rho[k2, m2, k[i], m[i]] = b[i].conj()
        return rho.reshape(d * d, d * d)

    def nbytes(self) -> int:
        return sum(b.nbytes for b in self.blocks.values())


def block_memory(nmax: int, q_classes) -> int:
    """Bytes for one complex block density matrix."""
    total = 0
    for q in q_classes:
        for n2 in range(nmax + 1 - q):
            total += (n2 + q + 1) * (n2 + 1)
    return 16 * total


# ----------------------------------------------------------- preparation


@dataclass(frozen=True)
class OracleConfig:
    """Numerical settings of an oracle run.

    ``nmax`` is the total-photon cutoff (``None`` selects it from ``tol``),
    ``dt`` the RK4 step in units of ``1/kappa`` for damped runs.
    """

    nmax: int | None = None
    tol: float = 1e-10
    dt: float = 0.05
    memory_budget: float = MEMORY_BUDGET_BYTES

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.nmax is not None and self.nmax < 1:
            raise ValueError("nmax must be >= 1")


def initial_state(
    config: ExperimentConfig, nmax: int, tol: float | None = None, system: str = "cat"
) -> PureTwoModeState:
    """Product of a system state and the squeezed vacuum, cut at ``k + m <= nmax``.

    ``system`` is ``"cat"`` (the configured cat), ``"coherent"`` (``|xi0>``)
    or ``"vacuum"``. The kept part is renormalised; ``tol`` bounds the
    discarded weight.
    """
    d = nmax + 1
    p_s = np.zeros(_POP_CAP)
    if system == "vacuum":
        sys_vec = build_coherent(0.0, d)
        p_s[0] = 1.0
    elif system == "coherent":
        sys_vec = build_coherent(config.xi0, d)
        p_s = np.abs(build_coherent(config.xi0, _POP_CAP)) ** 2
    elif system == "cat":
        sys_vec = build_cat(config.xi0, config.sign, d)
        p_s = cat_populations(config.xi0, config.sign, _POP_CAP)
    else:
        raise ValueError(f"unknown system state {system!r}")
    sq = build_squeezed(config.r, d)
    if tol is not None:
        lost = tail_mass(p_s, squeezed_populations(config.r, _POP_CAP), nmax)
        if lost > tol:
            raise TruncationError(
                f"truncation not converged: nmax={nmax} discards {lost:.3e} > {tol:.1e}"
            )
    amp = np.outer(sys_vec, sq)
    k, m = np.indices(amp.shape)
    amp[k + m > nmax] = 0.0
    amp /= math.sqrt(np.vdot(amp, amp).real)
    return PureTwoModeState(amp, nmax)


# ------------------------------------------------------------- evolution


class _SectorPropagator:
    """Exact ``exp(-i H t)`` on each photon-number sector."""

    def __init__(self, nmax: int, kappa: float):
        self.kappa = kappa
        self.eig = []
        for n in range(nmax + 1):
            if n == 0:
                self.eig.append((np.zeros(1), np.ones((1, 1))))
                continue
            e, v = eigh_tridiagonal(np.zeros(n + 1), kappa * _hop(n))
            self.eig.append((e, v))

    def unitary(self, n: int, t: float) -> np.ndarray:
        e, v = self.eig[n]
        return (v * np.exp(-1j * e * t)) @ v.T

    def apply(self, n: int, vec: np.ndarray, t: float) -> np.ndarray:
        e, v = self.eig[n]
        return v @ (np.exp(-1j * e * t) * (v.T @ vec))


def evolve_unitary(state: PureTwoModeState, kappa: float, times) -> list[PureTwoModeState]:
    prop = _SectorPropagator(state.nmax, kappa)
    out = []
    for t in np.atleast_1d(times):
        amp = np.zeros_like(state.amp)
        for n in range(state.nmax + 1):
            k, m = _sector_index(state.nmax, n)
            amp[k, m] = prop.apply(n, state.sector(n), float(t))
        out.append(PureTwoModeState(amp, state.nmax))
    return out


class _Dissipator:
    """Interaction-picture Lindblad right-hand side on sector blocks."""

    def __init__(self, config: ExperimentConfig, nmax: int):
        self.nmax = nmax
        self.kappa = config.kappa
        self.channels = []
        for mode, gamma, nth in (("S", config.gamma_s, config.n_s), ("E", config.gamma_e, config.n_e)):
            if gamma > 0:
                self.channels.append((mode, 2.0 * gamma * (nth + 1.0), 2.0 * gamma * nth))
        self.sqrt = np.sqrt(np.arange(nmax + 2, dtype=float))
        self.hop = [_hop(n) for n in range(nmax + 1)]

    def _coeffs(self, mode: str, t: float):
        c, s = math.cos(self.kappa * t), math.sin(self.kappa * t)
        return (c, -1j * s) if mode == "S" else (-1j * s, c)

    def _weights(self, t: float, with_up: bool):
        wd = wn = const = 0.0
        cross = 0.0 + 0.0j
        for mode, down, up in self.channels:
            a, b = self._coeffs(mode, t)
            w = down + up if with_up else down
            wd += w * abs(a) ** 2
            wn += w * abs(b) ** 2
            cross += w * np.conj(a) * b
            const += up if with_up else 0.0
        return wd, wn, cross, const

    def _k_operator(self, t: float):
        # -K/2 with K = sum_i down_i c_i^dag c_i + up_i c_i c_i^dag (tridiagonal per
        # sector); raising out of the top sector is truncated, so c c^dag is
        # dropped there
        full = self._weights(t, with_up=True)
        top = self._weights(t, with_up=False)
        out = []
        for n in range(self.nmax + 1):
            wd, wn, cross, const = top if n == self.nmax else full
            k = np.arange(n + 1)
            diag = -0.5 * (wd * k + wn * (n - k) + const)
            lower = -0.5 * cross * self.hop[n]
            out.append((diag, lower, np.conj(lower)))
        return out

    def _jumps(self, t: float):
        # per sector n: coefficient vectors of c (sector n+1 -> n) and c^dag (n-1 -> n)
        sq = self.sqrt
        down_ops, up_ops = [], []
        for mode, down, up in self.channels:
            a, c = self._coeffs(mode, t)
            root = math.sqrt(down)
            d = []
            for n in range(self.nmax):
                k = np.arange(n + 1)
                d.append((root * a * sq[k + 1], root * c * sq[n + 1 - k]))
            down_ops.append(d)
            if up > 0:
                root = math.sqrt(up)
                u = [None]
                for n in range(1, self.nmax + 1):
                    u.append((root * np.conj(a) * sq[1 : n + 1], root * np.conj(c) * sq[n - np.arange(n)]))
                up_ops.append(u)
        return down_ops, up_ops

    def __call__(self, t: float, blocks: dict) -> dict:
        kop = self._k_operator(t)
        down_ops, up_ops = self._jumps(t)
        out = {}
        for (n, n2), b in blocks.items():
            d1, l1, u1 = kop[n]
            d2, l2, u2 = kop[n2]
            res = (d1[:, None] + d2[None, :]) * b
            if n:
                res[1:] += l1[:, None] * b[:-1]
                res[:-1] += u1[:, None] * b[1:]
            if n2:
                res[:, 1:] += b[:, :-1] * u2[None, :]
                res[:, :-1] += b[:, 1:] * l2[None, :]
            src = blocks.get((n + 1, n2 + 1))
            if src is not None:
                for ops in down_ops:
                    ra, rc = ops[n]
                    x = ra[:, None] * src[1:] + rc[:, None] * src[:-1]
                    ca, cc = ops[n2]
                    res += x[:, 1:] * ca.conj()[None, :] + x[:, :-1] * cc.conj()[None, :]
            if n2 >= 1 and up_ops:
                src = blocks[(n - 1, n2 - 1)]
                for ops in up_ops:
                    ra, rc = ops[n]
                    x = np.zeros((n + 1, n2), dtype=complex)
                    x[1:] += ra[:, None] * src
                    x[:-1] += rc[:, None] * src
                    ca, cc = ops[n2]
                    res[:, 1:] += x * ca.conj()[None, :]
                    res[:, :-1] += x * cc.conj()[None, :]
            out[(n, n2)] = res
        return out


@dataclass
class ReducedStates:
    """Single-mode reduced states of a two-mode state (what metrics need)."""

    rho_s: np.ndarray
    rho_e: np.ndarray
    total_trace: float

    def reduced(self, mode: str) -> np.ndarray:
        return self.rho_s if mode == "S" else self.rho_e

    def trace(self) -> float:
        return self.total_trace


def _rk4_step(rhs, t: float, h: float, y: dict) -> dict:
    # classical RK4 holding at most four block sets at once
    acc = {key: v.copy() for key, v in y.items()}
    stage = y
    plan = ((0.0, 0.5, 1.0 / 6.0), (0.5, 0.5, 1.0 / 3.0), (0.5, 1.0, 1.0 / 3.0), (1.0, None, 1.0 / 6.0))
    for offset, c_next, w in plan:
        k = rhs(t + offset * h, stage)
        del stage
        for key, v in k.items():
            acc[key] += (w * h) * v
        if c_next is not None:
            stage = {key: y[key] + (c_next * h) * k[key] for key in y}
        del k
    return acc


def evolve_lindblad(
    state: PureTwoModeState, config: ExperimentConfig, times, dt: float = 0.05,
    memory_budget: float = MEMORY_BUDGET_BYTES, keep: str = "full",
):
    """Damped evolution sampled at physical ``times`` (non-decreasing).

    Returns lab-frame :class:`BlockDensityMatrix` objects, or with
    ``keep="reduced"`` only the two single-mode reduced states, which avoids
    holding one full copy per requested time.
    """
    if keep not in ("full", "reduced"):
        raise ValueError("keep must be 'full' or 'reduced'")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise ValueError("times must be non-negative and non-decreasing")
    q_classes = state.q_classes()
    copies = 4 + (len(times) if keep == "full" else 0)
    need = copies * block_memory(state.nmax, q_classes)
    if need > memory_budget:
        raise OracleBudgetError(
            f"damped oracle at nmax={state.nmax} needs ~{need / 1e9:.1f} GB "
            f"(budget {memory_budget / 1e9:.1f} GB)"
        )
    rho = state.to_blocks(q_classes)
    rhs = _Dissipator(config, state.nmax)
    prop = _SectorPropagator(state.nmax, config.kappa)
    y = rho.blocks
    del rho
    t = 0.0
    out = []
    for target in times:
        span = target - t
        steps = int(math.ceil(span / dt - 1e-9)) if span > 0 else 0
        h = span / steps if steps else 0.0
        for _ in range(steps):
            y = _rk4_step(rhs, t, h, y)
            t += h
        t = float(target)
        units = [prop.unitary(n, t) for n in range(state.nmax + 1)]
        if keep == "full":
            lab = {key: units[key[0]] @ b @ units[key[1]].conj().T for key, b in y.items()}
            out.append(BlockDensityMatrix(lab, state.nmax, tuple(state_q(y))))
        else:
            acc = BlockDensityMatrix({}, state.nmax)
            rho_s = np.zeros((state.nmax + 1,) * 2, dtype=complex)
            rho_e = np.zeros_like(rho_s)
            trace = 0.0
            for key, b in y.items():
                acc.blocks = {key: units[key[0]] @ b @ units[key[1]].conj().T}
                rho_s += acc.reduced("S")
                rho_e += acc.reduced("E")
                trace += acc.trace()
            out.append(ReducedStates(rho_s, rho_e, trace))
    return out


def state_q(blocks: dict):
    return sorted({n - n2 for n, n2 in blocks})


def evolve_oracle(
    config: ExperimentConfig, G_values, oracle: OracleConfig = OracleConfig(),
    system: str = "cat", keep: str = "full",
):
    """Prepare the initial product state and evolve it to each ``G``.

    Returns a list of :class:`PureTwoModeState` (undamped) or, for damped
    runs, :class:`BlockDensityMatrix` / :class:`ReducedStates` per ``keep``.
    """
    nmax = oracle.nmax
    if nmax is None:
        if system == "cat":
            nmax = required_nmax(config.xi0, config.sign, config.r, oracle.tol)
        else:
            nmax = required_nmax(config.xi0 if system == "coherent" else 0.0, 0, config.r, oracle.tol)
    psi0 = initial_state(config, nmax, tol=oracle.tol, system=system)
    times = [rescaled_time(g, config.kappa) for g in np.atleast_1d(G_values)]
    if config.undamped:
        return evolve_unitary(psi0, config.kappa, times)
    return evolve_lindblad(
        psi0, config, times, dt=oracle.dt, memory_budget=oracle.memory_budget, keep=keep
    )


# --------------------------------------------------- single-mode readouts


def hermite_functions(nmax: int, x) -> np.ndarray:
    """``<Q|n>`` for ``n <= nmax`` with ``Q = (a + a^dag)/2``; shape ``(nmax+1, len(x))``."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    X = math.sqrt(2.0) * x
    out = np.empty((nmax + 1, x.size))
    out[0] = math.pi**-0.25 * np.exp(-0.5 * X**2)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * X * out[0]
    for n in range(1, nmax):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * X * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out * 2.0**0.25


def marginal_Q(rho: np.ndarray, Q) -> np.ndarray:
    psi = hermite_functions(rho.shape[0] - 1, Q)
    return np.einsum("mx,mn,nx->x", psi, rho, psi).real


def marginal_P(rho: np.ndarray, P) -> np.ndarray:
    # <P|n> = (-i)^n <Q=P|n>
    n = np.arange(rho.shape[0])
    phase = (-1j) ** n
    psi = hermite_functions(rho.shape[0] - 1, P) * phase[:, None]
    return np.einsum("mx,mn,nx->x", psi, rho, psi.conj()).real


def coordinate_rho(rho: np.ndarray, Q, Qp) -> np.ndarray:
    """``<Q|rho|Q'>`` (real part) on the broadcast of ``Q`` and ``Qp``."""
    Q, Qp = np.broadcast_arrays(np.asarray(Q, dtype=float), np.asarray(Qp, dtype=float))
    nmax = rho.shape[0] - 1
    a = hermite_functions(nmax, Q.ravel())
    b = hermite_functions(nmax, Qp.ravel())
    return np.einsum("mx,mn,nx->x", a, rho, b).real.reshape(Q.shape)


def _annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1)


def wigner_parity(rho: np.ndarray, Q: float, P: float) -> float:
    """Wigner value from the displaced-parity expectation ``(2/pi) <D Pi D^dag>``."""
    d = rho.shape[0]
    parity = (-1.0) ** np.arange(d)
    beta = complex(Q, P)
    if beta == 0:
        return float(2.0 / math.pi * np.sum(parity * np.diag(rho).real))
    amp = abs(beta)
    pad = int(4.0 * amp * math.sqrt(d) + 4.0 * amp**2 + 40)
    big = d + pad
    a = _annihilation(big)
    disp = expm(beta * a.conj().T - np.conj(beta) * a)[:d, :]
    shifted = disp.conj().T @ rho @ disp
    par = (-1.0) ** np.arange(big)
    return float(2.0 / math.pi * np.sum(par * np.diag(shifted).real))


def wigner_grid(rho: np.ndarray, Q, P) -> np.ndarray:
    """Displaced-parity Wigner values on the grid ``Q x P``, shape ``(len(Q), len(P))``.

    Same quantity as :func:`wigner_parity`, but ``D(Q + iP)`` is split into
    ``D(Q) D(iP)`` (the phase cancels) and both factors come from a single
    eigendecomposition of the tridiagonal ``a + a^dag`` in the padded space.
    """
    Q = np.atleast_1d(np.asarray(Q, dtype=float))
    P = np.atleast_1d(np.asarray(P, dtype=float))
    d = rho.shape[0]
    amp = math.hypot(np.abs(Q).max(), np.abs(P).max())
    big = d + int(4.0 * amp * math.sqrt(d) + 4.0 * amp**2 + 40)
    lam, vec = eigh_tridiagonal(np.zeros(big), np.sqrt(np.arange(1, big, dtype=float)))
    # exp(x (a^dag - a)) = S exp(-i x (a + a^dag)) S^dag with S = diag(i^n)
    s = (1j) ** np.arange(big)
    left = s[:d, None] * vec[:d]
    right = vec.T * s.conj()[None, :]
    par = (-1.0) ** np.arange(big)
    out = np.empty((Q.size, P.size))
    for i, x in enumerate(Q):
        dx = (left * np.exp(-1j * x * lam)) @ right
        for j, y in enumerate(P):
            disp = (dx @ vec) * np.exp(1j * y * lam) @ vec.T
            cols = rho @ disp
            out[i, j] = 2.0 / math.pi * np.sum(par * np.einsum("mk,mk->k", disp.conj(), cols).real)
    return out


def wigner_fourier(rho: np.ndarray, Q: float, P: float, points: int = 4001) -> float:
    """Wigner value from ``(1/pi) int rho(Q + y/2, Q - y/2) exp(-2iPy) dy``."""
    d = rho.shape[0]
    half = 2.0 * (math.sqrt(d + 1.0) + 6.0)
    y = np.linspace(-half, half, points)
    a = hermite_functions(d - 1, Q + 0.5 * y)
    b = hermite_functions(d - 1, Q - 0.5 * y)
    kernel = np.einsum("mx,mn,nx->x", a, rho, b)
    integrand = kernel * np.exp(-2j * P * y)
    return float(np.trapezoid(integrand, y).real / math.pi)


# ------------------------------------------------------------- metrics


def oracle_metrics(
    rho_plus: np.ndarray,
    rho_minus: np.ndarray | None,
    rho_vac: np.ndarray,
    rho_signed: np.ndarray,
    xi0: float,
    sign: int,
    mode: str,
    G: float,
) -> MetricsRecord:
    """All scalar metrics of one mode from reduced density matrices.

    ``rho_plus``/``rho_minus`` come from even/odd cat inputs, ``rho_vac`` from
    the same evolution with the cat replaced by vacuum, ``rho_signed`` is the
    run whose purity and fidelity are reported.
    """
    w_plus = wigner_parity(rho_plus, 0.0, 0.0)
    w_minus = wigner_parity(rho_minus, 0.0, 0.0) if rho_minus is not None else 0.0
    w_vac = wigner_parity(rho_vac, 0.0, 0.0)
    R = visibility_from_wigner(w_plus, w_minus, w_vac, xi0)
    O = overlap_from_wigner(w_plus, w_minus, w_vac, xi0)
    D = math.exp(-2.0 * xi0**2) / O
    N = negativity(w_plus, w_minus, xi0)
    P = float(np.vdot(rho_signed, rho_signed).real)
    ref = build_cat(xi0, sign, rho_signed.shape[0])
    F = float(np.vdot(ref, rho_signed @ ref).real)
    return MetricsRecord(
        mode=mode, G=G, R=R, O=O, D=D,
        D_alt=distinguishability_alt(min(max(O, 0.0), 1.0)),
        N=N, purity=P, renyi=renyi(min(P, 1.0)), fidelity=F,
    )


def oracle_mode_metrics(
    config: ExperimentConfig, G_values, oracle: OracleConfig = OracleConfig()
) -> list[tuple[MetricsRecord, MetricsRecord]]:
    """Oracle counterpart of :func:`cavitycat.metrics.mode_metrics` on a G grid.

    Runs the even cat, the odd cat and the vacuum reference through the same
    evolution, so it costs three simulations.
    """
    G_values = list(np.atleast_1d(G_values))
    if oracle.nmax is None:
        signs = (1, -1) if config.xi0 > 0 else (1,)
        nmax = max(required_nmax(config.xi0, s, config.r, oracle.tol) for s in signs)
        oracle = replace(oracle, nmax=nmax)
    run = lambda cfg, **kw: evolve_oracle(cfg, G_values, oracle, keep="reduced", **kw)  # noqa: E731
    plus = run(config.replace(sign=1))
    minus = run(config.replace(sign=-1)) if config.xi0 > 0 else None
    vac = run(config, system="vacuum")
    out = []
    for i, G in enumerate(G_values):
        pair = []
        for mode in ("S", "E"):
            rp = plus[i].reduced(mode)
            rm = minus[i].reduced(mode) if minus is not None else None
            rv = vac[i].reduced(mode)
            signed = rp if config.sign > 0 else rm
            pair.append(oracle_metrics(rp, rm, rv, signed, config.xi0, config.sign, mode, float(G)))
        out.append(tuple(pair))
    return out

