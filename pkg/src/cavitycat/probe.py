"""Finite-shot simulation of the atomic-probe readouts.

Two readouts are modelled as binomial two-outcome statistics:

* Wigner origin value: each probe atom exits in state c or b with
  ``p_c - p_b = W_meas / 2`` where ``W_meas = pi * W`` is the Wigner value in
  the measurement convention (vacuum gives 2).
* State overlap ``Tr rho_1 rho_2``: the interference visibility is encoded as
  ``p_c - p_b = overlap``.

Every call takes an explicit seed and draws from a counter-based Philox
generator, so results are bit-reproducible and replications can be split
into independent streams with :func:`spawn_seeds`.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DegenerateError
from .metrics import gaussian_sum_overlap
from .phase_space import CatWignerParams

__all__ = [
    "ProbeEstimate",
    "Z95",
    "make_rng",
    "spawn_seeds",
    "probe_wigner_origin",
    "probe_overlap",
    "true_overlap",
    "replicate_wigner_origin",
]

Z95 = 1.959963984540054
_SLACK = 1e-12


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if seed is None or (isinstance(seed, (int, np.integer)) and seed < 0):
        raise ValueError("an explicit non-negative integer seed is required")
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Independent child streams for ``n`` replications of one experiment."""
    return np.random.SeedSequence(int(seed)).spawn(n)


def _seed_label(seed):
    if isinstance(seed, np.random.SeedSequence):
        return f"{seed.entropy}:{'/'.join(map(str, seed.spawn_key))}"
    return int(seed)


@dataclass(frozen=True)
class ProbeEstimate:
    """Counts and derived estimate of one simulated probe run.

    ``estimate`` is ``scale * (counts_c - counts_b) / shots`` with
    ``scale = 2`` for Wigner values (measurement convention) and ``1`` for
    overlaps. ``ci95`` is the normal-approximation half-width.
    """

    kind: str
    shots: int
    counts_c: int
    counts_b: int
    estimate: float
    ci95: float
    seed: object
    truth: float

    @property
    def p_hat(self) -> float:
        return self.counts_c / self.shots

    @property
    def normalized(self) -> float:
        """Wigner estimate back in the unit-integral convention."""
        if self.kind != "wigner":
            raise ValueError("only Wigner estimates have a normalised form")
        return self.estimate / math.pi

    def covers(self, value: float) -> bool:
        return abs(self.estimate - value) <= self.ci95

    def as_dict(self) -> dict:
        return asdict(self)


def _from_counts(kind, scale, c, b, seed, truth) -> ProbeEstimate:
    n = c + b
    if n == 0:
        raise DegenerateError("no detected probe atoms")
    p = c / n
    est = scale * (c - b) / n
    # estimate = scale * (2 p - 1), so its std is 2 * scale * sqrt(p (1 - p) / n)
    ci = Z95 * 2.0 * scale * math.sqrt(p * (1.0 - p) / n)
    return ProbeEstimate(kind, n, int(c), int(b), est, ci, _seed_label(seed), truth)


def _draw(p_c: float, shots: int, seed, efficiency: float):
    if shots < 1 or int(shots) != shots:
        raise ValueError("shots must be a positive integer")
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    rng = make_rng(seed)
    c = int(rng.binomial(int(shots), p_c))
    b = int(shots) - c
    if efficiency < 1.0:
        # lost atoms are independent of the exit port
        c = int(rng.binomial(c, efficiency))
        b = int(rng.binomial(b, efficiency))
    return c, b


def probe_wigner_origin(true_w: float, shots: int, seed, efficiency: float = 1.0) -> ProbeEstimate:
    """Simulate ``shots`` probe atoms reading a Wigner value ``true_w`` (unit-integral convention)."""
    bound = 2.0 / math.pi
    if not -bound - _SLACK <= true_w <= bound + _SLACK:
        raise ValueError(f"Wigner value {true_w} outside the physical range [-2/pi, 2/pi]")
    w_meas = math.pi * true_w
    p_c = min(1.0, max(0.0, 0.5 * (1.0 + 0.5 * w_meas)))
    c, b = _draw(p_c, shots, seed, efficiency)
    return _from_counts("wigner", 2.0, c, b, seed, w_meas)


def true_overlap(state1, state2) -> float:
    """``Tr rho_1 rho_2`` for two density matrices or two closed-form cat descriptors."""
    if isinstance(state1, CatWignerParams) and isinstance(state2, CatWignerParams):
        return gaussian_sum_overlap(state1, state2)
    if isinstance(state1, CatWignerParams) or isinstance(state2, CatWignerParams):
        raise TypeError("cannot mix closed-form descriptors and density matrices")
    a = np.asarray(state1)
    b = np.asarray(state2)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    if b.ndim == 1:
        b = np.outer(b, b.conj())
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.einsum("ij,ji->", a, b).real)


def probe_overlap(state1, state2, shots: int, seed, efficiency: float = 1.0) -> ProbeEstimate:
    """Simulate the interferometric overlap readout of two single-mode states."""
    ov = true_overlap(state1, state2)
    if not -_SLACK <= ov <= 1.0 + 1e-9:
        raise ValueError(f"overlap {ov} is not a valid Tr(rho1 rho2)")
    p_c = min(1.0, max(0.0, 0.5 * (1.0 + ov)))
    c, b = _draw(p_c, shots, seed, efficiency)
    return _from_counts("overlap", 1.0, c, b, seed, ov)


def replicate_wigner_origin(true_w: float, shots: int, seed: int, reps: int) -> list[ProbeEstimate]:
    """``reps`` independent runs, one spawned stream each."""
    return [probe_wigner_origin(true_w, shots, s) for s in spawn_seeds(seed, reps)]
