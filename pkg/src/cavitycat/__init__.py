"""Reversible decoherence of a cavity Schrödinger cat coupled to a squeezed environment."""

from .dynamics import ExperimentConfig, ModeParams, evolve, evolve_at, rescaled_time
from .metrics import MetricsRecord, mode_metrics
from .phase_space import CatWignerParams, cat_params

__all__ = [
    "ExperimentConfig",
    "ModeParams",
    "evolve",
    "evolve_at",
    "rescaled_time",
    "MetricsRecord",
    "mode_metrics",
    "CatWignerParams",
    "cat_params",
]
__version__ = "0.1.0"
