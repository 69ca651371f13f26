"""Grammatical error correction metrics and their meta-evaluation."""

__version__ = "0.1.0"

from .core import Edit, EditSet, MetricResult, PRFScore, TokenSeq, f_beta, tokenize  # noqa: E402
from .metrics import ERRANT, GLEU, GREEN, METRICS, PTERRANT, External, GoToScorer, LLME, LLMS, Metric, Scribendi  # noqa: E402

__all__ = [
    "Edit",
    "EditSet",
    "MetricResult",
    "PRFScore",
    "TokenSeq",
    "f_beta",
    "tokenize",
    "Metric",
    "METRICS",
    "ERRANT",
    "PTERRANT",
    "GoToScorer",
    "GLEU",
    "GREEN",
    "Scribendi",
    "LLMS",
    "LLME",
    "External",
]
