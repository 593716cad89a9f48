"""Sparse model selection and recovery by one-step thresholding of X^H y."""

from . import experiments, frames, numkit, selection, signals
from .exceptions import ConvergenceError, InvalidArgumentError, OverSelectionError
from .frames import (
    Frame,
    alltop_seed,
    average_coherence,
    build_gabor_frame,
    coherence_report,
    gaussian_design,
    identity_frame,
    worst_case_coherence,
)
from .selection import (
    ost_recover,
    ost_select,
    ost_threshold,
    recovery_threshold,
    sost_select,
)
from .signals import make_signal, measure, sample_noise

__version__ = "0.1.0"

__all__ = [
    "experiments", "frames", "numkit", "selection", "signals",
    "ConvergenceError", "InvalidArgumentError", "OverSelectionError",
    "Frame", "alltop_seed", "average_coherence", "build_gabor_frame",
    "coherence_report", "gaussian_design", "identity_frame", "worst_case_coherence",
    "ost_recover", "ost_select", "ost_threshold", "recovery_threshold", "sost_select",
    "make_signal", "measure", "sample_noise",
]
