"""de Branges spaces of perturbed Bessel operators: spectra, kernels and
sampling reconstructions, with a Paley-Wiener baseline."""

from .errors import (
    BracketError,
    ConfigError,
    DomainError,
    MissedEigenvalueError,
    NumericalError,
    QuadratureError,
    SeriesRangeError,
    StepSizeError,
    SupportError,
)
from .kernel import KernelEvaluator, TentWeight, kernel_hb, kernel_inner, norming_constant, oversampling_kernel
from .model import ProblemSetup, Spectrum
from .potentials import Potential
from .spectrum import asymptotic_prediction, compute_spectrum, eigenvalue_count

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ConfigError",
    "DomainError",
    "KernelEvaluator",
    "MissedEigenvalueError",
    "NumericalError",
    "Potential",
    "ProblemSetup",
    "QuadratureError",
    "SeriesRangeError",
    "Spectrum",
    "StepSizeError",
    "SupportError",
    "TentWeight",
    "asymptotic_prediction",
    "compute_spectrum",
    "eigenvalue_count",
    "kernel_hb",
    "kernel_inner",
    "norming_constant",
    "oversampling_kernel",
]
