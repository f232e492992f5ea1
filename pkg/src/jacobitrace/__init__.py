"""Spectra of Jacobi matrices and their asymptotic trace formula.

The package builds Jacobi matrices from coefficient sequences, computes
their spectra by Sturm bisection, and compares normalized traces
(1/k) Trace[phi(J_k)] with the limit functional of the joint distribution
of the coefficients.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # pragma: no cover - source checkout
    __version__ = "0.1.0"

from .eigensolve import Spectrum, all_eigenvalues, sturm_count, trace_average
from .ensembles import Ensemble, builtin, ksc_from_functions
from .jacobi import JacobiMatrix, assemble
from .measures import (
    CurvePushforward,
    GridDensity,
    ProductAtom,
    WeightedAtoms,
    integrate,
)
from .sequences import CoefficientSequence, generate
from .traceformula import convergence_ladder, limit_functional, test_function_suite

__all__ = [
    "CoefficientSequence",
    "CurvePushforward",
    "Ensemble",
    "GridDensity",
    "JacobiMatrix",
    "ProductAtom",
    "Spectrum",
    "WeightedAtoms",
    "all_eigenvalues",
    "assemble",
    "builtin",
    "convergence_ladder",
    "generate",
    "integrate",
    "ksc_from_functions",
    "limit_functional",
    "sturm_count",
    "test_function_suite",
    "trace_average",
]
