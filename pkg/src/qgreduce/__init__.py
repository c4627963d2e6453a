"""Spectral reduction for equilateral quantum graphs.

The spectrum of a Schrodinger operator on an equilateral metric graph inside a
gap of the reference (Dirichlet or Neumann) spectrum is recovered from a
discrete operator on the graph through the scalar function ``eta``; a direct
secular-matrix solver checks the result independently.
"""
from .coupling import CouplingSpec, check_scalar_condition
from .errors import (
    CouplingError, GraphValidationError, IntegrationError, NumericalCheckError,
    PreconditionError, QGraphError, ScalarConditionError, SpectrumScanError, SymmetryError,
)
from .graph import MetricGraph, Potential, build_graph, load_graph, make_graph
from .measure import k_I_check, measure_check
from .ode import dirichlet_spectrum, neumann_spectrum, reference_spectrum, transfer
from .oracle import compare, oracle_spectrum
from .results import SpectralEntry, SpectralResult
from .verify import cross_validate
from .weyl import build_context, locate_K, reduce, reduce_spectrum

__all__ = [
    "CouplingSpec", "check_scalar_condition",
    "CouplingError", "GraphValidationError", "IntegrationError", "NumericalCheckError",
    "PreconditionError", "QGraphError", "ScalarConditionError", "SpectrumScanError", "SymmetryError",
    "MetricGraph", "Potential", "build_graph", "load_graph", "make_graph",
    "k_I_check", "measure_check",
    "dirichlet_spectrum", "neumann_spectrum", "reference_spectrum", "transfer",
    "compare", "oracle_spectrum",
    "SpectralEntry", "SpectralResult",
    "cross_validate",
    "build_context", "locate_K", "reduce", "reduce_spectrum",
]
