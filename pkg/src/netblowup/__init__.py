"""Reaction-diffusion on finite weighted graphs: u' = Lap u - a u + |u|^(p-1) u."""

from .blowup import AnalysisReport, BoundResult, analyze
from .dynamics import IntegratorOptions, Status, Trajectory, integrate
from .graph import Graph, GraphError, parse_graph
from .problem import ProblemError, ProblemSpec
from .spectral import ConvergenceError, EigenPair, principal_eigenpair
from .wellfn import Classification, WellReport, classify

__all__ = [
    "AnalysisReport", "BoundResult", "analyze",
    "IntegratorOptions", "Status", "Trajectory", "integrate",
    "Graph", "GraphError", "parse_graph",
    "ProblemError", "ProblemSpec",
    "ConvergenceError", "EigenPair", "principal_eigenpair",
    "Classification", "WellReport", "classify",
]

__version__ = "0.1.0"
