"""Certified lower bounds on the spectral radius of simple random walks on
Cayley graphs with finitely many cone types."""

from .errors import RhoBoundError
from .estimator import (EstimateReport, GrowthData, estimate, growth_and_eigenvector,
                        symmetrized_expansion)
from .surface import cannon_matrix, modified_cannon_matrix
from .typesystem import TypeSystem, predecessors, tilde_matrix, validate

__version__ = "0.1.0"

__all__ = [
    "EstimateReport", "GrowthData", "RhoBoundError", "TypeSystem", "cannon_matrix",
    "estimate", "growth_and_eigenvector", "modified_cannon_matrix", "predecessors",
    "symmetrized_expansion", "tilde_matrix", "validate", "__version__",
]
