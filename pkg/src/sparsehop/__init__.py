"""Sparse modern Hopfield associative memory."""
from .errors import SparseHopError
from .hopfield_core import (
    PatternStore,
    QueryState,
    RetrievalTrace,
    SeparationReport,
    dense_energy,
    dense_step,
    retrieve,
    separation_report,
    sparse_energy,
    sparse_step,
)
from .simplex_maps import SimplexVector, lse, psi_star, softmax, sparsemax

__version__ = "0.1.0"
