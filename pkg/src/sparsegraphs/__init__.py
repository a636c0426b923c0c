"""Kernels, branching processes, random models and metrics for graphs with a linear number of edges."""
from .errors import (
    DomainError,
    InconsistentRefinementError,
    InsufficientDepthError,
    RefinementError,
    SizeRefusal,
    SparseGraphError,
    UnsupportedLawError,
)
from .graph import Graph
from .kernel_core import (
    FiniteKernel,
    canonical_coarsening,
    chessboard_kernel,
    common_coarsening,
    common_refinement,
    constant_kernel,
    expected_degree,
    operator_norm,
    pi_equal,
    verify_refinement,
)

__version__ = "0.1.0"
