"""Exception types shared across the package."""


class SparseGraphError(Exception):
    """Base class for errors raised by this package."""


class DomainError(SparseGraphError, ValueError):
    """An argument lies outside the domain of the operation."""


class RefinementError(SparseGraphError):
    """A claimed refinement witness does not satisfy the refinement identities."""


class InconsistentRefinementError(RefinementError):
    """Offspring intensities are not constant on a component of the pair graph."""


class SizeRefusal(SparseGraphError):
    """Exact computation refused because the instance exceeds the size limit."""


class UnsupportedLawError(SparseGraphError):
    """A finite-support law cannot be processed (e.g. not closed under shifting)."""


class InsufficientDepthError(SparseGraphError):
    """The support entries are too shallow to evaluate a rule of the given radius."""
