"""Exception hierarchy shared by all modules."""


class JsrError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(JsrError, ValueError):
    """Malformed or out-of-contract input (non-finite entries, bad shapes, bad indices)."""


class DimensionMismatchError(InvalidInputError):
    pass


class BudgetExceededError(JsrError):
    """Raised when an enumeration would exceed its configured product budget."""

    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class DegeneratePolytopeError(JsrError):
    """Point set does not span the ambient space."""


class NumericalFailureError(JsrError):
    """A numerical procedure failed to converge or produced an unusable result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ZeroJsrError(JsrError):
    """The joint spectral radius lower bound is zero, so entry normalization is impossible."""


class ReducibilitySuspectedError(JsrError):
    """Invariant-polytope growth stalled in a proper subspace."""


class UnsupportedCandidateError(JsrError):
    """SMP candidate whose leading eigenvalue is complex or not unique in modulus."""


class CorruptedCatalogError(JsrError):
    pass


class CertificationError(JsrError):
    """An independent re-verification rejected a solver result."""


class UnsupportedDimensionError(InvalidInputError):
    pass
