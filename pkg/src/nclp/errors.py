"""Exception types raised across the package."""


class NCLpError(Exception):
    pass


class StructureError(NCLpError, ValueError):
    """Shapes or parents of the inputs do not match."""


class DomainError(NCLpError, ValueError):
    """An input lies outside the domain of the operation (p < 1, non-Hermitian, ...)."""


class InconsistencyError(NCLpError):
    """A computed certificate failed its own verification."""


class HypothesisViolation(NCLpError):
    """A structural hypothesis of a theorem does not hold for the input.

    ``witness`` carries whatever refutes the hypothesis.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceError(NCLpError):
    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class ConditioningError(NCLpError):
    pass


class SpectralAmbiguityError(NCLpError):
    """Eigenvalues cluster near 1 without being resolvable as exactly 1."""
