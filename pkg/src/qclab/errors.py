"""Exception hierarchy shared by all qclab modules."""


class QCError(Exception):
    """Base class for every error raised by qclab."""


class DomainError(QCError, ValueError):
    """A point lies on or outside the boundary of the domain it was given for."""


class UnsupportedDomainError(QCError, NotImplementedError):
    pass


class InvalidMarkerError(QCError, ValueError):
    pass


class ParameterProblemError(QCError, RuntimeError):
    """A Schwarz-Christoffel parameter problem did not converge."""

    def __init__(self, message, bracket=None, residual=None):
        super().__init__(message)
        self.bracket = bracket
        self.residual = residual


class InvalidAxesError(QCError, ValueError):
    pass


class PaddingError(QCError, ValueError):
    pass


class IterationLimitError(QCError, RuntimeError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class UnivalenceError(QCError, ValueError):
    pass


class BranchError(QCError, ValueError):
    pass


class SymmetryError(QCError, ValueError):
    pass


class BasisError(QCError, RuntimeError):
    pass


class InadmissibleError(QCError, ValueError):
    """Coefficient data would give sup-norm >= 1 or violate a generator's range."""


class MapDegeneracyError(QCError, ZeroDivisionError):
    pass


class TruncationError(QCError, RuntimeError):
    def __init__(self, message, bound):
        super().__init__(message)
        self.bound = bound


class ResolutionError(QCError, ValueError):
    pass


class ComparisonError(QCError, ValueError):
    pass


class SchemaError(QCError, ValueError):
    pass
