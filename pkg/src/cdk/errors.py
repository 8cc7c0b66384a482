"""Exception hierarchy shared by all modules."""


class CDKError(Exception):
    """Base class for all library errors."""


class InvalidInput(CDKError, ValueError):
    pass


class DimensionMismatch(InvalidInput):
    pass


class NotPositiveDefinite(CDKError):
    pass


class DegenerateLeadingCoefficient(InvalidInput):
    pass


class DomainError(CDKError, ValueError):
    """Dual point outside the domain of the conjugate function."""


class BoundaryError(CDKError):
    """G(S) is singular: the dual point sits on the boundary of the cone."""


class NoInteriorPoint(CDKError):
    """No dual point with G(S) positive definite could be located."""

    def __init__(self, message="", report=None):
        super().__init__(message)
        self.report = report


class MaxIterations(CDKError):
    def __init__(self, message="", report=None):
        super().__init__(message)
        self.report = report


class MaxOuterIterations(MaxIterations):
    pass


class LeftCone(CDKError):
    """An S_c^- search iterate (or its start) is not in the negative cone."""


class SingularQ(CDKError):
    pass


class Refused(CDKError):
    """Oracle domain too large to enumerate."""


class UnderdeterminedGauge(InvalidInput):
    pass


class Unsupported(InvalidInput):
    pass


class NoStationaryFound(CDKError):
    pass
