"""Exception hierarchy shared by all modules."""


class FiniteGapError(Exception):
    """Base class for every error raised by this package."""


class DegenerateCurve(FiniteGapError, ValueError):
    pass


class BranchCollision(FiniteGapError):
    pass


class PoleAtBranchPoint(FiniteGapError, ZeroDivisionError):
    pass


class QuadratureFailure(FiniteGapError):
    pass


class SingularHalfPeriod(FiniteGapError):
    pass


class SingularPeriodMatrix(FiniteGapError):
    pass


class NonConvergent(FiniteGapError):
    pass


class NearDivisor(FiniteGapError):
    """Raised when |sigma| is too small for a stable logarithmic derivative."""


class RootFindingFailure(FiniteGapError):
    pass


class NoSaddle(FiniteGapError):
    pass


class ConfigError(FiniteGapError, ValueError):
    pass


class ComputeError(FiniteGapError):
    pass
