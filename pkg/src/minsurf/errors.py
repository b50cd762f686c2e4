"""Exception hierarchy shared across the package."""


class MinsurfError(Exception):
    """Base class for all numerical and contract failures."""


class PoleError(MinsurfError, ZeroDivisionError):
    pass


class ParseError(MinsurfError, ValueError):
    pass


class BoundaryHitError(MinsurfError):
    pass


class NotExactError(MinsurfError):
    pass


class OrderError(MinsurfError):
    pass


class PoleOnPathError(MinsurfError):
    pass


class NonClosedPeriodError(MinsurfError):
    pass


class UnknownExampleError(MinsurfError, KeyError):
    pass


class NonConvergenceError(MinsurfError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DegenerateSectionError(MinsurfError):
    pass


class OpenSectionError(MinsurfError):
    pass


class InsufficientExtentError(MinsurfError):
    pass


class AmbiguousDegreeError(MinsurfError):
    pass


class DivergenceError(MinsurfError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace or []


class EmptyRegionError(MinsurfError):
    pass
