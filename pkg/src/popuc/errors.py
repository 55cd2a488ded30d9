"""Exception types.

Input and precondition problems derive from ``ValueError``; numerical
breakdowns that should not happen for valid input derive from
``RuntimeError`` and carry whatever partial result was available.
"""


class PopucError(Exception):
    pass


class ParameterError(PopucError, ValueError):
    """Invalid parameter array or matrix shape."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SpectrumCollisionError(PopucError, ValueError):
    """The point zeta lies (numerically) on the spectrum."""


class SingularMatrixError(PopucError, ValueError):
    pass


class NotPositiveDefiniteError(PopucError, ValueError):
    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class FamilyError(PopucError, ValueError):
    """A parameter family cannot be evaluated where asked."""


class ConvergenceError(PopucError, RuntimeError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class TrackingError(PopucError, RuntimeError):
    def __init__(self, message, pair=None, t=None):
        super().__init__(message)
        self.pair = pair
        self.t = t


class ConstructionFault(PopucError, RuntimeError):
    """A construction that theory says must succeed did not."""

    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail
