"""Exception types raised by pg4."""


class PG4Error(Exception):
    """Base class for all library errors."""


class GridTooSmall(PG4Error, ValueError):
    pass


class NormTooLarge(PG4Error, ValueError):
    pass


class DegenerateFit(PG4Error, ValueError):
    pass


class NotAdmissible(PG4Error, ValueError):
    pass


class DomainOutOfRange(PG4Error, ValueError):
    pass


class FrenetDegenerate(PG4Error):
    """A curvature fell below its threshold so the frame is undefined.

    ``index`` is the offending grid index (``None`` for pointwise calls)
    and ``quantity`` names the vanishing curvature.
    """

    def __init__(self, message, index=None, quantity=None):
        super().__init__(message)
        self.index = index
        self.quantity = quantity


class LightlikeDegeneracy(FrenetDegenerate):
    """The principal normal (or first binormal) became lightlike."""


class InsufficientHistory(PG4Error, ValueError):
    pass


class StepRejected(PG4Error):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class GramDrift(PG4Error):
    def __init__(self, message, step=None, drift=None):
        super().__init__(message)
        self.step = step
        self.drift = drift


class InputError(PG4Error, ValueError):
    """A curve, flow or table definition could not be read."""
