"""Exception hierarchy shared by all modules."""


class UhlmannError(Exception):
    """Base class for numerical and input errors raised by this package."""


class UnsupportedModel(UhlmannError, ValueError):
    pass


class NonFiniteInput(UhlmannError, ValueError):
    pass


class GapClosed(UhlmannError):
    """The spectral gap closes on the momentum grid (criticality)."""


class UnwrapFailure(UhlmannError):
    """Adjacent Bloch angles jump by more than pi/2; the grid is too coarse."""


class IllConditioned(UhlmannError):
    pass


class DegeneratePhase(UhlmannError):
    """arg Tr(rho U) is undefined because the trace vanishes."""


class SingularPolar(UhlmannError):
    pass


class QuadratureFailure(UhlmannError):
    pass


class NoConvergence(UhlmannError):
    pass


class EdgeBulkUndefined(UhlmannError, ZeroDivisionError):
    pass


class InvalidSpec(UhlmannError, ValueError):
    pass


class MalformedCsv(UhlmannError, ValueError):
    pass
