"""Exception hierarchy.  Every error raised by the package derives from
:class:`ChiralRabiError`; most are also ``ValueError`` so callers that only
care about bad input can catch that."""


class ChiralRabiError(Exception):
    pass


class InvalidDimension(ChiralRabiError, ValueError):
    pass


class UnsupportedDimension(ChiralRabiError, ValueError):
    pass


class DimensionError(ChiralRabiError, ValueError):
    pass


class InvalidParams(ChiralRabiError, ValueError):
    pass


class NonHermitianParams(InvalidParams):
    pass


class MissingParams(InvalidParams):
    pass


class PreconditionError(ChiralRabiError, ValueError):
    pass


class NotHermitian(ChiralRabiError, ValueError):
    pass


class NoConvergence(ChiralRabiError, RuntimeError):
    pass


class SymmetryBroken(ChiralRabiError, RuntimeError):
    pass


class FormulaMismatch(ChiralRabiError, RuntimeError):
    pass


class TruncationTooSmall(ChiralRabiError, RuntimeError):
    pass


class CouplingZero(ChiralRabiError, ValueError):
    pass


class NotAnEigenvalue(ChiralRabiError, ValueError):
    pass


class NoCrossingFound(ChiralRabiError, RuntimeError):
    pass
