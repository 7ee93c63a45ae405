"""Exception hierarchy shared by every module."""


class MuDeformedError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(MuDeformedError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class GammaOverflowError(MuDeformedError, OverflowError):
    """The deformed factorial exceeds the double-precision range.

    Use :func:`mudeformed.core.log_gamma_mu` instead.
    """


class ConvergenceError(MuDeformedError, ArithmeticError):
    """A series or quadrature failed to meet its stopping rule."""
