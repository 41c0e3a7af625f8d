"""Exception types shared across the package."""


class DomainError(ValueError):
    """A parameter lies outside the domain where a quantity is defined."""


class BoundaryError(DomainError):
    """A point lies on or outside the boundary of a convolution support."""


class DivergenceError(ArithmeticError):
    """An integral that should be finite failed to converge."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach its requested accuracy.

    The achieved error estimate is kept on ``abserr`` so callers can report it.
    """

    def __init__(self, message, abserr=float("nan")):
        super().__init__(message)
        self.abserr = abserr


class NoSignChangeError(ValueError):
    """A root bracket has endpoints with equal sign."""
