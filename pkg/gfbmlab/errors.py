class GfbmError(Exception):
    """Base class for every failure raised by gfbmlab."""

class DomainError(GfbmError, ValueError):
    """A parameter sits outside an operation's precondition. The message names the bound."""

class PoleError(DomainError):
    """Gamma argument at (or within 1e-8 of) a non-positive integer."""

class NumericalError(GfbmError, ArithmeticError):
    """Quadrature, factorization or linear solve did not reach the requested accuracy."""
    def __init__(self, msg: str, *, estimate: float = float("nan")):
        super().__init__(msg)
        self.estimate = estimate
