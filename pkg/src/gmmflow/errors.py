"""Exception hierarchy shared by every gmmflow module."""


class GmmFlowError(Exception):
    """Base class for all errors raised by gmmflow."""


class NotSpd(GmmFlowError, ValueError):
    """A matrix that must be symmetric positive definite is not."""


class DomainError(GmmFlowError, ValueError):
    """A scalar or spectral function was evaluated outside its domain."""


class OutOfRange(GmmFlowError, ValueError):
    """A path time lies outside [0, 1]."""


class LocalityViolated(GmmFlowError, ValueError):
    """The whitened perturbation is not strictly below one."""


class ValidationError(GmmFlowError, ValueError):
    """Input data (usually a GMM file) failed validation."""


class ParseError(ValidationError):
    """Input file could not be parsed."""


class NumericalError(GmmFlowError, ArithmeticError):
    """Base class for numerical breakdowns."""


class NumericalUnderflow(NumericalError):
    """Sinkhorn scalings degenerated."""


class DegenerateDensity(NumericalError):
    """Every mixture term underflowed at the query point."""


class NonFiniteState(NumericalError):
    """A particle left the finite range during integration."""

    def __init__(self, message, particle=None, step=None):
        super().__init__(message)
        self.particle = particle
        self.step = step
