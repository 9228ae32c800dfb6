"""Exception hierarchy.

Validation problems (bad inputs, violated preconditions) derive from
``ValueError``; failures of a numerical procedure derive from
``NumericalError``.  The CLI maps the two families to exit codes 2 and 3.
"""


class DomainError(ValueError):
    """Argument outside the domain of a special function or operator."""


class ConfigError(ValueError):
    """Experiment configuration is incomplete or malformed."""


class SupportError(ValueError):
    """A profile does not vanish where the reconstruction requires it."""


class NumericalError(RuntimeError):
    """Base class for failures of a numerical procedure."""


class SeriesRangeError(NumericalError):
    """Power series evaluated outside its guarded radius."""


class BracketError(NumericalError):
    """A root could not be bracketed by a sign change."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class MissedEigenvalueError(NumericalError):
    """Eigenvalue count from root bracketing disagrees with the oscillation count."""


class QuadratureError(NumericalError):
    """Quadrature failed to reach its tolerance."""


class StepSizeError(NumericalError):
    """Integrator step control failed (error estimate above tolerance)."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x
