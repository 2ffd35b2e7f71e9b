"""Exception types raised across the package."""


class InvalidConfigError(ValueError):
    """A configuration violates its invariants."""


class UnsupportedConfigurationError(ValueError):
    """No closed form is available for the requested configuration."""


class ProbabilityRangeError(ArithmeticError):
    """A computed probability fell outside [0, 1] beyond round-off."""


class DegenerateVarianceError(ArithmeticError):
    """Interference variance is zero, so a correlation coefficient is undefined."""


class UndefinedOutageError(ZeroDivisionError):
    """Conditional outage requested where the unconditional outage is zero."""


class StateSpaceError(MemoryError):
    """The Markov chain would exceed the desk-scale state budget."""


class ConvergenceError(RuntimeError):
    """An iterative solver did not reach its tolerance."""
