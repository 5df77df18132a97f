"""Exception types shared across the package."""


class DynAdmmError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(DynAdmmError, ValueError):
    """Structural violation: wrong dimensions, empty input, asymmetry."""


class DomainError(DynAdmmError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class NumericalError(DynAdmmError, ArithmeticError):
    """A factorization or solve failed (non-positive pivot, singular system)."""


class UnsupportedOperationError(DynAdmmError, TypeError):
    """The requested operation has no closed form for this function variant."""


class ConvergenceError(DynAdmmError, RuntimeError):
    """An iterative solve hit its iteration cap before reaching tolerance."""


class ConfigError(DynAdmmError, ValueError):
    """A run configuration is malformed or inconsistent."""
