"""Exception and warning classes shared across the package."""


class WignerLabError(Exception):
    """Base class for all package errors."""


class RepresentationError(WignerLabError, ValueError):
    """A field is in the wrong spectral representation for the request."""


class ParameterError(WignerLabError, ValueError):
    """A physical or numerical parameter is out of its admissible range."""


class GridMismatchError(WignerLabError, ValueError):
    """Two fields that must share a grid do not."""


class TruncationError(WignerLabError, RuntimeError):
    """A Laplace-Fourier integrand does not decay inside the search range."""


class HistoryRangeError(WignerLabError, ValueError):
    """A requested time lies outside a stored potential history."""


class WindowTooLargeError(WignerLabError, RuntimeError):
    """Newton inversion of the bicharacteristic flow failed to converge."""

    def __init__(self, message, jacobian_deviation=None):
        super().__init__(message)
        self.jacobian_deviation = jacobian_deviation


class SimulationError(WignerLabError, RuntimeError):
    """Time integration aborted; ``record`` holds the last diagnostics."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record or {}


class ConfigError(WignerLabError, ValueError):
    """An experiment configuration file could not be parsed or validated."""


class TailMassWarning(UserWarning):
    """Field magnitude on the velocity-grid boundary exceeds the tail tolerance."""


class ResolutionWarning(UserWarning):
    """A spectral quantity is not resolved by the grid."""
