"""Exception types shared across the package.

Two failure families matter to callers: configuration/usage problems
(`ConfigError`, CLI exit code 2) and numerical diagnostics raised when a
computation detects that its own output would be untrustworthy
(`NumericsError` subclasses, CLI exit code 3).
"""


class PhotonflowError(Exception):
    """Base class for all package errors."""


class ConfigError(PhotonflowError):
    """Invalid, missing, or inconsistent configuration input."""


class NumericsError(PhotonflowError):
    """A numerical self-check failed; results would be unreliable."""


class GridCoverageError(NumericsError):
    """Sampling grid does not cover the beam support.

    Raised when the power captured by the grid falls short of the analytic
    total by more than the documented truncation budget (1e-6 relative).
    """


class AliasingError(NumericsError):
    """Significant spectral mass near the Nyquist wavenumber.

    Raised by FFT-based operators when more than the documented fraction
    (1e-8) of the spectrum's power sits in the top band of |k_x|, i.e. the
    grid is too coarse for the field it carries.
    """


class ExtractionError(NumericsError):
    """Momentum extraction produced no usable output (e.g. fully masked)."""


class FlowError(NumericsError):
    """Trajectory integration hit a non-finite state."""
