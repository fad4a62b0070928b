"""Exception hierarchy for vesselmip."""


class VesselMipError(Exception):
    """Base class for all errors raised by this package."""


class InvalidWindowError(VesselMipError, ValueError):
    pass


class VolumeFormatError(VesselMipError, ValueError):
    """Malformed header, payload length mismatch or unsupported dtype."""


class DimensionMismatchError(VesselMipError, ValueError):
    pass


class PhantomGenerationError(VesselMipError, RuntimeError):
    pass


class UndefinedMetricError(VesselMipError, ValueError):
    pass


class DivergenceError(VesselMipError, FloatingPointError):
    """Raised when the loss becomes non-finite during a fit."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite loss at step {step}")
