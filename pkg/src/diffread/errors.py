"""Exception hierarchy for the diffread package."""


class DiffreadError(Exception):
    """Base class for all diffread-specific errors."""


class GeometryError(DiffreadError, ValueError):
    """Array geometry violates a physical or sampling constraint."""


class ConfigError(DiffreadError, ValueError):
    """Experiment configuration is malformed or inconsistent."""


class FarFieldViolation(DiffreadError):
    """Observation point too close to the array for far-field asymptotics."""


class QuadratureNonConvergence(DiffreadError):
    """Adaptive quadrature refinement stalled before reaching tolerance."""


class MalformedHeader(DiffreadError, ValueError):
    """Trit stream does not start with a valid header block."""


class OutOfRangeBlock(DiffreadError, ValueError):
    """A decoded symbol block lies outside the payload alphabet."""


class OddLength(DiffreadError, ValueError):
    """Operation requires an even number of cantilevers."""


class NotNormalized(DiffreadError, ValueError):
    """Sampled intensity must be envelope-normalized before demodulation."""


class DegenerateDepth(DiffreadError, ValueError):
    """Indentation depth gives a vanishing signal (sin(2ks) ~ 0)."""


class DegenerateScale(DiffreadError, ValueError):
    """Detector reference scale too small to divide by."""


class TooLarge(DiffreadError, ValueError):
    """Requested array size exceeds the supported cap for this method."""


class ZeroNoise(DiffreadError, ValueError):
    """Signal-to-noise ratio is undefined for zero noise deviation."""
