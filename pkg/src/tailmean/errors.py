"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or inadmissible input data (bad CSV line, nonpositive value)."""


class EstimationError(Exception):
    """Base class for numerical failures during estimation."""


class DegenerateTailError(EstimationError):
    """All top-k log spacings are zero, so the tail carries no information."""


class InfiniteMeanError(EstimationError):
    """Estimated tail index does not admit a finite mean."""


class NonConvergenceError(EstimationError):
    """The tail-parameter solver found no admissible root."""


class InvalidScaleError(EstimationError):
    """The estimated first-order scale came out nonpositive."""


class DegenerateModelError(EstimationError):
    """The model has no valid second-order expansion term."""


class DegenerateSampleError(EstimationError):
    """Sample has zero variance; shape tests are undefined."""
