"""Exception types shared across the estimation pipeline."""


class KinlocError(Exception):
    """Base class for all kinloc errors."""


class ZeroRange(KinlocError):
    """Target coincides with a sensor, so range-normalized quantities are undefined."""


class TooFewSensors(KinlocError):
    """The operation needs more sensors than the array provides."""


class DegenerateGeometry(KinlocError):
    """Sensor layout is rank-deficient for trilateration (e.g. all sensors collinear)."""


class SingularGeometry(KinlocError):
    """Stage Gram matrix is singular or numerically unusable (rows nearly parallel)."""


class EmptyEnsemble(KinlocError):
    """An aggregate was requested over zero successful trials."""


class ConfigError(KinlocError):
    """Invalid or contradictory run configuration."""
