"""Exception types shared across the package."""


class QVolumeError(Exception):
    """Base class for all qvolume errors."""


class InvalidDimensionError(QVolumeError, ValueError):
    """Matrix or basis dimension outside the supported range."""


class UnknownFamilyError(QVolumeError, KeyError):
    """State-family name not in the supported set."""


class DimensionMismatchError(QVolumeError, ValueError):
    """Coordinate vector or matrix has the wrong length/shape."""


class InvalidInputError(QVolumeError, ValueError):
    """Input matrix fails a precondition (trace, hermiticity, ...)."""


class OutOfSubspaceError(QVolumeError, ValueError):
    """Matrix does not lie in the family's linear subspace."""


class InvalidPartitionError(QVolumeError, ValueError):
    """Bipartition dimensions do not multiply to the matrix dimension."""


class InvalidConfigError(QVolumeError, ValueError):
    """Sampler/statistics configuration violates its constraints."""


class NumericalFailureError(QVolumeError, RuntimeError):
    """A numerical routine (eigensolver) failed to converge."""


class DegenerateDirectionError(QVolumeError, RuntimeError):
    """Hit-and-run found no admissible segment in too many directions."""


class InsufficientStatisticsError(QVolumeError, RuntimeError):
    """Every multiphase repetition aborted for lack of hits.

    Carries the per-phase hit counts of the last attempted repetition.
    """

    def __init__(self, message, per_phase_hits=None):
        super().__init__(message)
        self.per_phase_hits = per_phase_hits
