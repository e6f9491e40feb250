"""Exception types used across the library.

The CLI maps these onto process exit codes, so user-facing failures should
raise one of the classes below rather than a bare Exception.
"""


class KronClustError(Exception):
    """Base class for all library errors."""


class ShapeError(KronClustError, ValueError):
    """Inconsistent matrix/vector dimensions."""


class SizeLimitError(KronClustError):
    """A dense materialization would exceed the configured size cap."""


class NumericalError(KronClustError):
    """Base class for numerical failures (solver breakdown, divergence)."""


class ApproximationError(NumericalError):
    """Rank-one Kronecker approximation failed (zero/negative spectrum or
    non-convergent power iteration). Carries the last iterate for
    inspection."""

    def __init__(self, message, iterate=None):
        super().__init__(message)
        self.iterate = iterate


class RankDeficiencyError(NumericalError):
    """A normal-equation system is singular; a positive ridge weight is
    required to proceed."""


class DegenerateFactorError(NumericalError):
    """Fixed factors are all zero, leaving the subproblem unregularized;
    the factor set needs reinitialization."""


class DivergenceError(NumericalError):
    """The objective became non-finite during optimization."""


class DegenerateDataError(KronClustError, ValueError):
    """Input data contains unusable points (for example zero columns that
    cannot be normalized). Carries the offending indices."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = list(indices)


class IdxFormatError(KronClustError, ValueError):
    """Malformed IDX file. Carries the byte offset of the problem."""

    def __init__(self, message, offset=None):
        super().__init__(message)
        self.offset = offset
