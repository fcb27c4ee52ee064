"""Exception types shared across the toolkit."""


class AttraosError(Exception):
    """Base class for all attraos errors."""


class NonFiniteError(AttraosError):
    """A computation produced inf/NaN (e.g. integration blow-up)."""


class DimensionMismatchError(AttraosError):
    pass


class TooShortError(AttraosError):
    """Input series is too short for the requested operation."""


class DegenerateSeriesError(AttraosError):
    """Series is constant (or otherwise carries no usable variation)."""


class ShapeMismatchError(AttraosError):
    pass


class TooManyModesError(AttraosError):
    pass


class SingularSystemError(AttraosError):
    """Unregularized least squares hit a rank-deficient Gram matrix."""


class EmptyInputError(AttraosError):
    pass


class OddLengthError(AttraosError):
    pass


class WindowTooShortError(AttraosError):
    pass
