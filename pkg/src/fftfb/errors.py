"""Exception types raised across the package."""


class FftfbError(ValueError):
    """Base class; subclasses ``ValueError`` so callers can catch either."""


class InvalidDimensionError(FftfbError):
    pass


class InvalidInputError(FftfbError):
    pass


class InvalidConfigError(FftfbError):
    pass


class SingularCompensationError(FftfbError):
    """Filter/grid combination yields a non-positive compensation coefficient."""


class SingularEqualizerError(FftfbError):
    """Zero-forcing requested on a zero channel coefficient."""
