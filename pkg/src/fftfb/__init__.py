"""2D-FFT precoded filter-bank multicarrier and an OTFS baseline, with a Monte-Carlo harness."""

from .errors import (FftfbError, InvalidConfigError, InvalidDimensionError, InvalidInputError,
                     SingularCompensationError, SingularEqualizerError)
from .grid import GridConfig
from .link import FbmcLink, FilterBankLink, OfdmLink, OtfsLink, make_link
from .otfs import OtfsConfig
from .prototype import PrototypeFilter, build_hermite, build_phydyas

__all__ = [
    "FbmcLink",
    "FftfbError",
    "FilterBankLink",
    "GridConfig",
    "InvalidConfigError",
    "InvalidDimensionError",
    "InvalidInputError",
    "OfdmLink",
    "OtfsConfig",
    "OtfsLink",
    "PrototypeFilter",
    "SingularCompensationError",
    "SingularEqualizerError",
    "build_hermite",
    "build_phydyas",
    "make_link",
]
