from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidConfigError


@dataclass(frozen=True)
class GridConfig:
    """Dimensions of one 2D-FFT filter-bank block.

    L active subcarriers (also the delay-axis length), ``K_prime``
    multicarrier symbols at half-period spacing, and an ``N``-point IFFT.
    """

    L: int
    K_prime: int
    N: int

    def __post_init__(self):
        if self.L < 4 or self.L % 4:
            raise InvalidConfigError(f"L must be a positive multiple of 4, got {self.L}")
        if self.K_prime < 1:
            raise InvalidConfigError(f"K' must be >= 1, got {self.K_prime}")
        if self.N <= self.L:
            raise InvalidConfigError(f"N must exceed L (N={self.N}, L={self.L})")
        if self.N % 2:
            raise InvalidConfigError(f"N must be even, got {self.N}")

    @property
    def K(self) -> int:
        return self.K_prime // 2

    @cached_property
    def active(self) -> np.ndarray:
        """Delay indices carrying data: the first and the last L/4."""
        q = self.L // 4
        return np.r_[0:q, self.L - q:self.L]

    @property
    def n_data(self) -> int:
        return self.L // 2 * self.K_prime

    @cached_property
    def active_vec(self) -> np.ndarray:
        """Positions of the data symbols inside ``vec(A')`` (placement order)."""
        return (self.active[None, :] + self.L * np.arange(self.K_prime)[:, None]).ravel()
