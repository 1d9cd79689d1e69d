"""Prototype filters for the filter-bank transmitters.

Two pulses are provided: the Hermite pulse truncated to overlap factor 1.5
(the only one compatible with the compensated complex-orthogonal chain) and
the PHYDYAS frequency-sampling pulse with overlap 4 used as an FBMC/OQAM
spectral reference.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval

from .errors import InvalidConfigError

# Haas-Belfiore weights for Hermite orders 0, 4, ..., 20
HERMITE_COEFFS = {
    0: 1.412692577,
    4: -3.0145e-3,
    8: -8.8041e-6,
    12: -2.2611e-9,
    16: -4.4570e-15,
    20: 1.8633e-16,
}

# Gaussian argument per symbol period; the weights above assume u = sqrt(2)*t/T.
HERMITE_TIME_SCALE = np.sqrt(2.0)

PHYDYAS_COEFFS = (1.0, 0.971960, np.sqrt(2) / 2, 0.235147)


@dataclass(frozen=True, eq=False)
class PrototypeFilter:
    """Real unit-energy pulse of ``round(overlap * n_fft)`` taps.

    ``offset`` is the position, within one IFFT period, of the sample that
    tap 0 multiplies; a centrally truncated pulse keeps the alignment it had
    before truncation.
    """

    taps: np.ndarray
    overlap: float
    n_fft: int
    offset: int = 0
    name: str = ""

    def __post_init__(self):
        self.taps.setflags(write=False)

    def __len__(self) -> int:
        return self.taps.size

    @property
    def key(self) -> tuple:
        return (self.name, self.n_fft, self.offset, self.taps.tobytes())


def hermite_pulse(t: np.ndarray) -> np.ndarray:
    """Untruncated Hermite pulse at times ``t`` in symbol periods."""
    c = np.zeros(max(HERMITE_COEFFS) + 1)
    for order, weight in HERMITE_COEFFS.items():
        c[order] = weight
    u = HERMITE_TIME_SCALE * np.asarray(t, dtype=float)
    return hermval(np.sqrt(2 * np.pi) * u, c) * np.exp(-np.pi * u**2)


def build_hermite(n_fft: int) -> PrototypeFilter:
    """Hermite pulse sampled on two symbol periods, centrally cut to 1.5 periods."""
    if n_fft < 4 or n_fft % 2:
        raise InvalidConfigError(f"Hermite filter needs an even n_fft >= 4, got {n_fft}")
    n_taps = 3 * n_fft // 2
    # symmetric grid; identical to sampling t = (n - N + 1/2)/N on [-1, 1)
    # and dropping N/4 samples at each end
    t = (np.arange(n_taps) - (n_taps - 1) / 2) / n_fft
    g = hermite_pulse(t)
    g = g / np.linalg.norm(g)
    return PrototypeFilter(taps=g, overlap=1.5, n_fft=n_fft, offset=(2 * n_fft - n_taps) // 2,
                           name="hermite")


def build_phydyas(n_fft: int, overlap: int = 4) -> PrototypeFilter:
    if overlap != 4:
        raise InvalidConfigError(f"PHYDYAS filter is defined here for overlap 4 only, got {overlap}")
    if n_fft < 4:
        raise InvalidConfigError(f"n_fft must be >= 4, got {n_fft}")
    n_taps = overlap * n_fft
    m = np.arange(1, n_taps + 1)
    g = np.full(n_taps, PHYDYAS_COEFFS[0])
    for k in range(1, overlap):
        g += 2 * (-1) ** k * PHYDYAS_COEFFS[k] * np.cos(2 * np.pi * k * m / n_taps)
    g = g / np.linalg.norm(g)
    return PrototypeFilter(taps=g, overlap=float(overlap), n_fft=n_fft, offset=0, name="phydyas")


def filter_segments(f: PrototypeFilter) -> list[np.ndarray]:
    """Split the taps into ``2*O`` half-period blocks ``diag(g_o)``."""
    half = f.n_fft // 2
    n_seg = int(round(2 * f.overlap))
    return [np.diag(f.taps[o * half:(o + 1) * half]) for o in range(n_seg)]
