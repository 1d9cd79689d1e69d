"""DFT matrices, Kronecker/vec helpers and Gray-mapped square QAM."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidDimensionError, InvalidInputError

__all__ = [
    "Constellation",
    "constellation",
    "dft_matrix",
    "kron",
    "qam_demap",
    "qam_map",
    "unvec",
    "vec",
]


@lru_cache(maxsize=32)
def _dft(n: int) -> np.ndarray:
    k = np.arange(n)
    w = np.exp(-2j * np.pi * np.outer(k, k) / n) / np.sqrt(n)
    w.setflags(write=False)
    return w


def dft_matrix(n: int) -> np.ndarray:
    """Unitary ``n``-point DFT matrix with entries ``exp(-2j*pi*k*l/n) / sqrt(n)``.

    The returned array is cached and read-only; copy it before mutating.
    """
    if n < 1:
        raise InvalidDimensionError(f"DFT size must be >= 1, got {n}")
    return _dft(int(n))


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.atleast_2d(a), np.atleast_2d(b))


def vec(m: np.ndarray) -> np.ndarray:
    """Stack the columns of ``m`` (or of every matrix in a leading batch)."""
    m = np.asarray(m)
    if m.ndim == 2:
        return m.reshape(-1, order="F")
    return np.swapaxes(m, -1, -2).reshape(*m.shape[:-2], -1)


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`; accepts a leading batch."""
    v = np.asarray(v)
    return np.swapaxes(v.reshape(*v.shape[:-1], cols, rows), -1, -2)


@dataclass(frozen=True, eq=False)
class Constellation:
    """Square QAM with per-axis Gray labels.

    ``points[j]`` carries the label ``labels[j]``, the MSB-first binary
    expansion of ``j``, so scanning ``points`` in index order visits labels in
    lexicographic order.
    """

    order: int
    points: np.ndarray
    labels: np.ndarray

    @property
    def bits_per_symbol(self) -> int:
        return self.labels.shape[1]


def _pam_level(bits: np.ndarray) -> np.ndarray:
    # bit 0 selects the sign, the remaining bits the Gray-coded magnitude
    m = bits.shape[-1]
    sign = 1 - 2 * bits[..., 0]
    if m == 1:
        return sign.astype(float)
    gray = bits[..., 1:]
    binary = np.bitwise_xor.accumulate(gray, axis=-1)
    weights = 1 << np.arange(m - 2, -1, -1)
    mag = 2 * (binary @ weights) + 1
    return (sign * mag).astype(float)


@lru_cache(maxsize=None)
def constellation(order: int) -> Constellation:
    if order not in (4, 16):
        raise InvalidInputError(f"unsupported QAM order {order}; use 4 or 16")
    k = int(np.log2(order))
    idx = np.arange(order)
    labels = ((idx[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    # interleaved bits: even positions -> in-phase, odd -> quadrature
    i_lvl = _pam_level(labels[:, 0::2].astype(np.int64))
    q_lvl = _pam_level(labels[:, 1::2].astype(np.int64))
    pts = i_lvl + 1j * q_lvl
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    pts.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(order=order, points=pts, labels=labels)


def qam_map(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a flat bit vector to symbols, ``c.bits_per_symbol`` bits each."""
    bits = np.asarray(bits).astype(np.int64, copy=False).ravel()
    k = c.bits_per_symbol
    if bits.size % k:
        raise InvalidInputError(f"bit count {bits.size} not divisible by {k}")
    weights = 1 << np.arange(k - 1, -1, -1)
    return c.points[bits.reshape(-1, k) @ weights]


def qam_demap(symbols: np.ndarray, c: Constellation, chunk: int = 1 << 16) -> np.ndarray:
    """Minimum-distance hard decision; ties go to the smallest label."""
    sym = np.asarray(symbols, dtype=complex).ravel()
    idx = np.empty(sym.size, dtype=np.int64)
    for start in range(0, sym.size, chunk):
        part = sym[start:start + chunk]
        d2 = np.abs(part[:, None] - c.points[None, :]) ** 2
        idx[start:start + chunk] = np.argmin(d2, axis=1)
    return c.labels[idx].reshape(-1)


def symbol_indices(symbols: np.ndarray, c: Constellation) -> np.ndarray:
    """Indices of the nearest constellation points (same rule as :func:`qam_demap`)."""
    sym = np.asarray(symbols, dtype=complex)
    d2 = np.abs(sym[..., None] - c.points) ** 2
    return np.argmin(d2, axis=-1)
