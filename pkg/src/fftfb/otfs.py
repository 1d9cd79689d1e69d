"""CP-OFDM core and the conventional OTFS transceiver built on it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .numerics import dft_matrix

__all__ = [
    "OtfsConfig",
    "isfft",
    "ofdm_demodulate",
    "ofdm_modulate",
    "otfs_coding_matrix",
    "otfs_demodulate",
    "otfs_global_matrix",
    "otfs_modulate",
    "otfs_receive_matrix",
    "sfft",
]


@dataclass(frozen=True)
class OtfsConfig:
    """L band subcarriers (the first L bins of an N-point IFFT), K symbols, per-symbol CP."""

    L: int
    K: int
    cp_len: int
    N: int

    def __post_init__(self):
        if self.L < 1 or self.K < 1:
            raise InvalidConfigError("L and K must be >= 1")
        if self.N < self.L:
            raise InvalidConfigError(f"N={self.N} must be >= L={self.L}")
        if not 0 <= self.cp_len <= self.N:
            raise InvalidConfigError("cp_len must lie in [0, N]")

    @property
    def symbol_len(self) -> int:
        return self.N + self.cp_len

    @property
    def M(self) -> int:
        return self.K * self.symbol_len


def _check(grid: np.ndarray, cfg: OtfsConfig):
    if grid.shape[-2:] != (cfg.L, cfg.K):
        raise InvalidInputError(f"grid must be {cfg.L}x{cfg.K}, got {grid.shape[-2:]}")


def isfft(a: np.ndarray) -> np.ndarray:
    """``W_L A W_K^H`` over the last two axes."""
    return np.fft.ifft(np.fft.fft(a, axis=-2, norm="ortho"), axis=-1, norm="ortho")


def sfft(x: np.ndarray) -> np.ndarray:
    """``W_L^H X W_K``, the inverse of :func:`isfft`."""
    return np.fft.fft(np.fft.ifft(x, axis=-2, norm="ortho"), axis=-1, norm="ortho")


def ofdm_modulate(x: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    """Serialize a time-frequency grid: per-column IFFT, cyclic prefix, concatenation."""
    x = np.asarray(x)
    _check(x, cfg)
    d = np.fft.ifft(x, n=cfg.N, axis=-2, norm="ortho")
    if cfg.cp_len:
        d = np.concatenate([d[..., cfg.N - cfg.cp_len:, :], d], axis=-2)
    return np.swapaxes(d, -1, -2).reshape(x.shape[:-2] + (cfg.M,))


def ofdm_demodulate(r: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    r = np.asarray(r)
    if r.shape[-1] != cfg.M:
        raise InvalidInputError(f"expected {cfg.M} samples, got {r.shape[-1]}")
    frames = r.reshape(r.shape[:-1] + (cfg.K, cfg.symbol_len))[..., cfg.cp_len:]
    y = np.fft.fft(frames, axis=-1, norm="ortho")[..., : cfg.L]
    return np.swapaxes(y, -1, -2)


def otfs_modulate(a: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    a = np.asarray(a)
    _check(a, cfg)
    return ofdm_modulate(isfft(a), cfg)


def otfs_demodulate(r: np.ndarray, cfg: OtfsConfig) -> np.ndarray:
    """SFFT of the OFDM output; a one-tap stage, if any, goes between the two."""
    return sfft(ofdm_demodulate(r, cfg))


def otfs_global_matrix(cfg: OtfsConfig) -> np.ndarray:
    """Dense map from ``vec(X)`` to the transmitted samples (M x L*K)."""
    w_h = dft_matrix(cfg.N)[: cfg.L].conj().T
    blk = np.vstack([w_h[cfg.N - cfg.cp_len:], w_h]) if cfg.cp_len else w_h
    return np.kron(np.eye(cfg.K), blk)


def otfs_receive_matrix(cfg: OtfsConfig) -> np.ndarray:
    """Dense CP removal plus band DFT (L*K x M); the receive counterpart of the global matrix."""
    w = dft_matrix(cfg.N)[: cfg.L]
    blk = np.hstack([np.zeros((cfg.L, cfg.cp_len)), w])
    return np.kron(np.eye(cfg.K), blk)


def otfs_coding_matrix(cfg: OtfsConfig) -> np.ndarray:
    """``vec(W_L A W_K^H) = (conj(W_K) kron W_L) vec(A)``."""
    return np.kron(dft_matrix(cfg.K).conj(), dft_matrix(cfg.L))
