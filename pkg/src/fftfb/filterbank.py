"""Double-rate filter-bank synthesis and matched analysis.

Symbol ``k`` enters the output at sample ``k*N/2``.  Tap ``m`` of the
prototype multiplies sample ``(m + offset) mod N`` of that symbol's
periodic IFFT output, so the fast path is: zero-padded inverse FFT,
periodic gather, windowing and overlap-add at stride N/2.  Analysis is the
exact adjoint.  Dense matrices exist as oracles and for equalizer design.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, InvalidInputError
from .grid import GridConfig
from .numerics import dft_matrix
from .prototype import PrototypeFilter

__all__ = [
    "SynthesisPlan",
    "analyze",
    "global_matrix",
    "spread_dft",
    "synthesize",
    "toeplitz_matrix",
]


@dataclass(frozen=True)
class SynthesisPlan:
    cfg: GridConfig
    filter: PrototypeFilter

    def __post_init__(self):
        n = self.cfg.N
        if self.filter.n_fft != n:
            raise InvalidConfigError(f"filter built for N={self.filter.n_fft}, grid uses N={n}")
        if len(self.filter) % (n // 2):
            raise InvalidConfigError("filter length must be a multiple of N/2")

    @property
    def hop(self) -> int:
        return self.cfg.N // 2

    @property
    def n_segments(self) -> int:
        return len(self.filter) // self.hop

    @property
    def M(self) -> int:
        return len(self.filter) + (self.cfg.K_prime - 1) * self.hop

    @property
    def tap_index(self) -> np.ndarray:
        return (np.arange(len(self.filter)) + self.filter.offset) % self.cfg.N


def spread_dft(cfg: GridConfig) -> np.ndarray:
    """First L rows of the unitary N-point DFT (L x N)."""
    if cfg.N <= cfg.L:
        raise InvalidConfigError("spreading needs N > L")
    return dft_matrix(cfg.N)[: cfg.L]


def toeplitz_matrix(plan: SynthesisPlan) -> np.ndarray:
    """Dense real ``G`` (M x N*K') with ``s = G @ vec(D)``."""
    cfg = plan.cfg
    taps = plan.filter.taps
    g = np.zeros((plan.M, cfg.N * cfg.K_prime))
    rows = np.arange(len(taps))
    cols = plan.tap_index
    for k in range(cfg.K_prime):
        g[k * plan.hop + rows, k * cfg.N + cols] = taps
    return g


def global_matrix(plan: SynthesisPlan) -> np.ndarray:
    """``G (I_K' kron W~_N^H)`` (M x L*K'), mapping ``vec(X)`` to ``s``."""
    cfg = plan.cfg
    w_h = spread_dft(cfg).conj().T
    g = toeplitz_matrix(plan)
    out = np.empty((plan.M, cfg.L * cfg.K_prime), dtype=complex)
    for k in range(cfg.K_prime):
        out[:, k * cfg.L:(k + 1) * cfg.L] = g[:, k * cfg.N:(k + 1) * cfg.N] @ w_h
    return out


def synthesize(x: np.ndarray, plan: SynthesisPlan) -> np.ndarray:
    """Transmit samples for an L x K' grid, or a leading batch of grids."""
    cfg = plan.cfg
    x = np.asarray(x)
    if x.shape[-2:] != (cfg.L, cfg.K_prime):
        raise InvalidInputError(f"grid must be {cfg.L}x{cfg.K_prime}, got {x.shape[-2:]}")
    d = np.fft.ifft(x, n=cfg.N, axis=-2, norm="ortho")
    frames = d[..., plan.tap_index, :] * plan.filter.taps[:, None]
    # (..., K', segments, hop)
    frames = np.swapaxes(frames, -1, -2).reshape(
        x.shape[:-2] + (cfg.K_prime, plan.n_segments, plan.hop))
    k_p = cfg.K_prime
    out = np.zeros(x.shape[:-2] + (k_p + plan.n_segments - 1, plan.hop), dtype=complex)
    for j in range(plan.n_segments):
        out[..., j:j + k_p, :] += frames[..., :, j, :]
    return out.reshape(x.shape[:-2] + (plan.M,))


def analyze(r: np.ndarray, plan: SynthesisPlan) -> np.ndarray:
    """Matched analysis ``y_k = W~_N z_k`` with ``z = G^T r``; batch-aware."""
    cfg = plan.cfg
    r = np.asarray(r)
    if r.shape[-1] != plan.M:
        raise InvalidInputError(f"expected {plan.M} samples, got {r.shape[-1]}")
    batch = r.shape[:-1]
    k_p, n_seg, hop = cfg.K_prime, plan.n_segments, plan.hop
    chunks = r.reshape(batch + (k_p + n_seg - 1, hop))
    win = np.stack([chunks[..., j:j + k_p, :] for j in range(n_seg)], axis=-2)
    win = win.reshape(batch + (k_p, len(plan.filter))) * plan.filter.taps
    off = plan.filter.offset
    span = -(-(off + len(plan.filter)) // cfg.N) * cfg.N
    buf = np.zeros(batch + (k_p, span), dtype=complex)
    buf[..., off:off + len(plan.filter)] = win
    z = buf.reshape(batch + (k_p, span // cfg.N, cfg.N)).sum(axis=-2)
    y = np.fft.fft(z, axis=-1, norm="ortho")[..., : cfg.L]
    return np.swapaxes(y, -1, -2)
