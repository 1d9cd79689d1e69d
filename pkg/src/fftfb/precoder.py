"""Delay-Doppler placement, ISFFT pre/post-coding and filter compensation."""

from __future__ import annotations

import numpy as np

from .errors import InvalidConfigError, InvalidInputError, SingularCompensationError
from .filterbank import spread_dft, toeplitz_matrix, SynthesisPlan
from .grid import GridConfig
from .numerics import dft_matrix
from .prototype import PrototypeFilter

__all__ = [
    "GridConfig",
    "coding_matrix",
    "compensation_vector",
    "extract_data",
    "isfft_postcode",
    "isfft_precode",
    "orthogonality_matrix",
    "orthogonality_residual",
    "place_data",
]

_COMPENSATION_CACHE: dict[tuple, np.ndarray] = {}


def place_data(symbols: np.ndarray, cfg: GridConfig) -> np.ndarray:
    """Build ``A'``: each column holds L/2 symbols, split over the first and last L/4 rows.

    A leading batch axis on ``symbols`` is carried through to the grid.
    """
    s = np.asarray(symbols)
    if s.shape[-1] != cfg.n_data:
        raise InvalidInputError(f"expected {cfg.n_data} symbols, got {s.shape[-1]}")
    grid = np.zeros(s.shape[:-1] + (cfg.L, cfg.K_prime), dtype=complex)
    cols = s.reshape(s.shape[:-1] + (cfg.K_prime, cfg.L // 2))
    grid[..., cfg.active, :] = np.swapaxes(cols, -1, -2)
    return grid


def extract_data(a_tilde: np.ndarray, cfg: GridConfig) -> np.ndarray:
    a = np.asarray(a_tilde)
    rows = a[..., cfg.active, :]
    return np.swapaxes(rows, -1, -2).reshape(a.shape[:-2] + (cfg.n_data,))


def _check_grid(x: np.ndarray, cfg: GridConfig, what: str):
    if x.shape[-2:] != (cfg.L, cfg.K_prime):
        raise InvalidInputError(f"{what} must be {cfg.L}x{cfg.K_prime}, got {x.shape[-2:]}")


def isfft_precode(grid: np.ndarray, b: np.ndarray, cfg: GridConfig) -> np.ndarray:
    """``X = W_L diag(b) A' W_K'^H`` for a grid or a leading batch of grids."""
    a = np.asarray(grid)
    _check_grid(a, cfg, "A'")
    x = np.fft.fft(b[:, None] * a, axis=-2, norm="ortho")
    return np.fft.ifft(x, axis=-1, norm="ortho")


def isfft_postcode(x_tilde: np.ndarray, b: np.ndarray, cfg: GridConfig) -> np.ndarray:
    """``A~ = diag(b) W_L^H X~ W_K'``, the adjoint of :func:`isfft_precode`.

    The compensation is applied on the delay side, after the inverse DFT,
    which makes the post-coder the Hermitian of the coding matrix.
    """
    x = np.asarray(x_tilde)
    _check_grid(x, cfg, "X~")
    a = np.fft.ifft(x, axis=-2, norm="ortho")
    return b[:, None] * np.fft.fft(a, axis=-1, norm="ortho")


def coding_matrix(b: np.ndarray, cfg: GridConfig) -> np.ndarray:
    """Dense ``C`` with ``vec(X) == C @ vec(A')``."""
    b = np.asarray(b)
    if b.shape != (cfg.L,):
        raise InvalidInputError(f"compensation vector must have length {cfg.L}")
    c_f = dft_matrix(cfg.L) * b[None, :]
    # W_K' is symmetric, so (W_K'^H)^T == W_K'^H
    return np.kron(dft_matrix(cfg.K_prime).conj().T, c_f)


def _single_symbol_gram(f: PrototypeFilter, L: int, N: int) -> np.ndarray:
    """``W~_N G~^T G~ W~_N^H`` for a one-symbol block (L x L)."""
    cfg1 = GridConfig(L=L, K_prime=1, N=N)
    g1 = toeplitz_matrix(SynthesisPlan(cfg1, f))
    w = spread_dft(cfg1)
    return w @ (g1.T @ g1) @ w.conj().T


def compensation_vector(f: PrototypeFilter, cfg: GridConfig) -> np.ndarray:
    """Per-delay compensation ``b~``; zero on the guard rows.

    Depends on the filter, L and N only, and is cached on those.
    """
    if f.overlap > 1.5:
        raise InvalidConfigError(f"compensation requires overlap <= 1.5, got {f.overlap}")
    if f.n_fft != cfg.N:
        raise InvalidConfigError(f"filter built for N={f.n_fft}, grid uses N={cfg.N}")
    key = (f.key, cfg.L, cfg.N)
    cached = _COMPENSATION_CACHE.get(key)
    if cached is not None:
        return cached
    w_l = dft_matrix(cfg.L)
    c = np.real(np.diag(w_l.conj().T @ _single_symbol_gram(f, cfg.L, cfg.N) @ w_l))
    act = cfg.active
    if np.any(c[act] <= 1e-14):
        raise SingularCompensationError("non-positive compensation coefficient on an active row")
    b = np.zeros(cfg.L)
    b[act] = 1.0 / np.sqrt(c[act])
    b.setflags(write=False)
    _COMPENSATION_CACHE[key] = b
    return b


def orthogonality_matrix(f: PrototypeFilter, cfg: GridConfig) -> np.ndarray:
    """``C_f^H W~_N G~^T G~ W~_N^H C_f``; ideally ones on the active diagonal."""
    b = compensation_vector(f, cfg)
    c_f = dft_matrix(cfg.L) * b[None, :]
    return c_f.conj().T @ _single_symbol_gram(f, cfg.L, cfg.N) @ c_f


def orthogonality_residual(f: PrototypeFilter, cfg: GridConfig) -> tuple[float, float]:
    """(max |diag - 1| on active rows, off-diagonal/diagonal power in dB)."""
    m = orthogonality_matrix(f, cfg)[np.ix_(cfg.active, cfg.active)]
    d = np.diag(m)
    off = m - np.diag(d)
    ratio = np.sum(np.abs(off) ** 2) / np.sum(np.abs(d) ** 2)
    return float(np.max(np.abs(d - 1))), float(10 * np.log10(ratio))
