"""Perfect-CSI receivers: one-tap frequency MMSE, delay-Doppler MMSE and hybrid IIC.

The dense builders take the transmit matrix ``g_bar`` and, optionally, a
receive matrix ``g_rx``.  For the filter bank the receiver is matched,
``g_rx = g_bar^H``, which is the default.  The CP-OFDM core of OTFS passes
its CP-removal plus DFT matrix instead.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import InvalidConfigError, InvalidDimensionError, InvalidInputError, SingularEqualizerError
from .numerics import Constellation, symbol_indices

__all__ = [
    "MmseDdSolver",
    "apply_one_tap",
    "build_R",
    "effective_channel",
    "iic_equalize",
    "mmse_dd_equalize",
    "mmse_one_tap",
    "one_tap_channel",
    "one_tap_windowed",
]


def _receive(g_bar: np.ndarray, g_rx: np.ndarray | None) -> np.ndarray:
    return g_bar.conj().T if g_rx is None else g_rx


def _check_chain(h: np.ndarray, g_bar: np.ndarray, g_rx: np.ndarray):
    m = h.shape[0]
    if h.shape != (m, m) or g_bar.shape[0] != m or g_rx.shape[1] != m:
        raise InvalidDimensionError(
            f"inconsistent dims: H {h.shape}, G {g_bar.shape}, receive {g_rx.shape}")


def one_tap_channel(h: np.ndarray, g_bar: np.ndarray, g_rx: np.ndarray | None = None) -> np.ndarray:
    """``diag(g_rx H g_bar)`` without forming the full product."""
    g_rx = _receive(g_bar, g_rx)
    _check_chain(h, g_bar, g_rx)
    return np.einsum("ij,ji->i", g_rx, h @ g_bar)


def one_tap_windowed(taps: np.ndarray, tx_win: np.ndarray, rx_win: np.ndarray,
                     stride: int, n_symbols: int, n_fft: int, n_bins: int) -> np.ndarray:
    """One-tap coefficients of a windowed-DFT multicarrier link, as an ``n_bins x n_symbols`` grid.

    Symbol ``k`` occupies samples ``[k*stride, k*stride + len(win))``; the
    transmit subcarrier ``l`` at local sample ``m`` is ``tx_win[m] e^{j2pi l m/N}/sqrt(N)``
    up to a phase common to transmit and receive, and the receiver correlates
    with ``rx_win`` times the same exponential.  ``taps`` is ``h[m, lag]``.
    """
    n_win = tx_win.size
    n_lags = taps.shape[1]
    if n_lags > n_fft:
        raise InvalidInputError("channel longer than the FFT size")
    q = np.zeros((n_symbols, n_lags), dtype=complex)
    for lag in range(min(n_lags, n_win)):
        w = rx_win[lag:] * tx_win[: n_win - lag]
        if not np.any(taps[:, lag]) or not np.any(w):
            continue
        idx = np.arange(n_symbols)[:, None] * stride + np.arange(lag, n_win)[None, :]
        q[:, lag] = taps[idx, lag] @ w
    return (np.fft.fft(q, n=n_fft, axis=1)[:, :n_bins] / n_fft).T


def mmse_one_tap(h: np.ndarray, noise_power: float) -> np.ndarray:
    """``conj(h) / (|h|^2 + noise_power)``; zero noise falls back to ZF."""
    h = np.asarray(h)
    if noise_power < 0:
        raise InvalidConfigError("noise power must be >= 0")
    if noise_power == 0:
        if np.any(h == 0):
            raise SingularEqualizerError("zero-forcing with a zero channel coefficient")
        return 1.0 / h
    return h.conj() / (np.abs(h) ** 2 + noise_power)


def apply_one_tap(y: np.ndarray, e: np.ndarray) -> np.ndarray:
    y = np.asarray(y)
    e = np.asarray(e)
    if e.shape != y.shape[-e.ndim:]:
        raise InvalidDimensionError(f"equalizer shape {e.shape} does not match {y.shape}")
    return y * e


def effective_channel(h: np.ndarray, g_bar: np.ndarray, c: np.ndarray,
                      g_rx: np.ndarray | None = None) -> np.ndarray:
    """``C^H g_rx H g_bar C``."""
    g_rx = _receive(g_bar, g_rx)
    _check_chain(h, g_bar, g_rx)
    if c.shape[0] != g_bar.shape[1] or g_rx.shape[0] != c.shape[0]:
        raise InvalidDimensionError("coding matrix does not match the filter bank")
    return c.conj().T @ (g_rx @ (h @ (g_bar @ c)))


def build_R(h: np.ndarray, g_bar: np.ndarray, c: np.ndarray, e: np.ndarray,
            g_rx: np.ndarray | None = None) -> np.ndarray:
    """``C^H diag(e) g_rx H g_bar C``; rows and columns follow ``vec(A')``."""
    g_rx = _receive(g_bar, g_rx)
    _check_chain(h, g_bar, g_rx)
    e = np.asarray(e).ravel()
    if e.size != c.shape[0]:
        raise InvalidDimensionError("equalizer length does not match the coding matrix")
    return c.conj().T @ (e[:, None] * (g_rx @ (h @ (g_bar @ c))))


class MmseDdSolver:
    """Regularized least squares on a fixed effective channel, reused across noise levels.

    ``h_ef`` may already be restricted to the data columns; only its Gram
    matrix and the matched-filter output are needed.
    """

    def __init__(self, h_ef: np.ndarray):
        h_ef = np.asarray(h_ef)
        if not np.all(np.isfinite(h_ef)):
            raise InvalidInputError("effective channel has non-finite entries")
        self.h_ef = h_ef
        self.gram = h_ef.conj().T @ h_ef

    def solve(self, a_tilde: np.ndarray, noise_power: float) -> np.ndarray:
        """Estimate for ``a_tilde`` of shape ``(rows,)`` or ``(rows, batch)``."""
        if noise_power <= 0:
            raise InvalidConfigError("MMSE-DD needs a positive noise power")
        rhs = self.h_ef.conj().T @ a_tilde
        m = self.gram + noise_power * np.eye(self.gram.shape[0])
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(m, check_finite=False), rhs,
                                      check_finite=False)


def mmse_dd_equalize(h_ef: np.ndarray, noise_power: float, a_tilde: np.ndarray,
                     active: np.ndarray | None = None) -> np.ndarray:
    """``H_ef^H (H_ef H_ef^H + s2 I)^-1 a~``.

    With ``active`` given, the inactive columns (known zeros) are removed
    first and the estimate is scattered back with zeros elsewhere.
    """
    h_ef = np.asarray(h_ef)
    if active is None:
        return MmseDdSolver(h_ef).solve(a_tilde, noise_power)
    out = np.zeros(h_ef.shape[1:] + np.shape(a_tilde)[1:], dtype=complex)
    out[active] = MmseDdSolver(h_ef[:, active]).solve(a_tilde, noise_power)
    return out


def iic_equalize(a_tilde: np.ndarray, R: np.ndarray, c: Constellation, iterations: int = 1,
                 active: np.ndarray | None = None) -> np.ndarray:
    """Iterative interference cancellation ``a^{i+1} = a~ - (R - diag R) Q(a^i)``.

    Each quantizer input is divided by the matching diagonal entry of ``R``
    before the hard decision; inactive entries decide to zero.  ``a_tilde``
    may carry a trailing batch axis.
    """
    if iterations < 1:
        raise InvalidConfigError("iterations must be >= 1")
    a_tilde = np.asarray(a_tilde)
    n = R.shape[0]
    act = np.arange(n) if active is None else np.asarray(active)
    d = np.diag(R)
    off = R[:, act] - np.diag(d)[:, act]
    dd = d[act].reshape((-1,) + (1,) * (a_tilde.ndim - 1))
    est = a_tilde
    for _ in range(iterations):
        q = c.points[symbol_indices(est[act] / dd, c)]
        est = a_tilde - off @ q
    return est
