"""PAPR, PSD, bit-error counting and closed-form complexity counts."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.signal
import scipy.stats

from .errors import InvalidConfigError, InvalidInputError

__all__ = [
    "CcdfCurve",
    "PsdCurve",
    "Receiver",
    "Scheme",
    "ber_count",
    "ber_interval",
    "ccdf_from_papr",
    "complexity_estimate",
    "papr_at",
    "papr_ccdf",
    "papr_db",
    "psd_welch",
    "rayleigh_qpsk_ber",
]


@dataclass(frozen=True)
class CcdfCurve:
    thresholds: np.ndarray
    probabilities: np.ndarray
    sample_count: int


@dataclass(frozen=True)
class PsdCurve:
    """Two-sided PSD, centered; ``peak_density`` undoes the 0 dB normalization."""

    freqs: np.ndarray
    power_db: np.ndarray
    peak_density: float

    def level_at(self, freq: float) -> float:
        return float(np.interp(freq, self.freqs, self.power_db))


def papr_db(frames) -> np.ndarray:
    """Per-frame ``max|s|^2 / mean|s|^2`` in dB; rows of a 2D array are frames."""
    if isinstance(frames, np.ndarray) and frames.ndim == 2:
        p = np.abs(frames) ** 2
        return 10 * np.log10(p.max(axis=1) / p.mean(axis=1))
    frames = list(frames)
    if not frames:
        raise InvalidInputError("no frames given")
    return np.array([papr_db(np.asarray(f)[None, :])[0] for f in frames])


def papr_ccdf(frames, thresholds) -> CcdfCurve:
    return ccdf_from_papr(papr_db(frames), thresholds)


def ccdf_from_papr(paprs: np.ndarray, thresholds) -> CcdfCurve:
    """Fraction of per-frame PAPR values (dB) strictly above each threshold."""
    paprs = np.asarray(paprs, dtype=float)
    if paprs.size == 0:
        raise InvalidInputError("no frames given")
    th = np.asarray(thresholds, dtype=float)
    prob = (paprs[None, :] > th[:, None]).mean(axis=1)
    return CcdfCurve(thresholds=th, probabilities=prob, sample_count=int(paprs.size))


def papr_at(paprs: np.ndarray, ccdf: float) -> float:
    """PAPR level exceeded by a fraction ``ccdf`` of frames (empirical quantile)."""
    return float(np.quantile(np.asarray(paprs), 1.0 - ccdf, method="higher"))


def psd_welch(s: np.ndarray, segment_len: int, overlap: float = 0.5, fs: float = 1.0) -> PsdCurve:
    s = np.asarray(s)
    if segment_len > s.size:
        raise InvalidInputError(f"segment length {segment_len} exceeds signal length {s.size}")
    if not 0 <= overlap < 1:
        raise InvalidConfigError("overlap must lie in [0, 1)")
    f, p = scipy.signal.welch(s, fs=fs, window="hann", nperseg=segment_len,
                              noverlap=int(overlap * segment_len), detrend=False,
                              return_onesided=False, scaling="density")
    f = np.fft.fftshift(f)
    p = np.fft.fftshift(p)
    peak = float(p.max())
    return PsdCurve(freqs=f, power_db=10 * np.log10(np.maximum(p / peak, 1e-300)), peak_density=peak)


def ber_count(tx_bits: np.ndarray, rx_bits: np.ndarray) -> tuple[int, int]:
    tx = np.asarray(tx_bits)
    rx = np.asarray(rx_bits)
    if tx.shape != rx.shape:
        raise InvalidInputError(f"bit arrays differ in shape: {tx.shape} vs {rx.shape}")
    return int(np.count_nonzero(tx != rx)), int(tx.size)


def ber_interval(errors: int, total: int, confidence: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval for the bit error probability."""
    if total <= 0:
        return 0.0, 1.0
    a = (1 - confidence) / 2
    lo = scipy.stats.beta.ppf(a, errors, total - errors + 1) if errors > 0 else 0.0
    hi = scipy.stats.beta.ppf(1 - a, errors + 1, total - errors) if errors < total else 1.0
    return float(lo), float(hi)


def rayleigh_qpsk_ber(snr_db) -> np.ndarray:
    """Gray 4-QAM over flat Rayleigh fading; SNR is the per-symbol ratio."""
    g = 10 ** (np.asarray(snr_db, dtype=float) / 10) / 2
    return 0.5 * (1 - np.sqrt(g / (1 + g)))


class Scheme(str, Enum):
    FBMC = "FBMC"
    DFT_PRECODED_FB = "DFT_PRECODED_FB"
    OTFS = "OTFS"
    FFT2D_FB = "FFT2D_FB"


class Receiver(str, Enum):
    MMSE_FREQ = "MMSE_FREQ"
    MMSE_DD = "MMSE_DD"
    HYBRID = "HYBRID"


def _lg(x: float):
    v = math.log2(x)
    return int(v) if v.is_integer() else v


def _clean(v):
    return int(v) if float(v).is_integer() else v


def complexity_estimate(scheme, receiver, *, L: int, N: int, K_prime: int, K: int | None = None,
                        overlap: float = 1.5) -> tuple:
    """Complex multiplications of (transmitter, receiver equalizer), log base 2.

    OTFS receivers use K in place of K' and drop the halving that the
    guard band allows the filter-bank receivers.
    """
    try:
        scheme = Scheme(scheme)
        receiver = Receiver(receiver)
    except ValueError as exc:
        raise InvalidConfigError(str(exc)) from None
    K = K_prime // 2 if K is None else K
    on = overlap * N
    fb_core = N * _lg(N) + on
    if scheme is Scheme.FBMC:
        tx = L + fb_core
    elif scheme is Scheme.DFT_PRECODED_FB:
        tx = 2 * (L / 2 + L * _lg(L / 2) + fb_core)
    elif scheme is Scheme.OTFS:
        tx = L * K * _lg(L) + L * K * _lg(K) + L * _lg(L)
    else:
        tx = L / 2 + L * K_prime * _lg(L / 2) + (L / 2) * K_prime * _lg(K_prime) + fb_core
    if scheme is Scheme.OTFS:
        full, data = L * K, L * K
    else:
        full, data = L * K_prime, L * K_prime / 2
    if receiver is Receiver.MMSE_FREQ:
        rx = full
    elif receiver is Receiver.MMSE_DD:
        rx = data**3 + data**2
    else:
        rx = full + data**2
    return _clean(tx), _clean(rx)
