"""Doubly-selective Rayleigh channel: Vehicular A delays with Jakes fading."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

SPEED_OF_LIGHT = 3e8
JAKES_SINUSOIDS = 64

VEH_A_DELAYS_NS = (0.0, 310.0, 710.0, 1090.0, 1730.0, 2510.0)
VEH_A_POWERS_DB = (0.0, -1.0, -9.0, -10.0, -15.0, -20.0)


@dataclass(frozen=True)
class ChannelProfile:
    tap_delays: tuple[float, ...]
    tap_powers: tuple[float, ...]
    velocity: float
    carrier_freq: float
    sample_rate: float

    def __post_init__(self):
        d = np.asarray(self.tap_delays, dtype=float)
        if d.size == 0 or d.size != len(self.tap_powers):
            raise InvalidConfigError("delays and powers must be non-empty and of equal length")
        if d[0] != 0 or np.any(np.diff(d) < 0):
            raise InvalidConfigError("delays must start at 0 and be nondecreasing")
        if not np.all(np.isfinite(self.tap_powers)):
            raise InvalidConfigError("tap powers must be finite")
        if self.velocity < 0:
            raise InvalidConfigError("velocity must be >= 0")
        if self.sample_rate <= 0:
            raise InvalidConfigError("sample rate must be positive")

    @property
    def doppler(self) -> float:
        return self.velocity * self.carrier_freq / SPEED_OF_LIGHT

    def discrete_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer lags (rounded to the nearest sample) and unit-sum linear powers."""
        lags = np.rint(np.asarray(self.tap_delays) * self.sample_rate).astype(int)
        power = 10.0 ** (np.asarray(self.tap_powers, dtype=float) / 10)
        uniq, inv = np.unique(lags, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, power)
        return uniq, merged / merged.sum()


def vehicular_a(velocity_kmh: float, carrier_freq: float, sample_rate: float) -> ChannelProfile:
    return ChannelProfile(
        tap_delays=tuple(d * 1e-9 for d in VEH_A_DELAYS_NS),
        tap_powers=VEH_A_POWERS_DB,
        velocity=velocity_kmh / 3.6,
        carrier_freq=carrier_freq,
        sample_rate=sample_rate,
    )


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """``taps[m, l]`` is the gain at time sample ``m`` for lag ``l``."""

    taps: np.ndarray
    rng_seed: object = field(default=None)

    @property
    def n_samples(self) -> int:
        return self.taps.shape[0]

    @property
    def n_lags(self) -> int:
        return self.taps.shape[1]


def _jakes(n: int, fd_norm: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-power sum-of-sinusoids process; ``fd_norm`` is f_d / sample_rate."""
    ns = JAKES_SINUSOIDS
    theta = rng.uniform(-np.pi, np.pi)
    phi = rng.uniform(-np.pi, np.pi, ns)
    alpha = (2 * np.pi * np.arange(1, ns + 1) - np.pi + theta) / ns
    if fd_norm == 0:
        return np.full(n, np.exp(1j * phi).sum() / np.sqrt(ns))
    w = 2 * np.pi * fd_norm * np.cos(alpha)
    return np.exp(1j * (np.outer(np.arange(n), w) + phi)).sum(axis=1) / np.sqrt(ns)


def generate_channel(p: ChannelProfile, m_samples: int, seed) -> ChannelRealization:
    """Independent Jakes-faded taps on the discretized delay profile.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    if m_samples < 1:
        raise InvalidInputError("m_samples must be >= 1")
    fd = p.doppler
    if fd >= p.sample_rate / 2:
        raise InvalidConfigError(f"Doppler {fd:.1f} Hz must be below half the sample rate")
    rng = np.random.default_rng(seed)
    lags, power = p.discrete_profile()
    taps = np.zeros((m_samples, lags[-1] + 1), dtype=complex)
    for lag, pw in zip(lags, power):
        taps[:, lag] = np.sqrt(pw) * _jakes(m_samples, fd / p.sample_rate, rng)
    return ChannelRealization(taps=taps, rng_seed=seed)


def apply_channel(s: np.ndarray, ch: ChannelRealization) -> np.ndarray:
    """Linear time-varying convolution; a leading batch on ``s`` is allowed."""
    s = np.asarray(s)
    m = ch.n_samples
    if s.shape[-1] != m:
        raise InvalidInputError(f"signal length {s.shape[-1]} != channel extent {m}")
    r = s * ch.taps[:, 0]
    for lag in range(1, ch.n_lags):
        h = ch.taps[lag:, lag]
        if np.any(h):
            r[..., lag:] += h * s[..., : m - lag]
    return r


def dense_matrix(ch: ChannelRealization, m: int) -> np.ndarray:
    if m != ch.n_samples:
        raise InvalidInputError(f"size {m} != channel extent {ch.n_samples}")
    h = np.zeros((m, m), dtype=complex)
    rows = np.arange(m)
    for lag in range(min(ch.n_lags, m)):
        h[rows[lag:], rows[lag:] - lag] = ch.taps[lag:, lag]
    return h


def add_awgn(x: np.ndarray, noise_power: float, seed) -> np.ndarray:
    if noise_power < 0:
        raise InvalidConfigError("noise power must be >= 0")
    x = np.asarray(x)
    if noise_power == 0:
        return x.copy()
    return x + complex_noise(x.shape, np.random.default_rng(seed)) * np.sqrt(noise_power)


def complex_noise(shape, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
