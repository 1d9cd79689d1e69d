"""End-to-end transceivers sharing one interface, for the harness and the tests.

A link maps ``n_data`` symbols per frame to ``M`` samples and back.  The
receive side is split into a front end (filter-bank analysis or CP-OFDM
demodulation, giving a time-frequency grid) and a decoder (post-coding or
SFFT, giving the data symbols), so a per-bin one-tap stage fits between.
All methods accept a leading batch axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import equalizers as eq
from .channel import ChannelRealization, apply_channel
from .errors import InvalidConfigError
from .filterbank import SynthesisPlan, analyze, global_matrix, synthesize
from .grid import GridConfig
from .numerics import vec, unvec
from .otfs import (OtfsConfig, isfft, ofdm_demodulate, ofdm_modulate, otfs_coding_matrix,
                   otfs_global_matrix, otfs_receive_matrix, sfft)
from .precoder import (coding_matrix, compensation_vector, extract_data, isfft_postcode,
                       isfft_precode, place_data)
from .prototype import build_hermite, build_phydyas

__all__ = ["FbmcLink", "FilterBankLink", "Link", "OfdmLink", "OtfsLink", "make_link"]


class Link:
    name: str
    n_data: int
    M: int
    sample_rate_factor: int  # samples per symbol period used to set the sample rate
    noise_scale: float = 1.0
    # one-tap coefficient of the back-to-back chain, already undone by the decoder
    ref_gain: float = 1.0

    def modulate(self, symbols: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def front_end(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def decode(self, grid: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def one_tap(self, ch: ChannelRealization) -> np.ndarray:
        raise NotImplementedError

    def dense_transmit(self) -> np.ndarray:
        """Transmit matrix from ``vec`` of the time-frequency grid to samples."""
        raise NotImplementedError

    def dense_receive(self) -> np.ndarray:
        raise NotImplementedError

    def dense_coding(self) -> np.ndarray:
        """Coding matrix restricted to the data positions (columns in data order)."""
        raise NotImplementedError

    def one_tap_equalizer(self, h: np.ndarray, noise_power: float) -> np.ndarray:
        """One-tap MMSE that inverts the channel only, leaving the back-to-back gain in place."""
        return self.ref_gain * eq.mmse_one_tap(h, noise_power * self.noise_scale)

    def tx_waveforms(self, chunk: int = 256) -> np.ndarray:
        """Row ``j`` is the transmitted frame for a unit symbol at data position ``j``."""
        out = np.empty((self.n_data, self.M), dtype=complex)
        for start in range(0, self.n_data, chunk):
            stop = min(start + chunk, self.n_data)
            eye = np.zeros((stop - start, self.n_data), dtype=complex)
            eye[np.arange(stop - start), np.arange(start, stop)] = 1
            out[start:stop] = self.modulate(eye)
        return out

    def channel_responses(self, ch: ChannelRealization, waveforms: np.ndarray,
                          chunk: int = 256) -> np.ndarray:
        """Front-end output grid for every data position's waveform through ``ch``."""
        first = self.front_end(apply_channel(waveforms[:1], ch))
        out = np.empty((self.n_data,) + first.shape[1:], dtype=complex)
        for start in range(0, self.n_data, chunk):
            out[start:start + chunk] = self.front_end(apply_channel(waveforms[start:start + chunk], ch))
        return out

    def decode_columns(self, responses: np.ndarray, chunk: int = 256) -> np.ndarray:
        """Matrix whose column ``j`` is the decoded response to data position ``j``."""
        out = np.empty((self.n_data, self.n_data), dtype=complex)
        for start in range(0, self.n_data, chunk):
            out[:, start:start + chunk] = self.decode(responses[start:start + chunk]).T
        return out


@dataclass(eq=False)
class FilterBankLink(Link):
    """The DFT-precoded double-rate filter bank with compensation."""

    cfg: GridConfig
    filter: object = None
    name: str = "FFT2D_FB"
    plan: SynthesisPlan = field(init=False)
    b: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.filter is None:
            self.filter = build_hermite(self.cfg.N)
        self.plan = SynthesisPlan(self.cfg, self.filter)
        self.b = compensation_vector(self.filter, self.cfg)
        self.n_data = self.cfg.n_data
        self.M = self.plan.M
        self.sample_rate_factor = self.cfg.N
        # per-position noise after matched analysis over the transmit power per bin
        self.ref_gain = float(self.filter.taps @ self.filter.taps) / self.cfg.N
        self.noise_scale = self.ref_gain / float(np.mean(self.b**2))

    def modulate(self, symbols):
        return synthesize(isfft_precode(place_data(symbols, self.cfg), self.b, self.cfg), self.plan)

    def front_end(self, r):
        return analyze(r, self.plan)

    def decode(self, grid):
        return extract_data(isfft_postcode(grid, self.b, self.cfg), self.cfg)

    def one_tap(self, ch):
        g = self.filter.taps
        return eq.one_tap_windowed(ch.taps, g, g, self.plan.hop, self.cfg.K_prime,
                                   self.cfg.N, self.cfg.L)

    def dense_transmit(self):
        return global_matrix(self.plan)

    def dense_receive(self):
        return self.dense_transmit().conj().T

    def dense_coding(self):
        return coding_matrix(self.b, self.cfg)[:, self.cfg.active_vec]


@dataclass(eq=False)
class OtfsLink(Link):
    cfg: OtfsConfig
    name: str = "OTFS"

    def __post_init__(self):
        self.n_data = self.cfg.L * self.cfg.K
        self.M = self.cfg.M
        self.sample_rate_factor = self.cfg.N

    def _grid(self, symbols):
        return unvec(np.asarray(symbols), self.cfg.L, self.cfg.K)

    def modulate(self, symbols):
        return ofdm_modulate(isfft(self._grid(symbols)), self.cfg)

    def front_end(self, r):
        return ofdm_demodulate(r, self.cfg)

    def decode(self, grid):
        return vec(sfft(grid))

    def one_tap(self, ch):
        c = self.cfg
        tx = np.ones(c.symbol_len)
        rx = np.r_[np.zeros(c.cp_len), np.ones(c.N)]
        return eq.one_tap_windowed(ch.taps, tx, rx, c.symbol_len, c.K, c.N, c.L)

    def dense_transmit(self):
        return otfs_global_matrix(self.cfg)

    def dense_receive(self):
        return otfs_receive_matrix(self.cfg)

    def dense_coding(self):
        return otfs_coding_matrix(self.cfg)


@dataclass(eq=False)
class OfdmLink(OtfsLink):
    """Plain CP-OFDM: data placed directly on the time-frequency grid."""

    name: str = "OFDM"

    def modulate(self, symbols):
        return ofdm_modulate(self._grid(symbols), self.cfg)

    def decode(self, grid):
        return vec(grid)

    def dense_coding(self):
        return np.eye(self.n_data)


@dataclass(eq=False)
class FbmcLink(Link):
    """FBMC/OQAM transmitter (PHYDYAS, overlap 4): spectral and PAPR reference only.

    Each complex symbol is split into its real and imaginary parts on two
    consecutive half-period slots with the usual ``j^(l+k)`` phase.
    """

    cfg: GridConfig
    overlap: int = 4
    name: str = "FBMC"

    def __post_init__(self):
        self.filter = build_phydyas(self.cfg.N, self.overlap)
        self.plan = SynthesisPlan(self.cfg, self.filter)
        self.n_data = self.cfg.L * self.cfg.K_prime // 2
        self.M = self.plan.M
        self.sample_rate_factor = self.cfg.N
        l = np.arange(self.cfg.L)[:, None]
        k = np.arange(self.cfg.K_prime)[None, :]
        self._phase = 1j ** ((l + k) % 4)

    def modulate(self, symbols):
        s = np.asarray(symbols)
        grid = unvec(s, self.cfg.L, self.cfg.K_prime // 2)
        pam = np.empty(s.shape[:-1] + (self.cfg.L, self.cfg.K_prime))
        pam[..., 0::2] = grid.real
        pam[..., 1::2] = grid.imag
        return synthesize(np.sqrt(2) * pam * self._phase, self.plan)


def make_link(scheme: str, L: int, K_prime: int, N: int, cp_len: int = 0) -> Link:
    """Build a link by scheme name on the shared L, K_prime, N grid."""
    scheme = scheme.upper()
    if scheme == "FFT2D_FB":
        return FilterBankLink(GridConfig(L=L, K_prime=K_prime, N=N))
    if scheme == "OTFS":
        return OtfsLink(OtfsConfig(L=L, K=K_prime // 2, cp_len=cp_len, N=N))
    if scheme == "OFDM":
        return OfdmLink(OtfsConfig(L=L, K=K_prime // 2, cp_len=cp_len, N=N))
    if scheme == "FBMC":
        return FbmcLink(GridConfig(L=L, K_prime=K_prime, N=N))
    raise InvalidConfigError(f"unknown scheme {scheme!r}")
