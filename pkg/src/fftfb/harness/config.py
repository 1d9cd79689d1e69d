"""INI experiment configuration with line-anchored validation errors."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..errors import InvalidConfigError

SCHEMES = ("FFT2D_FB", "OTFS", "OFDM", "FBMC")
RECEIVERS = ("MMSE_FREQ", "MMSE_DD", "HYBRID")
MODULATIONS = (4, 16)
PROFILES = ("vehicular_a", "flat")
ENV_PREFIX = "FFTFB_"


@dataclass(frozen=True)
class GridParams:
    L: int = 128
    K_prime: int = 16
    N: int = 256
    overlap: float = 1.5
    cp_len: int = 16


@dataclass(frozen=True)
class ChannelParams:
    profile: str = "vehicular_a"
    carrier_hz: float = 2.5e9
    subcarrier_spacing_hz: float = 15e3


@dataclass(frozen=True)
class PaprParams:
    schemes: tuple[str, ...] = ("FFT2D_FB", "OTFS", "OFDM", "FBMC")
    modulation: int = 4
    frames: int = 100_000
    thresholds_db: tuple[float, ...] = tuple(np.round(np.arange(4.0, 13.01, 0.25), 2))
    ccdf_target: float = 1e-3
    # CP-OFDM grid for OTFS/OFDM in this study; None keeps the [grid] values
    otfs_n: int | None = None
    otfs_cp_len: int | None = None


@dataclass(frozen=True)
class PsdParams:
    schemes: tuple[str, ...] = ("FFT2D_FB", "OTFS", "OFDM", "FBMC")
    modulation: int = 4
    frames: int = 200
    segment_factor: int = 4
    overlap: float = 0.5
    oob_offset_subcarriers: float = 10.0


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    schemes: tuple[str, ...] = ("FFT2D_FB", "OTFS")
    receivers: tuple[str, ...] = ("MMSE_FREQ",)
    modulations: tuple[int, ...] = (4,)
    snr_db: tuple[float, ...] = (0.0, 10.0, 20.0, 30.0)
    velocities_kmh: tuple[float, ...] = (300.0,)
    trials: int = 10
    min_errors: int = 200
    min_bits: int = 0
    master_seed: int = 1
    output_dir: str = "out"
    iic_iterations: int = 1
    timing: bool = False
    workers: int = 1
    max_minutes: float | None = None
    grid: GridParams = field(default_factory=GridParams)
    channel: ChannelParams = field(default_factory=ChannelParams)
    papr: PaprParams = field(default_factory=PaprParams)
    psd: PsdParams = field(default_factory=PsdParams)
    source: str = "<defaults>"

    @property
    def sample_rate(self) -> float:
        return self.grid.N * self.channel.subcarrier_spacing_hz


class _Reader:
    """Reads typed values and reports ``path:line:`` on failure."""

    def __init__(self, path: str, text: str):
        self.path = path
        self.lines: dict[tuple[str, str], int] = {}
        self.section_lines: dict[str, int] = {}
        current = None
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line[0] in "#;":
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                self.section_lines[current] = no
            elif current is not None and ("=" in line or ":" in line):
                sep = min(i for i in (line.find("="), line.find(":")) if i >= 0)
                self.lines[(current, line[:sep].strip().lower())] = no

    def fail(self, section: str, key: str | None, msg: str):
        no = self.lines.get((section, key), self.section_lines.get(section, 1)) if key else \
            self.section_lines.get(section, 1)
        raise InvalidConfigError(f"{self.path}:{no}: [{section}] {key or ''}: {msg}".replace(" : ", ": "))

    def conv(self, section, key, raw, kind):
        try:
            if kind is bool:
                v = raw.strip().lower()
                if v in ("1", "true", "yes", "on"):
                    return True
                if v in ("0", "false", "no", "off"):
                    return False
                raise ValueError(raw)
            return kind(raw.strip())
        except ValueError:
            self.fail(section, key, f"cannot parse {raw!r} as {kind.__name__}")

    def values(self, section, key, raw, kind):
        out = []
        for item in (p.strip() for p in raw.split(",")):
            if not item:
                continue
            if kind is float and item.count(":") == 2:
                a, step, b = (self.conv(section, key, x, float) for x in item.split(":"))
                if step <= 0:
                    self.fail(section, key, "range step must be positive")
                out.extend(float(v) for v in np.round(np.arange(a, b + step / 2, step), 10))
            else:
                out.append(self.conv(section, key, item, kind))
        if not out:
            self.fail(section, key, "empty list")
        return tuple(out)


_EXPERIMENT_KEYS = {
    "name": str, "schemes": [str], "receivers": [str], "modulations": [int], "snr_db": [float],
    "velocities_kmh": [float], "trials": int, "min_errors": int, "min_bits": int,
    "master_seed": int, "output_dir": str, "iic_iterations": int, "timing": bool,
}
_SECTIONS = {
    "grid": (GridParams, {"l": ("L", int), "k_prime": ("K_prime", int), "n": ("N", int),
                          "overlap": ("overlap", float), "cp_len": ("cp_len", int)}),
    "channel": (ChannelParams, {"profile": ("profile", str), "carrier_hz": ("carrier_hz", float),
                                "subcarrier_spacing_hz": ("subcarrier_spacing_hz", float)}),
    "papr": (PaprParams, {"schemes": ("schemes", [str]), "modulation": ("modulation", int),
                          "frames": ("frames", int), "thresholds_db": ("thresholds_db", [float]),
                          "ccdf_target": ("ccdf_target", float),
                          "otfs_n": ("otfs_n", int), "otfs_cp_len": ("otfs_cp_len", int)}),
    "psd": (PsdParams, {"schemes": ("schemes", [str]), "modulation": ("modulation", int),
                        "frames": ("frames", int), "segment_factor": ("segment_factor", int),
                        "overlap": ("overlap", float),
                        "oob_offset_subcarriers": ("oob_offset_subcarriers", float)}),
}


def _read(rd: _Reader, section, key, raw, kind):
    if isinstance(kind, list):
        return rd.values(section, key, raw, kind[0])
    return rd.conv(section, key, raw, kind)


def load_config(path: str | os.PathLike) -> ExperimentConfig:
    path = str(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return parse_config(text, path)


def parse_config(text: str, path: str = "<string>") -> ExperimentConfig:
    rd = _Reader(path, text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", 1)
        raise InvalidConfigError(f"{path}:{line}: {exc.message.splitlines()[0]}") from None
    known = {"experiment"} | set(_SECTIONS)
    for sec in cp.sections():
        if sec not in known:
            rd.fail(sec, None, "unknown section")
    if "experiment" not in cp:
        raise InvalidConfigError(f"{path}:1: missing [experiment] section")
    kw = {}
    for key, raw in cp["experiment"].items():
        if key not in _EXPERIMENT_KEYS:
            rd.fail("experiment", key, "unknown key")
        kw[key] = _read(rd, "experiment", key, raw, _EXPERIMENT_KEYS[key])
    for sec, (cls, keys) in _SECTIONS.items():
        if sec not in cp:
            continue
        sub = {}
        for key, raw in cp[sec].items():
            if key not in keys:
                rd.fail(sec, key, "unknown key")
            attr, kind = keys[key]
            sub[attr] = _read(rd, sec, key, raw, kind)
        kw[sec] = cls(**sub)
    cfg = ExperimentConfig(source=path, **kw)
    _validate(cfg, rd)
    return cfg


def _validate(cfg: ExperimentConfig, rd: _Reader):
    def check(ok, section, key, msg):
        if not ok:
            rd.fail(section, key, msg)

    for s in cfg.schemes:
        check(s in SCHEMES[:3], "experiment", "schemes", f"unknown BER scheme {s!r}")
    for r in cfg.receivers:
        check(r in RECEIVERS, "experiment", "receivers", f"unknown receiver {r!r}")
    for m in cfg.modulations:
        check(m in MODULATIONS, "experiment", "modulations", f"unsupported modulation {m}")
    for v in cfg.velocities_kmh:
        check(v >= 0, "experiment", "velocities_kmh", "velocities must be >= 0")
    check(cfg.trials >= 1, "experiment", "trials", "must be >= 1")
    check(cfg.min_errors >= 0, "experiment", "min_errors", "must be >= 0")
    check(cfg.min_bits >= 0, "experiment", "min_bits", "must be >= 0")
    check(cfg.iic_iterations >= 1, "experiment", "iic_iterations", "must be >= 1")
    check(0 <= cfg.master_seed < 2**64, "experiment", "master_seed", "must be a u64")
    g = cfg.grid
    check(g.L >= 1 and g.N >= g.L, "grid", "n", "need N >= L >= 1")
    check(g.K_prime >= 2 and g.K_prime % 2 == 0, "grid", "k_prime", "must be even and >= 2")
    check(g.cp_len >= 0, "grid", "cp_len", "must be >= 0")
    check(cfg.channel.profile in PROFILES, "channel", "profile",
          f"unknown profile {cfg.channel.profile!r}")
    for s in cfg.papr.schemes + cfg.psd.schemes:
        check(s in SCHEMES, "papr", "schemes", f"unknown scheme {s!r}")
    check(cfg.papr.frames >= 1, "papr", "frames", "must be >= 1")
    check(0 < cfg.papr.ccdf_target < 1, "papr", "ccdf_target", "must lie in (0, 1)")
    check(cfg.papr.otfs_n is None or cfg.papr.otfs_n >= g.L, "papr", "otfs_n", "must be >= L")
    check(cfg.papr.otfs_cp_len is None or cfg.papr.otfs_cp_len >= 0, "papr", "otfs_cp_len",
          "must be >= 0")
    check(cfg.psd.frames >= 1, "psd", "frames", "must be >= 1")
    check(0 <= cfg.psd.overlap < 1, "psd", "overlap", "must lie in [0, 1)")


def apply_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Replace top-level fields whose override is not ``None``."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **changes) if changes else cfg


def env_overrides(environ=None) -> dict:
    """``FFTFB_SEED``, ``FFTFB_WORKERS``, ``FFTFB_OUT``, ``FFTFB_MAX_MINUTES``, ``FFTFB_TRIALS``."""
    env = os.environ if environ is None else environ
    spec = {"SEED": ("master_seed", int), "WORKERS": ("workers", int), "OUT": ("output_dir", str),
            "MAX_MINUTES": ("max_minutes", float), "TRIALS": ("trials", int),
            "CONFIG": ("config", str)}
    out = {}
    for suffix, (name, kind) in spec.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is None or raw == "":
            continue
        try:
            out[name] = kind(raw)
        except ValueError:
            raise InvalidConfigError(f"{ENV_PREFIX}{suffix}: cannot parse {raw!r}") from None
    return out
