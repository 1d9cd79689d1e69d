"""Monte-Carlo BER runs plus the PAPR and PSD experiments.

Seeding: trial ``t`` draws everything from
``SeedSequence(master_seed, spawn_key=(0, m, v, t))`` where ``m`` and ``v``
index the modulation and velocity lists: bits first, then the channel,
then one unit-variance noise vector.  The scheme is left out of the key, so
schemes carrying the same number of bits see the same fading process.  Every receiver and SNR point
of that trial reuses those draws; the noise is scaled per SNR.  A point
stops accumulating once it holds ``min_errors`` errors and ``min_bits``
bits, a rule that only looks at earlier trials, so runs are reproducible.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .. import equalizers as eq
from ..channel import (ChannelProfile, apply_channel, complex_noise, generate_channel, vehicular_a)
from ..errors import InvalidConfigError
from ..link import Link, make_link
from ..metrics import ber_interval, ccdf_from_papr, papr_at, papr_db, psd_welch
from ..numerics import constellation, qam_demap, qam_map
from ..precoder import orthogonality_residual
from .config import ExperimentConfig

RECORD_HEADER = ("scheme", "receiver", "modulation", "snr_db", "velocity_kmh", "seed",
                 "bit_errors", "bit_total", "elapsed_s")
CONVERGED_ERRORS = 100
SNR_DEFINITION = "mean transmitted power per sample over noise variance per received sample"

_BER, _PAPR, _PSD = 0, 1, 2


@dataclass
class TrialRecord:
    scheme: str
    receiver: str
    modulation: int
    snr_db: float
    velocity_kmh: float
    seed: int
    bit_errors: int
    bit_total: int
    elapsed_s: float = 0.0

    def row(self) -> list:
        return [self.scheme, self.receiver, self.modulation, _fmt(self.snr_db),
                _fmt(self.velocity_kmh), self.seed, self.bit_errors, self.bit_total,
                f"{self.elapsed_s:.6f}"]


@dataclass
class ResultSet:
    records: list[TrialRecord] = field(default_factory=list)
    curves: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)
    truncated: bool = False

    def curve(self, scheme, receiver, modulation, velocity_kmh) -> dict:
        for c in self.curves:
            if (c["scheme"], c["receiver"], c["modulation"], c["velocity_kmh"]) == \
                    (scheme, receiver, modulation, float(velocity_kmh)):
                return c
        raise KeyError((scheme, receiver, modulation, velocity_kmh))


def _fmt(x: float) -> str:
    return f"{x:g}"


def trial_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=tuple(key))


def channel_profile(cfg: ExperimentConfig, velocity_kmh: float) -> ChannelProfile:
    ch = cfg.channel
    if ch.profile == "flat":
        return ChannelProfile(tap_delays=(0.0,), tap_powers=(0.0,), velocity=velocity_kmh / 3.6,
                              carrier_freq=ch.carrier_hz, sample_rate=cfg.sample_rate)
    return vehicular_a(velocity_kmh, ch.carrier_hz, cfg.sample_rate)


def build_link(cfg: ExperimentConfig, scheme: str) -> Link:
    g = cfg.grid
    if scheme == "FFT2D_FB" and g.overlap != 1.5:
        raise InvalidConfigError("the compensated filter bank is built with overlap 1.5")
    cp = g.cp_len if scheme in ("OTFS", "OFDM") else 0
    return make_link(scheme, g.L, g.K_prime, g.N, cp)


def nominal_power(link: Link, waveforms: np.ndarray | None = None) -> float:
    """Expected transmit power per sample for unit-energy symbols."""
    t = link.tx_waveforms() if waveforms is None else waveforms
    return float(np.sum(np.abs(t) ** 2) / link.M)


@dataclass
class _Point:
    errors: int = 0
    bits: int = 0


def _run_combo(cfg: ExperimentConfig, scheme: str, modulation: int, velocity: float,
               deadline: float | None) -> tuple[list[TrialRecord], bool]:
    link = build_link(cfg, scheme)
    const = constellation(modulation)
    bps = const.bits_per_symbol
    profile = channel_profile(cfg, velocity)
    receivers = cfg.receivers
    dense = any(r in ("MMSE_DD", "HYBRID") for r in receivers)
    waveforms = link.tx_waveforms()
    p_s = nominal_power(link, waveforms)
    if not dense:
        waveforms = None
    snrs = cfg.snr_db
    points = {(r, i): _Point() for r in receivers for i in range(len(snrs))}

    def done(p: _Point) -> bool:
        return p.errors >= cfg.min_errors and p.bits >= cfg.min_bits

    records: list[TrialRecord] = []
    truncated = False
    for t in range(cfg.trials):
        open_pts = [k for k, p in points.items() if not done(p)]
        if not open_pts:
            break
        if deadline is not None and time.monotonic() > deadline:
            truncated = True
            break
        start = time.perf_counter()
        ss = trial_seed(cfg.master_seed, _BER, cfg.modulations.index(modulation),
                        cfg.velocities_kmh.index(velocity), t)
        seed = int(ss.generate_state(1, np.uint64)[0])
        rng = np.random.default_rng(ss)
        bits = rng.integers(0, 2, link.n_data * bps, dtype=np.uint8)
        s = link.modulate(qam_map(bits, const))
        ch = generate_channel(profile, link.M, rng)
        w = complex_noise(link.M, rng)
        y0 = link.front_end(apply_channel(s, ch))
        yw = link.front_end(w)
        h = link.one_tap(ch) if {"MMSE_FREQ", "HYBRID"} & set(receivers) else None

        need = {r for r, _ in open_pts}
        resp = solver = None
        if need & {"MMSE_DD", "HYBRID"}:
            resp = link.channel_responses(ch, waveforms)
        if "MMSE_DD" in need:
            solver = eq.MmseDdSolver(link.decode_columns(resp))
            dd0, ddw = link.decode(y0), link.decode(yw)

        results = []
        for key in sorted(open_pts, key=lambda k: (receivers.index(k[0]), k[1])):
            rx, i = key
            var = p_s / 10 ** (snrs[i] / 10)
            sigma = math.sqrt(var)
            if rx == "MMSE_FREQ":
                e = link.one_tap_equalizer(h, var)
                est = link.decode(e * (y0 + sigma * yw))
            elif rx == "MMSE_DD":
                est = solver.solve(dd0 + sigma * ddw, var)
            else:
                e = link.one_tap_equalizer(h, var)
                r_mat = link.decode_columns(e * resp)
                a_t = link.decode(e * (y0 + sigma * yw))
                est = eq.iic_equalize(a_t, r_mat, const, cfg.iic_iterations) / np.diag(r_mat)
            n_err = int(np.count_nonzero(qam_demap(est, const) != bits))
            results.append((key, n_err))
        elapsed = time.perf_counter() - start if cfg.timing else 0.0
        for (rx, i), n_err in results:
            p = points[(rx, i)]
            p.errors += n_err
            p.bits += bits.size
            records.append(TrialRecord(scheme, rx, modulation, float(snrs[i]), float(velocity),
                                       seed, n_err, bits.size, elapsed))
    return records, truncated


def _combos(cfg: ExperimentConfig):
    return list(product(cfg.schemes, cfg.modulations, cfg.velocities_kmh))


def aggregate(records: list[TrialRecord], cfg: ExperimentConfig) -> list[dict]:
    acc: dict[tuple, list[int]] = {}
    for r in records:
        k = (r.scheme, r.receiver, r.modulation, r.velocity_kmh, r.snr_db)
        a = acc.setdefault(k, [0, 0, 0])
        a[0] += r.bit_errors
        a[1] += r.bit_total
        a[2] += 1
    curves = []
    for scheme, mod, vel in _combos(cfg):
        for rx in cfg.receivers:
            pts = []
            for snr in cfg.snr_db:
                e, n, trials = acc.get((scheme, rx, mod, float(vel), float(snr)), (0, 0, 0))
                lo, hi = ber_interval(e, n)
                pts.append({"snr_db": float(snr), "bit_errors": e, "bit_total": n, "trials": trials,
                            "ber": e / n if n else None, "ci95": [lo, hi],
                            "converged": e >= CONVERGED_ERRORS})
            curves.append({"scheme": scheme, "receiver": rx, "modulation": mod,
                           "velocity_kmh": float(vel), "points": pts})
    return curves


def run_experiment(cfg: ExperimentConfig, progress=None) -> ResultSet:
    """Run every (scheme, modulation, velocity) combination; merge in config order."""
    deadline = None if cfg.max_minutes is None else time.monotonic() + 60 * cfg.max_minutes
    combos = _combos(cfg)
    out = ResultSet()
    parts: list = [None] * len(combos)
    if cfg.workers > 1 and len(combos) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futs = [pool.submit(_run_combo_safe, cfg, *c, deadline) for c in combos]
            for i, f in enumerate(futs):
                parts[i] = f.result()
                if progress:
                    progress(combos[i], parts[i])
    else:
        for i, c in enumerate(combos):
            parts[i] = _run_combo_safe(cfg, *c, deadline)
            if progress:
                progress(c, parts[i])
    for (scheme, mod, vel), (recs, trunc, err) in zip(combos, parts):
        if err is not None:
            out.errors.append({"scheme": scheme, "modulation": mod, "velocity_kmh": float(vel),
                               "error": err})
        out.records.extend(recs)
        out.truncated |= trunc
    out.curves = aggregate(out.records, cfg)
    return out


def _run_combo_safe(cfg, scheme, mod, vel, deadline):
    try:
        recs, trunc = _run_combo(cfg, scheme, mod, vel, deadline)
        return recs, trunc, None
    except InvalidConfigError as exc:
        return [], False, str(exc)


def _meta(cfg: ExperimentConfig, **extra) -> dict:
    meta = {"name": cfg.name, "master_seed": cfg.master_seed, "snr_definition": SNR_DEFINITION,
            "grid": {"L": cfg.grid.L, "K_prime": cfg.grid.K_prime, "N": cfg.grid.N,
                     "overlap": cfg.grid.overlap, "cp_len": cfg.grid.cp_len},
            "channel": {"profile": cfg.channel.profile, "carrier_hz": cfg.channel.carrier_hz,
                        "subcarrier_spacing_hz": cfg.channel.subcarrier_spacing_hz,
                        "sample_rate_hz": cfg.sample_rate}}
    meta.update(extra)
    return meta


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_outputs(result: ResultSet, cfg: ExperimentConfig, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(RECORD_HEADER)
    for r in result.records:
        wr.writerow(r.row())
    (out / "records.csv").write_text(buf.getvalue())
    _dump(out / "curves.json", {"meta": _meta(cfg, truncated=result.truncated,
                                              converged_min_errors=CONVERGED_ERRORS),
                                "ber": result.curves, "errors": result.errors})
    return out


def run_papr(cfg: ExperimentConfig, batch: int = 1000) -> dict:
    """Per-frame PAPR for each scheme, its CCDF, and the level at the target CCDF."""
    p = cfg.papr
    const = constellation(p.modulation)
    out = {}
    g = cfg.grid
    for si, scheme in enumerate(p.schemes):
        if scheme in ("OTFS", "OFDM"):
            n_fft = g.N if p.otfs_n is None else p.otfs_n
            cp = g.cp_len if p.otfs_cp_len is None else p.otfs_cp_len
            link = make_link(scheme, g.L, g.K_prime, n_fft, cp)
        else:
            link = build_link(cfg, scheme)
        vals = []
        for bi, start in enumerate(range(0, p.frames, batch)):
            n = min(batch, p.frames - start)
            rng = np.random.default_rng(trial_seed(cfg.master_seed, _PAPR, si, bi))
            bits = rng.integers(0, 2, n * link.n_data * const.bits_per_symbol, dtype=np.uint8)
            sym = qam_map(bits, const).reshape(n, link.n_data)
            vals.append(papr_db(link.modulate(sym)))
        paprs = np.concatenate(vals)
        curve = ccdf_from_papr(paprs, p.thresholds_db)
        out[scheme] = {"frames": curve.sample_count, "thresholds_db": curve.thresholds.tolist(),
                       "ccdf": curve.probabilities.tolist(),
                       "papr_at_target_db": papr_at(paprs, p.ccdf_target)}
    return out


def psd_signal(cfg: ExperimentConfig, scheme: str, scheme_idx: int) -> np.ndarray:
    """Back-to-back frames of one scheme, concatenated into a single burst."""
    p = cfg.psd
    link = build_link(cfg, scheme)
    const = constellation(p.modulation)
    rng = np.random.default_rng(trial_seed(cfg.master_seed, _PSD, scheme_idx))
    bits = rng.integers(0, 2, p.frames * link.n_data * const.bits_per_symbol, dtype=np.uint8)
    sym = qam_map(bits, const).reshape(p.frames, link.n_data)
    return link.modulate(sym).ravel()


def _wrap_bin(b: float, n: int) -> float:
    """Subcarrier index mapped onto the centered two-sided frequency axis."""
    return (b + n / 2) % n - n / 2


def run_psd(cfg: ExperimentConfig) -> dict:
    """Normalized PSD per scheme and the OOB level a fixed offset beyond each band edge."""
    p = cfg.psd
    spacing = cfg.channel.subcarrier_spacing_hz
    upper = _wrap_bin(cfg.grid.L - 1 + p.oob_offset_subcarriers, cfg.grid.N) * spacing
    lower = _wrap_bin(-p.oob_offset_subcarriers, cfg.grid.N) * spacing
    out = {}
    for si, scheme in enumerate(p.schemes):
        s = psd_signal(cfg, scheme, si)
        curve = psd_welch(s, p.segment_factor * cfg.grid.N, p.overlap, cfg.sample_rate)
        out[scheme] = {"freqs_hz": curve.freqs.tolist(), "power_db": curve.power_db.tolist(),
                       "oob_upper_db": curve.level_at(upper), "oob_lower_db": curve.level_at(lower),
                       "oob_db": max(curve.level_at(upper), curve.level_at(lower))}
    return out


def write_json(obj: dict, cfg: ExperimentConfig, out_dir: str | Path, name: str) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    _dump(path, {"meta": _meta(cfg), "data": obj})
    return path


def validate(cfg: ExperimentConfig) -> list[tuple[str, bool, str]]:
    """Construct every referenced object and run cheap invariant checks."""
    checks = []
    schemes = dict.fromkeys(cfg.schemes + cfg.papr.schemes + cfg.psd.schemes)
    const = constellation(4)
    rng = np.random.default_rng(trial_seed(cfg.master_seed, 99))
    for scheme in schemes:
        try:
            link = build_link(cfg, scheme)
        except InvalidConfigError as exc:
            checks.append((f"build {scheme}", False, str(exc)))
            continue
        checks.append((f"build {scheme}", True, f"{link.n_data} symbols, {link.M} samples"))
        if scheme == "FBMC":
            continue
        bits = rng.integers(0, 2, link.n_data * 2, dtype=np.uint8)
        y = link.front_end(link.modulate(qam_map(bits, const)))
        est = link.decode(link.one_tap_equalizer(np.full(y.shape, link.ref_gain), 0.0) * y)
        n_err = int(np.count_nonzero(qam_demap(est, const) != bits))
        checks.append((f"loopback {scheme}", n_err == 0, f"{n_err} bit errors"))
        if scheme == "FFT2D_FB":
            diag_dev, off_db = orthogonality_residual(link.filter, link.cfg)
            ok = diag_dev <= 1e-10 and off_db <= -30
            checks.append(("orthogonality", ok, f"diag dev {diag_dev:.1e}, off-diagonal {off_db:.1f} dB"))
    for v in cfg.velocities_kmh:
        try:
            prof = channel_profile(cfg, v)
            generate_channel(prof, 16, 0)
            checks.append((f"channel {v:g} km/h", True, f"f_d = {prof.doppler:.1f} Hz"))
        except InvalidConfigError as exc:
            checks.append((f"channel {v:g} km/h", False, str(exc)))
    return checks
