"""``fftfb`` command line: run, papr, psd, validate, complexity."""

from __future__ import annotations

import argparse
import sys
import time

from ..errors import FftfbError
from ..metrics import Receiver, Scheme, complexity_estimate
from . import runner
from .config import ENV_PREFIX, apply_overrides, env_overrides, load_config

COMMANDS = ("run", "papr", "psd", "validate", "complexity")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config_pos", nargs="?", metavar="config", help="experiment config (.cfg)")
    common.add_argument("--config", help="experiment config; alternative to the positional form")
    common.add_argument("--seed", type=int, help="master seed (u64)")
    common.add_argument("--workers", type=int, help="worker processes for independent combinations")
    common.add_argument("--out", help="output directory")
    common.add_argument("--max-minutes", type=float,
                        help="wall-clock cap; a capped run is marked truncated and is not reproducible")
    common.add_argument("--trials", type=int, help="override the per-combination trial cap")
    p = argparse.ArgumentParser(
        prog="fftfb",
        description="2D-FFT filter-bank vs OTFS link simulator.",
        epilog=f"Environment variables {ENV_PREFIX}CONFIG, {ENV_PREFIX}SEED, {ENV_PREFIX}WORKERS, "
               f"{ENV_PREFIX}OUT, {ENV_PREFIX}MAX_MINUTES and {ENV_PREFIX}TRIALS supply defaults "
               "for the matching flags.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="Monte-Carlo BER experiment")
    sub.add_parser("papr", parents=[common], help="PAPR CCDF per scheme")
    sub.add_parser("psd", parents=[common], help="Welch PSD and OOB levels per scheme")
    sub.add_parser("validate", parents=[common], help="construct everything and self-test")
    sub.add_parser("complexity", parents=[common], help="transmitter/receiver multiplication counts")
    return p


def _load(args):
    env = env_overrides()
    path = args.config or args.config_pos or env.pop("config", None)
    env.pop("config", None)
    if path is None:
        raise FftfbError("no config given (positional, --config or FFTFB_CONFIG)")
    cfg = load_config(path)
    cfg = apply_overrides(cfg, **env)
    return apply_overrides(cfg, master_seed=args.seed, workers=args.workers, output_dir=args.out,
                           max_minutes=args.max_minutes, trials=args.trials)


def _cmd_run(cfg) -> int:
    t0 = time.monotonic()

    def progress(combo, part):
        recs, trunc, err = part
        msg = f"error: {err}" if err else f"{len(recs)} records"
        print(f"  {combo[0]} {combo[1]}-QAM {combo[2]:g} km/h: {msg}", file=sys.stderr)

    result = runner.run_experiment(cfg, progress=progress)
    out = runner.write_outputs(result, cfg, cfg.output_dir)
    for c in result.curves:
        pts = " ".join(f"{p['snr_db']:g}:{p['ber']:.2e}" if p["ber"] is not None else f"{p['snr_db']:g}:-"
                       for p in c["points"])
        print(f"{c['scheme']:9s} {c['receiver']:9s} {c['modulation']:2d}-QAM "
              f"{c['velocity_kmh']:5g} km/h  {pts}")
    note = " (truncated by --max-minutes)" if result.truncated else ""
    print(f"wrote {out}/records.csv and curves.json in {time.monotonic() - t0:.1f} s{note}")
    return 1 if result.errors else 0


def _cmd_papr(cfg) -> int:
    data = runner.run_papr(cfg)
    path = runner.write_json(data, cfg, cfg.output_dir, "papr.json")
    for scheme, d in data.items():
        print(f"{scheme:9s} PAPR at CCDF {cfg.papr.ccdf_target:g}: {d['papr_at_target_db']:.2f} dB "
              f"({d['frames']} frames)")
    print(f"wrote {path}")
    return 0


def _cmd_psd(cfg) -> int:
    data = runner.run_psd(cfg)
    path = runner.write_json(data, cfg, cfg.output_dir, "psd.json")
    for scheme, d in data.items():
        print(f"{scheme:9s} OOB at {cfg.psd.oob_offset_subcarriers:g} subcarriers: {d['oob_db']:.1f} dB")
    print(f"wrote {path}")
    return 0


def _cmd_validate(cfg) -> int:
    checks = runner.validate(cfg)
    for name, ok, detail in checks:
        print(f"{'ok  ' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in checks) else 1


def _cmd_complexity(cfg) -> int:
    g = cfg.grid
    print(f"L={g.L} N={g.N} K'={g.K_prime} K={g.K_prime // 2} O={g.overlap:g}")
    print(f"{'scheme':16s} {'receiver':10s} {'transmitter':>12s} {'receiver':>14s}")
    for s in Scheme:
        for r in Receiver:
            tx, rx = complexity_estimate(s, r, L=g.L, N=g.N, K_prime=g.K_prime, overlap=g.overlap)
            print(f"{s.value:16s} {r.value:10s} {tx:>12} {rx:>14}")
    return 0


def main(argv=None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        return {"run": _cmd_run, "papr": _cmd_papr, "psd": _cmd_psd, "validate": _cmd_validate,
                "complexity": _cmd_complexity}[args.command](cfg)
    except FftfbError as exc:
        print(f"fftfb: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fftfb: error: {exc}", file=sys.stderr)
        return 2
