"""Command-line entry point: ``sdsync {generate,run,report-resources,ber}``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, replace

import numpy as np

from . import formats, harness, link, resources
from .frontend import ChannelConfig, SlidingMean, apply_channel, extract_envelope, quantize_comparator
from .waveform import NumerologyConfig, build_downlink_frame

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class ConfigError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    """``"1,2.5,4"`` or ``"start:stop:step"`` (stop inclusive)."""
    try:
        if ":" in text:
            a, b, c = (float(x) for x in text.split(":"))
            if c <= 0:
                raise ConfigError("range step must be positive")
            return list(np.round(np.arange(a, b + c / 2, c), 9))
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}: {exc}") from None


def _emit(rows: list[dict], out: str | None, fmt: str, name: str) -> None:
    if out:
        os.makedirs(out, exist_ok=True)
        fh = open(os.path.join(out, f"{name}.{fmt}"), "w", newline="")
    else:
        fh = sys.stdout
    try:
        if fmt == "json":
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        else:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
    finally:
        if fh is not sys.stdout:
            fh.close()


def cmd_generate(args) -> int:
    cfg = NumerologyConfig(fft_size=args.fft_size)
    wave = build_downlink_frame(args.nid2, args.duration, cfg, args.seed)
    if args.snr is not None or args.cfo:
        chan = ChannelConfig(snr_db=np.inf if args.snr is None else args.snr, epsilon=args.cfo,
                             scs_hz=cfg.scs_hz, rng_seed=args.seed + 1)
        wave = apply_channel(wave, chan)
    os.makedirs(args.out, exist_ok=True)
    formats.write_waveform(os.path.join(args.out, "frame.pssw"), wave)
    if args.tag_rate:
        env = extract_envelope(wave, args.tag_rate, args.smooth_len)
        rho = int(round(args.tag_rate / cfg.scs_hz))
        bits = quantize_comparator(env, SlidingMean(max(1, int(round(args.comparator_window_rho * rho)))))
        if args.format == "csv":
            formats.write_csv_series(os.path.join(args.out, "envelope.csv"), env.samples)
            formats.write_csv_series(os.path.join(args.out, "bits.csv"), bits.bits)
        else:
            with open(os.path.join(args.out, "tag_signals.json"), "w") as fh:
                json.dump({"sample_rate_hz": env.sample_rate_hz, "envelope": env.samples.tolist(),
                           "bits": bits.bits.tolist(), "true_pss_centers": env.true_pss_centers.tolist()}, fh)
        formats.write_envelope(os.path.join(args.out, "envelope.pssw"), env)
        formats.write_bits(os.path.join(args.out, "bits.pssw"), bits)
    print(f"wrote {len(wave)} samples at {wave.sample_rate_hz:.0f} Hz to {args.out}")
    return EXIT_OK


def load_config(path: str) -> harness.ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    try:
        return harness.ExperimentConfig.from_dict(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, rng_seed=args.seed)
    out = args.out or cfg.output_path or "results"
    summary = harness.sweep(cfg, out, args.format, args.workers)
    for s in summary.values():
        print(f"{s['method']:>14} nid2={s['nid2']} rate={s['rate_hz'] / 1e6:g}MHz snr={s['snr_db']:g}dB "
              f"median={s.get('median_error_us', float('nan')):.3f}us success={s.get('success_rate', 0):.3f}")
    return EXIT_OK


def cmd_report_resources(args) -> int:
    rates = [r * 1e6 for r in _floats(args.rates)]
    rows = [row.as_dict() for row in resources.resource_grid(rates)]
    if args.quantized_rate:
        rho = resources.rho_for_rate(args.quantized_rate * 1e6)
        for m in resources.QUANTIZED_FF_AT_REF:
            rep = resources.quantized_resources(m, rho)
            rows.append({"method": m, "rate_hz": args.quantized_rate * 1e6, **asdict(rep),
                         "printed_multipliers": None, "printed_adders": None, "printed_d_flip_flops": None,
                         "matches_printed": None, "erratum": False})
    _emit(rows, args.out, args.format, "resources")
    return EXIT_OK


def cmd_ber(args) -> int:
    rows = []
    if args.with_sync:
        for rec in harness.with_without_sync_ber(_floats(args.snr), args.trials, args.modulations.split(",")[0],
                                                 args.seed):
            rows.append(asdict(rec))
    else:
        offsets = _floats(args.offsets)
        for mod in args.modulations.split(","):
            if mod not in link.MODULATIONS:
                raise ConfigError(f"unknown modulation {mod!r}")
            for snr in _floats(args.snr):
                rows += [asdict(r) for r in link.ber_experiment(mod, offsets, snr, args.trials, args.seed)]
    _emit(rows, args.out, args.format, "ber")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sdsync", description="Envelope-domain 5G PSS synchronisation experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default=None, seed_default=0):
        sp.add_argument("--seed", type=int, default=seed_default)
        sp.add_argument("--out", default=out_default)
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    g = sub.add_parser("generate", help="write a downlink frame (and optionally its tag-side signals)")
    g.add_argument("--nid2", type=int, default=0, choices=(0, 1, 2))
    g.add_argument("--duration", type=float, default=50e-3, help="seconds")
    g.add_argument("--fft-size", type=int, default=512)
    g.add_argument("--snr", type=float, default=None, help="dB; omit for a noiseless frame")
    g.add_argument("--cfo", type=float, default=0.0, help="CFO normalised to the subcarrier spacing")
    g.add_argument("--tag-rate", type=float, default=None, help="Hz; also write envelope and bits")
    g.add_argument("--smooth-len", type=float, default=3.0)
    g.add_argument("--comparator-window-rho", type=float, default=3.0)
    common(g, "frame")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run a sweep from a JSON config")
    r.add_argument("--config", required=True)
    r.add_argument("--workers", type=int, default=1)
    common(r, seed_default=None)
    r.set_defaults(func=cmd_run)

    rr = sub.add_parser("report-resources", help="resource grid with a comparison to the printed table")
    rr.add_argument("--rates", default="1.92,3.84,7.68", help="MHz")
    rr.add_argument("--quantized-rate", type=float, default=None, help="MHz; add one-bit datapaths")
    common(rr)
    rr.set_defaults(func=cmd_report_resources)

    b = sub.add_parser("ber", help="BER vs timing offset, or with vs without SD sync")
    b.add_argument("--modulations", default="BPSK,QPSK,16PSK")
    b.add_argument("--offsets", default="0:30:3", help="microseconds")
    b.add_argument("--snr", default="15")
    b.add_argument("--trials", type=int, default=1000)
    b.add_argument("--with-sync", action="store_true")
    common(b)
    b.set_defaults(func=cmd_ber)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"invalid argument: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
