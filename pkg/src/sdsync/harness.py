"""Seeded Monte-Carlo experiments over detectors, rates, SNRs and CFOs.

A *scenario* fixes (nid2, SNR, CFO, trial); its noisy frame is shared by
every rate and method so comparisons are paired. A *point* adds the rate
and method; each true PSS in a trial's frame is one sync attempt.
"""

from __future__ import annotations

import csv
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache

import numpy as np

from . import active, detectors as det, resources
from .frontend import ChannelConfig, SlidingMean, apply_channel, extract_envelope, quantize_adc, quantize_comparator
from .link import LinkConfig, offset_ber
from .waveform import NumerologyConfig, build_downlink_frame

SUCCESS_US = 8.0
_MISS = 1e15
ALL_METHODS = det.REAL_METHODS + det.QUANTIZED_METHODS + det.BASELINES + active.ACTIVE_METHODS
RECORD_COLUMNS = ("point", "method", "nid2", "rate_hz", "snr_db", "cfo", "trial",
                  "error_us", "delay_us", "success", "ops")


@dataclass(frozen=True)
class Thresholds:
    r_threshold: float = 0.8
    sym_threshold: float = 0.7
    sd_gamma: float = 0.3
    edge_threshold: float = 0.5
    template_threshold: float = 0.55  # one-template baseline gate


@dataclass(frozen=True)
class ExperimentConfig:
    """A Cartesian grid of experiment points.

    ``comparator_window_rho`` sets the comparator's sliding-mean window in
    units of rho. ``smooth_len`` is the detector's averaging span in tag
    samples.
    """

    methods: tuple[str, ...] = ("SD_Q",)
    nid2_values: tuple[int, ...] = (0, 1, 2)
    tag_rates_hz: tuple[float, ...] = (5e6,)
    snr_db_values: tuple[float, ...] = (15.0,)
    cfo_values: tuple[float, ...] = (0.0,)
    trials_per_point: int = 10
    frame_duration_s: float = 10e-3
    rng_seed: int = 0
    numerology: NumerologyConfig = field(default_factory=NumerologyConfig)
    thresholds: Thresholds = field(default_factory=Thresholds)
    smooth_len: float = 3.0
    comparator_window_rho: float = 3.0
    adc_bits: int = 12
    output_path: str | None = None

    def __post_init__(self):
        for name in ("methods", "nid2_values", "tag_rates_hz", "snr_db_values", "cfo_values"):
            value = tuple(getattr(self, name))
            if not value:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, value)
        unknown = set(self.methods) - set(ALL_METHODS)
        if unknown:
            raise ValueError(f"unknown methods: {sorted(unknown)}")
        if any(n not in (0, 1, 2) for n in self.nid2_values):
            raise ValueError("nid2 values must be 0, 1 or 2")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.frame_duration_s < self.numerology.ssb_period_s:
            raise ValueError("frame shorter than one SSB period")
        if self.comparator_window_rho <= 0:
            raise ValueError("comparator_window_rho must be positive")

    def scenarios(self):
        return list(itertools.product(self.nid2_values, self.snr_db_values, self.cfo_values))

    def points(self):
        """(method, nid2, rate, snr, cfo) in output order."""
        return [
            (m, n, r, s, c)
            for n, s, c in self.scenarios()
            for r in self.tag_rates_hz
            for m in self.methods
        ]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["numerology"] = asdict(self.numerology)
        d["thresholds"] = asdict(self.thresholds)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        if "numerology" in d:
            d["numerology"] = NumerologyConfig(**d["numerology"])
        if "thresholds" in d:
            d["thresholds"] = Thresholds(**d["thresholds"])
        for k in ("methods", "nid2_values", "tag_rates_hz", "snr_db_values", "cfo_values"):
            if k in d:
                d[k] = tuple(d[k])
        return cls(**d)


@dataclass(frozen=True)
class TrialRecord:
    method: str
    nid2: int
    rate_hz: float
    snr_db: float
    cfo: float
    trial: int
    errors_us: tuple[float, ...]
    delays_us: tuple[float, ...]
    ops_executed: int
    failed: str | None = None

    @property
    def successes(self) -> tuple[bool, ...]:
        return tuple(e < SUCCESS_US for e in self.errors_us)

    @property
    def success(self) -> bool:
        """The trial's median attempt error is below the bound."""
        return bool(self.errors_us) and float(np.median(self.errors_us)) < SUCCESS_US


def trial_seed(cfg: ExperimentConfig, nid2: int, snr_db: float, cfo: float, trial: int) -> int:
    key = [cfg.rng_seed, nid2, cfg.snr_db_values.index(snr_db), cfg.cfo_values.index(cfo), trial]
    return int(np.random.SeedSequence(key).generate_state(1, np.uint64)[0] >> np.uint64(1))


@lru_cache(maxsize=64)
def _templates(rate: float, rho: int, numerology: NumerologyConfig, smooth_len: float, window: int):
    pol = SlidingMean(window)
    return (
        det.make_templates(rate, rho, numerology, smooth_len),
        det.make_templates(rate, rho, numerology, smooth_len, half=True),
        det.make_bit_templates(rate, rho, pol, numerology, smooth_len),
        det.make_bit_templates(rate, rho, pol, numerology, smooth_len, half=True),
    )


def sync_params(cfg: ExperimentConfig, rate: float) -> det.SyncParams:
    t = cfg.thresholds
    return det.SyncParams.for_rate(
        rate, cfg.numerology.scs_hz, cfg.numerology.ssb_period_s,
        r_threshold=t.r_threshold, sym_threshold=t.sym_threshold,
        sd_gamma=t.sd_gamma, edge_threshold=t.edge_threshold,
    )


def _attempts(res: det.SyncResult, truth: np.ndarray, rate: float):
    """Per true PSS: error and delay of the nearest detection (inf if none)."""
    if len(res.detections) == 0:
        n = len(truth)
        return (float("inf"),) * n, (float("inf"),) * n
    c = res.centers
    commits = np.array([d.commit_index for d in res.detections], dtype=float)
    j = np.argmin(np.abs(c[None, :] - truth[:, None]), axis=1)
    err = np.abs(c[j] - truth) / rate * 1e6
    delay = (commits[j] - truth) / rate * 1e6
    return tuple(map(float, err)), tuple(map(float, delay))


def _run_method(method, cfg, rate, env, wave, frontend):
    p = sync_params(cfg, rate)
    if method in active.ACTIVE_METHODS:
        res = active.iq_fine_timing(wave, cfg=cfg.numerology, method=method)
        return res, res.true_centers, wave.sample_rate_hz
    full, half, bfull, bhalf = _templates(rate, p.rho, cfg.numerology, cfg.smooth_len,
                                          max(1, int(round(cfg.comparator_window_rho * p.rho))))
    adc, bits = frontend()
    if method == "NFT":
        res = det.nft_detect(adc, full, p)
    elif method == "SST":
        res = det.sst_detect(adc, half, p)
    elif method == "SA":
        res = det.sa_detect(adc, p)
    elif method == "SD":
        res = det.sd_detect(adc, p)
    elif method == "SD+":
        res = det.sd_plus_detect(adc, p)
    elif method in ("SD_Q", "SA_Q"):
        res = det.quantized_detect(bits, method, p)
    elif method == "NFT_Q":
        res = det.quantized_detect(bits, method, p, bfull)
    elif method == "SST_Q":
        res = det.quantized_detect(bits, method, p, bhalf)
    elif method == "one-template":
        res = det.baseline_one_template(env, full[0], p, cfg.thresholds.template_threshold)
    else:
        res = det.baseline_rising_edge(env, p)
    return res, env.true_pss_centers, rate


def _ops(method: str, res: det.SyncResult, n_samples: int, rho: int) -> int:
    if method in active.ACTIVE_METHODS or method in det.BASELINES:
        return 0
    first = res.metadata.get("windows_executed") if method == "SD+" else None
    return resources.computational_load(method, n_samples, rho, first).total_ops


def run_scenario(cfg: ExperimentConfig, nid2: int, snr_db: float, cfo: float, trial: int) -> list[TrialRecord]:
    """One noisy frame, every rate and method of the config."""
    seed = trial_seed(cfg, nid2, snr_db, cfo, trial)
    wave = build_downlink_frame(nid2, cfg.frame_duration_s, cfg.numerology, seed)
    wave = apply_channel(wave, ChannelConfig(snr_db=snr_db, epsilon=cfo, scs_hz=cfg.numerology.scs_hz,
                                             rng_seed=seed + 1))
    out = []
    for rate in cfg.tag_rates_hz:
        env = extract_envelope(wave, rate, cfg.smooth_len)
        rho = sync_params(cfg, rate).rho
        cache = {}

        def frontend():
            if not cache:
                window = max(1, int(round(cfg.comparator_window_rho * rho)))
                cache["v"] = (quantize_adc(env, cfg.adc_bits), quantize_comparator(env, SlidingMean(window)))
            return cache["v"]

        for method in cfg.methods:
            try:
                res, truth, r = _run_method(method, cfg, rate, env, wave, frontend)
                err, delay = _attempts(res, np.asarray(truth, float), r)
                ops = _ops(method, res, len(env), rho)
                out.append(TrialRecord(method, nid2, rate, snr_db, cfo, trial, err, delay, ops))
            except (ValueError, IndexError) as exc:
                n = len(env.true_pss_centers)
                out.append(TrialRecord(method, nid2, rate, snr_db, cfo, trial, (float("inf"),) * n,
                                       (float("inf"),) * n, 0, failed=str(exc)))
    return out


def run_trial(cfg: ExperimentConfig, point: tuple, trial: int) -> TrialRecord:
    """A single (method, nid2, rate, snr, cfo) point for one trial."""
    method, nid2, rate, snr, cfo = point
    sub = replace(cfg, methods=(method,), tag_rates_hz=(rate,))
    return run_scenario(sub, nid2, snr, cfo, trial)[0]


def summarize(records: list[TrialRecord]) -> dict:
    errs = np.array([e for r in records for e in r.errors_us], dtype=float)
    delays = np.array([d for r in records for d in r.delays_us], dtype=float)
    finite = delays[np.isfinite(delays)]
    if errs.size == 0:
        return {"attempts": 0}
    # missed attempts are inf; a finite stand-in keeps interpolation defined
    q = np.percentile(np.where(np.isfinite(errs), errs, _MISS), [25, 50, 75])
    q1, med, q3 = np.where(q >= _MISS, np.inf, q)
    return {
        "attempts": int(errs.size),
        "median_error_us": float(med),
        "q1_error_us": float(q1),
        "q3_error_us": float(q3),
        "mean_delay_us": float(finite.mean()) if finite.size else float("inf"),
        "success_rate": float(np.mean(errs < SUCCESS_US)),
        "total_ops": int(sum(r.ops_executed for r in records)),
        "failed_trials": int(sum(r.failed is not None for r in records)),
    }


def _record_rows(point_index: int, rec: TrialRecord):
    for e, d, ok in zip(rec.errors_us, rec.delays_us, rec.successes):
        yield {
            "point": point_index, "method": rec.method, "nid2": rec.nid2, "rate_hz": repr(rec.rate_hz),
            "snr_db": repr(rec.snr_db), "cfo": repr(rec.cfo), "trial": rec.trial,
            "error_us": repr(e), "delay_us": repr(d), "success": int(ok), "ops": rec.ops_executed,
        }


def _read_rows(path: str, fmt: str) -> list[dict]:
    if not os.path.exists(path):
        return []
    with open(path, newline="") as fh:
        if fmt == "csv":
            return list(csv.DictReader(fh))
        return [json.loads(line) for line in fh if line.strip()]


def _write_rows(fh, fmt: str, rows, header: bool):
    if fmt == "csv":
        w = csv.DictWriter(fh, fieldnames=RECORD_COLUMNS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerows(rows)
    else:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def _records_from_rows(rows: list[dict], points) -> dict[int, list[TrialRecord]]:
    grouped: dict[tuple[int, int], list[dict]] = {}
    for row in rows:
        grouped.setdefault((int(row["point"]), int(row["trial"])), []).append(row)
    out: dict[int, list[TrialRecord]] = {}
    for (i, t), rs in sorted(grouped.items()):
        method, nid2, rate, snr, cfo = points[i]
        out.setdefault(i, []).append(TrialRecord(
            method, nid2, rate, snr, cfo, t,
            tuple(float(r["error_us"]) for r in rs), tuple(float(r["delay_us"]) for r in rs),
            int(rs[0]["ops"])))
    return out


def _scenario_job(args):
    cfg, scen, trial = args
    return run_scenario(cfg, *scen, trial)


def sweep(cfg: ExperimentConfig, out_dir: str | None = None, fmt: str = "csv", workers: int = 1) -> dict:
    """Run every point; stream raw records and write a per-point summary.

    With ``out_dir`` the raw records go to ``records.csv`` (or
    ``records.jsonl``) one scenario at a time, in point order. A rerun
    keeps the points that already have every trial and recomputes the
    rest. Returns ``{point_index: summary}``.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    out_dir = out_dir or cfg.output_path
    points = cfg.points()
    index = {p: i for i, p in enumerate(points)}
    by_point: dict[int, list[TrialRecord]] = {i: [] for i in range(len(points))}

    rec_path = None
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        rec_path = os.path.join(out_dir, "records.csv" if fmt == "csv" else "records.jsonl")
        kept = {i: recs for i, recs in _records_from_rows(_read_rows(rec_path, fmt), points).items()
                if len(recs) == cfg.trials_per_point}
        by_point.update(kept)
        # rewrite so an interrupted point leaves no partial rows behind
        with open(rec_path, "w", newline="") as fh:
            _write_rows(fh, fmt, [row for i in sorted(kept) for rec in kept[i] for row in _record_rows(i, rec)],
                        header=True)

    def scenario_points(scen):
        return [index[(m, scen[0], r, scen[1], scen[2])] for r in cfg.tag_rates_hz for m in cfg.methods]

    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for scen in cfg.scenarios():
            todo = [i for i in scenario_points(scen) if not by_point[i]]
            if not todo:
                continue
            sub = replace(cfg, methods=tuple(dict.fromkeys(points[i][0] for i in todo)),
                          tag_rates_hz=tuple(dict.fromkeys(points[i][2] for i in todo)))
            jobs = [(sub, scen, t) for t in range(cfg.trials_per_point)]
            results = pool.map(_scenario_job, jobs) if pool else map(_scenario_job, jobs)
            for recs in results:
                for rec in recs:
                    i = index[(rec.method, rec.nid2, rec.rate_hz, rec.snr_db, rec.cfo)]
                    if i in todo:
                        by_point[i].append(rec)
            if rec_path:
                with open(rec_path, "a", newline="") as fh:
                    _write_rows(fh, fmt, [row for i in sorted(todo) for rec in by_point[i]
                                          for row in _record_rows(i, rec)], header=False)
    finally:
        if pool:
            pool.shutdown()

    summary = {}
    for i, p in enumerate(points):
        method, nid2, rate, snr, cfo = p
        params = sync_params(cfg, rate)
        summary[i] = {"point": i, "method": method, "nid2": nid2, "rate_hz": rate, "snr_db": snr, "cfo": cfo,
                      "rho": params.rho, **params.thresholds(),
                      "template_threshold": cfg.thresholds.template_threshold,
                      **summarize(by_point[i])}
    if out_dir:
        _write_summary(out_dir, fmt, summary, cfg)
    return summary


def _write_summary(out_dir, fmt, summary, cfg):
    rows = [summary[i] for i in sorted(summary)]
    if fmt == "json":
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump({"config": cfg.to_dict(), "points": rows}, fh, indent=2, sort_keys=True)
        return
    cols = sorted({k for r in rows for k in r}, key=lambda k: (k not in ("point", "method"), k))
    with open(os.path.join(out_dir, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})


# ---------------------------------------------------------------------------
# link-level experiments

def sd_sync_errors(snr_db: float, trials: int, seed: int = 0, rate: float = 5e6,
                   numerology: NumerologyConfig | None = None) -> np.ndarray:
    """Per-attempt SD (12-bit ADC) sync errors in microseconds."""
    cfg = ExperimentConfig(methods=("SD",), nid2_values=(0, 1, 2), tag_rates_hz=(rate,),
                           snr_db_values=(snr_db,), trials_per_point=trials, frame_duration_s=5e-3,
                           rng_seed=seed, numerology=numerology or NumerologyConfig())
    errs = []
    for t in range(trials):
        rec = run_scenario(cfg, t % 3, snr_db, 0.0, t)[0]
        errs.extend(rec.errors_us)
    return np.array(errs)


def with_without_sync_ber(snr_db_values, trials: int = 200, modulation: str = "16PSK", seed: int = 0,
                          link: LinkConfig | None = None):
    """Median per-burst BER with SD-derived timing vs a uniformly random offset."""
    link = link or LinkConfig()
    out = []
    for snr in snr_db_values:
        errs = sd_sync_errors(snr, trials, seed)
        errs = np.where(np.isfinite(errs), errs, link.symbol_us / 2)
        out.append(offset_ber(modulation, errs, snr, seed, link, synchronized=True))
        rng = np.random.default_rng([seed, 7])
        rand = rng.uniform(0.0, link.symbol_us, size=len(errs))
        out.append(offset_ber(modulation, rand, snr, seed + 1, link, synchronized=False))
    return out
