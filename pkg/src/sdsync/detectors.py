"""Passive PSS detectors over tag envelopes and comparator bit streams.

Every metric is indexed by window centre. ``MetricTrace.offset`` is the
envelope index of ``values[0]``. With ``half = rho // 2`` the symmetric
metrics pair S(t + n) with S(t - n) for n = 1..half, so they exist for
centres ``half <= t < len(env) - half``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .frontend import BitStream, Envelope, extract_envelope, quantize_comparator
from .waveform import (
    IqWaveform,
    NumerologyConfig,
    build_downlink_frame,
    generate_pss_sequence,
    pss_time_domain,
)

REAL_METHODS = ("NFT", "SST", "SA", "SD", "SD+")
QUANTIZED_METHODS = ("NFT_Q", "SST_Q", "SA_Q", "SD_Q")
BASELINES = ("one-template", "rising-edge")


@dataclass(frozen=True)
class SyncParams:
    """Window geometry and decision rule shared by all detectors.

    ``period_samples`` enables per-period search: one decision per SSB
    period, taken at the best metric inside that period. Without it the
    detectors fall back to threshold mode (local extrema past a threshold).
    """

    rho: int
    period_samples: int | None = None
    r_threshold: float = 0.8
    sym_threshold: float = 0.7
    sd_gamma: float = 0.3
    edge_threshold: float = 0.5
    edge_window: int | None = None
    cp_fraction: float = 0.0703
    domain: str = "real-envelope"

    def __post_init__(self):
        if self.rho < 4:
            raise ValueError(f"rho must be >= 4, got {self.rho}")
        if self.period_samples is not None and self.period_samples <= self.rho:
            raise ValueError("period_samples must exceed rho")
        if self.domain not in ("real-envelope", "one-bit"):
            raise ValueError(f"unknown domain {self.domain!r}")

    @property
    def half(self) -> int:
        return self.rho // 2

    @classmethod
    def for_rate(cls, tag_rate_hz: float, scs_hz: float = 30e3, ssb_period_s: float | None = 5e-3, **kw):
        rho = int(round(tag_rate_hz / scs_hz))
        period = None if ssb_period_s is None else int(round(ssb_period_s * tag_rate_hz))
        return cls(rho=rho, period_samples=period, **kw)

    def thresholds(self) -> dict:
        return {
            "r_threshold": self.r_threshold,
            "sym_threshold": self.sym_threshold,
            "sd_gamma": self.sd_gamma,
            "edge_threshold": self.edge_threshold,
        }


@dataclass(frozen=True)
class PssTemplate:
    nid2: int
    values: np.ndarray
    half: bool = False


@dataclass(frozen=True)
class MetricTrace:
    values: np.ndarray
    kind: str
    offset: int = 0
    flagged: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.values)

    @property
    def centers(self) -> np.ndarray:
        return self.offset + np.arange(len(self.values))


@dataclass(frozen=True)
class Detection:
    center_index: int
    nid2_guess: int | None
    commit_index: int


@dataclass
class SyncResult:
    method: str
    detections: list[Detection]
    sample_rate_hz: float
    true_centers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rejected: int = 0
    flagged: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.detections = sorted(self.detections, key=lambda d: d.center_index)

    @property
    def centers(self) -> np.ndarray:
        return np.array([d.center_index for d in self.detections], dtype=float)

    def _nearest_truth(self) -> np.ndarray:
        truth = np.asarray(self.true_centers, dtype=float)
        if truth.size == 0:
            return np.full(len(self.detections), np.nan)
        c = self.centers
        return truth[np.argmin(np.abs(c[:, None] - truth[None, :]), axis=1)]

    @property
    def errors_us(self) -> np.ndarray:
        return np.abs(self.centers - self._nearest_truth()) / self.sample_rate_hz * 1e6

    @property
    def delays_us(self) -> np.ndarray:
        commits = np.array([d.commit_index for d in self.detections], dtype=float)
        return (commits - self._nearest_truth()) / self.sample_rate_hz * 1e6


# ---------------------------------------------------------------------------
# templates

def make_templates(
    tag_rate_hz: float,
    rho: int,
    cfg: NumerologyConfig | None = None,
    smooth_len: int = 3,
    half: bool = False,
) -> list[PssTemplate]:
    """Noise-free tag-rate PSS envelopes, one per nid2.

    The PSS body is tiled three times so the front end sees a periodic
    signal, and the template is cut around the middle body's centre. A half
    template keeps the samples after the centre, offsets 1..rho//2.
    """
    cfg = cfg or NumerologyConfig()
    out = []
    for nid2 in range(3):
        sym = pss_time_domain(generate_pss_sequence(nid2), cfg)
        body = sym.samples[cfg.cp_samples:]
        n = cfg.fft_size
        centre = n + n / 2
        # shift so the symmetry centre lands on the tag sample grid
        ratio = cfg.sample_rate_hz / tag_rate_hz
        k = int(np.ceil(centre / ratio))
        shift = k * ratio - centre
        tiled = np.tile(body, 3)
        if shift:
            spec = np.fft.fft(tiled)
            f = np.fft.fftfreq(len(tiled))
            tiled = np.fft.ifft(spec * np.exp(-2j * np.pi * f * shift))
        wave = IqWaveform(tiled, cfg.sample_rate_hz)
        env = extract_envelope(wave, tag_rate_hz, smooth_len)
        h = rho // 2
        if half:
            vals = env.samples[k + 1:k + 1 + h]
        else:
            vals = env.samples[k - h:k - h + rho]
        out.append(PssTemplate(nid2, np.asarray(vals, dtype=float), half))
    return out


def make_bit_templates(
    tag_rate_hz: float,
    rho: int,
    policy,
    cfg: NumerologyConfig | None = None,
    smooth_len: int = 3,
    half: bool = False,
    n_ref: int = 9,
    seed: int = 1_000_003,
) -> list[PssTemplate]:
    """Comparator bits of a clean PSS as seen inside a live carrier.

    A comparator with a slow reference sets each PSS bit relative to the
    surrounding symbols' power, so an isolated PSS would quantise
    differently. Each template is the per-bit majority over ``n_ref``
    noise-free reference frames.
    """
    cfg = cfg or NumerologyConfig()
    if n_ref < 1:
        raise ValueError("n_ref must be >= 1")
    h = rho // 2
    out = []
    for nid2 in range(3):
        votes = np.zeros(h if half else rho)
        for r in range(n_ref):
            wave = build_downlink_frame(nid2, cfg.ssb_period_s, cfg, seed + r)
            env = extract_envelope(wave, tag_rate_hz, smooth_len)
            bits = quantize_comparator(env, policy).bits
            k = int(round(env.true_pss_centers[0]))
            votes += bits[k + 1:k + 1 + h] if half else bits[k - h:k - h + rho]
        out.append(PssTemplate(nid2, (2 * votes >= n_ref).astype(float), half))
    return out


# ---------------------------------------------------------------------------
# real-domain metrics

def _window_sums(x: np.ndarray, width: int) -> np.ndarray:
    c = np.concatenate([[0.0], np.cumsum(x, dtype=float)])
    return c[width:] - c[:-width]


def _window_deviation_energy(s: np.ndarray, width: int, chunk: int = 8192) -> tuple[np.ndarray, np.ndarray]:
    """Per window: sum of squared deviations from the window mean, and sum of squares.

    Two-pass per window, so a constant window gives exactly zero variance
    instead of a rounding residue.
    """
    win = np.lib.stride_tricks.sliding_window_view(s, width)
    var = np.empty(len(win))
    energy = np.empty(len(win))
    for lo in range(0, len(win), chunk):
        w = win[lo:lo + chunk]
        d = w - w.mean(axis=1, keepdims=True)
        var[lo:lo + chunk] = np.einsum("ij,ij->i", d, d)
        energy[lo:lo + chunk] = np.einsum("ij,ij->i", w, w)
    return var, energy


def _zero_variance(var: np.ndarray, energy: np.ndarray) -> np.ndarray:
    return var <= 1e-20 * energy


def cross_correlate(env, tmpl: PssTemplate | np.ndarray, offset: int | None = None) -> MetricTrace:
    """Sliding Pearson correlation of the envelope with a template.

    ``values[t]`` correlates ``S[t:t+L]`` with the template; the trace is
    indexed by template centre (``offset`` defaults to ``L // 2``).
    Zero-variance windows give 0 and are flagged.
    """
    s = np.asarray(getattr(env, "samples", env), dtype=float)
    p = np.asarray(getattr(tmpl, "values", tmpl), dtype=float)
    L = len(p)
    if len(s) < L:
        raise ValueError("envelope shorter than template")
    pc = p - p.mean()
    p_var = np.sum(pc * pc)
    # sum((S - Sbar)(P - Pbar)) == sum(S (P - Pbar))
    num = np.correlate(s, pc, mode="valid")
    var, energy = _window_deviation_energy(s, L)
    tiny = _zero_variance(var, energy) | _zero_variance(np.array([p_var]), np.array([np.sum(p * p)]))
    den = np.sqrt(var * p_var)
    r = np.where(tiny, 0.0, num / np.where(tiny, 1.0, den))
    return MetricTrace(np.clip(r, -1.0, 1.0), "cross-corr", L // 2 if offset is None else offset, tiny)


def _n_centers(length: int, half: int) -> int:
    """Number of centres with a complete symmetric window."""
    m = length - 2 * half
    if m <= 0:
        raise ValueError("envelope shorter than one symmetric window")
    return m


def symmetric_autocorr(env, params: SyncParams) -> MetricTrace:
    """Pearson correlation of the forward arm with the mirrored backward arm."""
    s = np.asarray(getattr(env, "samples", env), dtype=float)
    h = params.half
    m = _n_centers(len(s), h)
    fwd = [s[h + n:h + n + m] for n in range(1, h + 1)]
    bwd = [s[h - n:h - n + m] for n in range(1, h + 1)]
    ma = sum(fwd) / h
    mb = sum(bwd) / h
    cov, va, vb, ea, eb = (np.zeros(m) for _ in range(5))
    for a, b in zip(fwd, bwd):
        da, db = a - ma, b - mb
        cov += da * db
        va += da * da
        vb += db * db
        ea += a * a
        eb += b * b
    tiny = _zero_variance(va, ea) | _zero_variance(vb, eb)
    r = np.where(tiny, 0.0, cov / np.where(tiny, 1.0, np.sqrt(va * vb)))
    return MetricTrace(np.clip(r, -1.0, 1.0), "sym-autocorr", h, tiny)


def sd_metric(env, params: SyncParams) -> MetricTrace:
    """Sigma(t) = sum_{n=1}^{half} |S(t+n) - S(t-n)|."""
    s = np.asarray(getattr(env, "samples", env), dtype=float)
    h = params.half
    m = _n_centers(len(s), h)
    acc = np.zeros(m)
    for n in range(1, h + 1):
        acc += np.abs(s[h + n:h + n + m] - s[h - n:h - n + m])
    return MetricTrace(acc, "sd-sigma", h)


# ---------------------------------------------------------------------------
# one-bit metrics

def xor_metric(bits, params: SyncParams) -> MetricTrace:
    """SD_Q: count of mismatched mirrored bit pairs."""
    b = np.asarray(getattr(bits, "bits", bits), dtype=np.uint8)
    h = params.half
    m = _n_centers(len(b), h)
    acc = np.zeros(m, dtype=np.int64)
    for n in range(1, h + 1):
        acc += b[h + n:h + n + m] ^ b[h - n:h - n + m]
    return MetricTrace(acc, "hamming", h)


def xnor_metric(bits, params: SyncParams) -> MetricTrace:
    """SA_Q: count of matched mirrored bit pairs."""
    b = np.asarray(getattr(bits, "bits", bits), dtype=np.uint8)
    h = params.half
    m = _n_centers(len(b), h)
    acc = np.zeros(m, dtype=np.int64)
    for n in range(1, h + 1):
        acc += 1 - (b[h + n:h + n + m] ^ b[h - n:h - n + m])
    return MetricTrace(acc, "hamming", h)


def bit_similarity(bits, tmpl: PssTemplate | np.ndarray, offset: int | None = None) -> MetricTrace:
    """(matches - mismatches) / L between the bit stream and a bit template."""
    b = np.asarray(getattr(bits, "bits", bits), dtype=np.int64)
    t = np.asarray(getattr(tmpl, "values", tmpl)).astype(np.int64)
    L = len(t)
    if len(b) < L:
        raise ValueError("bit stream shorter than template")
    ones = np.concatenate([[0], np.cumsum(b)])
    ones = ones[L:] - ones[:-L]
    both = np.correlate(b, t, mode="valid")
    mismatches = ones + t.sum() - 2 * both
    return MetricTrace((L - 2 * mismatches) / L, "bit-similarity", L // 2 if offset is None else offset)


# ---------------------------------------------------------------------------
# decision rules

def _period_windows(centers: np.ndarray, period: int):
    """Index ranges of ``centers`` falling in each frame-relative period."""
    if len(centers) == 0:
        return
    first = int(centers[0]) // period
    last = int(centers[-1]) // period
    for k in range(first, last + 1):
        lo = np.searchsorted(centers, k * period)
        hi = np.searchsorted(centers, (k + 1) * period)
        if hi > lo:
            yield lo, hi


def _best_per_period(values: np.ndarray, centers: np.ndarray, period: int, maximize: bool):
    picks = []
    for lo, hi in _period_windows(centers, period):
        seg = values[lo:hi]
        i = int(np.argmax(seg) if maximize else np.argmin(seg))  # earliest wins ties
        picks.append(lo + i)
    return picks


def _local_extrema(values: np.ndarray, passes: np.ndarray, guard: int, maximize: bool):
    """Indices passing the threshold that are the best within +-guard."""
    v = values if maximize else -values
    idx = np.flatnonzero(passes)
    picks = []
    for i in idx:
        lo, hi = max(0, i - guard), min(len(v), i + guard + 1)
        if v[i] >= v[lo:hi].max() and (not picks or i - picks[-1] > guard):
            picks.append(int(i))
    return picks


def _result(method, env, picks, centers, commit_lead, params, guesses=None, **meta):
    dets = [
        Detection(int(centers[i]), None if guesses is None else int(guesses[i]), int(centers[i]) + commit_lead)
        for i in picks
    ]
    md = {"rho": params.rho, **params.thresholds(), **meta}
    return SyncResult(method, dets, env.sample_rate_hz, np.asarray(env.true_pss_centers, float), metadata=md)


def _detect_max(method, env, values, centers, threshold, commit_lead, params, guesses=None, gate=True):
    if params.period_samples:
        picks = _best_per_period(values, centers, params.period_samples, maximize=True)
        rejected = 0
        if gate:
            kept = [i for i in picks if values[i] >= threshold]
            rejected = len(picks) - len(kept)
            picks = kept
    else:
        picks = _local_extrema(values, values >= threshold, params.rho, maximize=True)
        rejected = 0
    res = _result(method, env, picks, centers, commit_lead, params, guesses)
    res.rejected = rejected
    return res


# ---------------------------------------------------------------------------
# real-domain detectors

def _stack_correlations(env, templates, corr):
    traces = [corr(env, t) for t in templates]
    vals = np.vstack([t.values for t in traces])
    return traces[0], vals


def nft_detect(env: Envelope, templates: list[PssTemplate], params: SyncParams, gate: bool = False) -> SyncResult:
    """NR fine timing: Pearson correlation against all three PSS templates.

    In per-period mode the strongest peak of each period is taken; ``gate``
    additionally requires it to clear ``r_threshold``.
    """
    if len(templates) != 3 or any(t.half for t in templates):
        raise ValueError("NFT needs three full templates")
    ref, vals = _stack_correlations(env, templates, cross_correlate)
    best = vals.max(axis=0)
    guess = np.array([templates[i].nid2 for i in vals.argmax(axis=0)])
    L = len(templates[0].values)
    return _detect_max("NFT", env, best, ref.centers, params.r_threshold,
                       L - 1 - L // 2, params, guess, gate or not params.period_samples)


def sa_detect(env: Envelope, params: SyncParams) -> SyncResult:
    tr = symmetric_autocorr(env, params)
    res = _detect_max("SA", env, tr.values, tr.centers, params.sym_threshold, params.half, params,
                      gate=not params.period_samples)
    res.flagged = bool(tr.flagged is not None and tr.flagged.any())
    return res


def _sst(method, env, sym_values, sym_centers, stage2, templates, params, threshold_sym, commit):
    """Shared SST staging: symmetry gate, then half-template correlation."""
    h = params.half
    s2 = np.full((3, len(sym_values)), -np.inf)
    # stage-2 correlation of S(t+1..t+h) starts at envelope index t + 1
    for k, t in enumerate(templates):
        tr = stage2(env, t, 0)
        start = sym_centers + 1
        ok = start < len(tr.values)
        s2[k, ok] = tr.values[start[ok]]
    best2 = s2.max(axis=0)
    guess = s2.argmax(axis=0)
    if params.period_samples:
        picks, rejected = [], 0
        for lo, hi in _period_windows(sym_centers, params.period_samples):
            seg = sym_values[lo:hi]
            cand = np.flatnonzero(seg >= threshold_sym * seg.max()) if seg.max() > 0 else np.arange(hi - lo)
            picks.append(lo + cand[np.argmax(best2[lo + cand])])
    else:
        passes = (sym_values >= threshold_sym) & (best2 >= params.r_threshold)
        rejected = int(np.sum((sym_values >= threshold_sym) & ~passes))
        picks = _local_extrema(best2, passes, params.rho, maximize=True)
    res = _result(method, env, picks, sym_centers, commit, params,
                  np.array([templates[g].nid2 for g in guess]))
    res.rejected = rejected
    return res


def sst_detect(env: Envelope, half_templates: list[PssTemplate], params: SyncParams) -> SyncResult:
    """Symmetry-based semi-template sync.

    Stage 1 keeps centres whose symmetric autocorrelation is within
    ``sym_threshold`` of the period's best (absolute threshold in threshold
    mode); stage 2 correlates the window's trailing half against the three
    half templates and takes the best.
    """
    if len(half_templates) != 3 or any(len(t.values) != params.half for t in half_templates):
        raise ValueError("SST needs three half templates of length rho // 2")
    sym = symmetric_autocorr(env, params)
    return _sst("SST", env, sym.values, sym.centers, cross_correlate, half_templates, params,
                params.sym_threshold, params.half)


def sd_detect(env: Envelope, params: SyncParams) -> SyncResult:
    """argmin of the symmetric-difference metric.

    Per-period mode picks one minimum per period. Threshold mode keeps local
    minima below ``sd_gamma`` times the trace mean.
    """
    tr = sd_metric(env, params)
    return _detect_min("SD", env, tr, params)


def _detect_min(method, env, tr: MetricTrace, params: SyncParams) -> SyncResult:
    v = tr.values.astype(float)
    if params.period_samples:
        picks = _best_per_period(v, tr.centers, params.period_samples, maximize=False)
    else:
        level = params.sd_gamma * v.mean() if len(v) else 0.0
        picks = _local_extrema(v, v <= level, params.rho, maximize=False)
    return _result(method, env, picks, tr.centers, params.half, params)


def sd_plus_detect(env: Envelope, params: SyncParams) -> SyncResult:
    """SD on the first period only; later PSSs extrapolated by the period.

    ``metadata['windows_executed']`` counts the centres evaluated.
    """
    if not params.period_samples:
        raise ValueError("SD+ needs period_samples")
    P, h = params.period_samples, params.half
    s = np.asarray(env.samples, dtype=float)
    head = s[:min(len(s), P + 2 * h)]
    tr = sd_metric(head, params)
    picks = _best_per_period(tr.values, tr.centers, P, maximize=False)
    if not picks:
        return SyncResult("SD+", [], env.sample_rate_hz, np.asarray(env.true_pss_centers, float),
                          flagged=True, metadata={"rho": params.rho, "windows_executed": len(tr)})
    first = int(tr.centers[picks[0]])
    last_center = len(s) - 1 - h
    dets = [Detection(c, None, c + h) for c in range(first, last_center + 1, P)]
    md = {"rho": params.rho, **params.thresholds(), "windows_executed": len(tr)}
    return SyncResult("SD+", dets, env.sample_rate_hz, np.asarray(env.true_pss_centers, float), metadata=md)


# ---------------------------------------------------------------------------
# one-bit detectors

def quantized_detect(
    bits: BitStream,
    method: str,
    params: SyncParams,
    bit_templates: list[PssTemplate] | None = None,
) -> SyncResult:
    """XOR/XNOR and Hamming-similarity versions of SD, SA, NFT and SST."""
    if method == "SD_Q":
        tr = xor_metric(bits, params)
        res = _detect_min("SD_Q", bits, tr, params)
        return res
    if method == "SA_Q":
        tr = xnor_metric(bits, params)
        # a full match count of half maps to 1.0
        res = _detect_max("SA_Q", bits, tr.values.astype(float), tr.centers,
                          params.sym_threshold * params.half, params.half, params,
                          gate=not params.period_samples)
        return res
    if method not in ("NFT_Q", "SST_Q"):
        raise ValueError(f"unknown quantized method {method!r}")
    if not bit_templates or len(bit_templates) != 3:
        raise ValueError(f"{method} needs three bit templates")
    if method == "NFT_Q":
        if any(t.half for t in bit_templates):
            raise ValueError("NFT_Q needs full bit templates")
        ref, vals = _stack_correlations(bits, bit_templates, bit_similarity)
        guess = np.array([bit_templates[i].nid2 for i in vals.argmax(axis=0)])
        L = len(bit_templates[0].values)
        res = _detect_max("NFT_Q", bits, vals.max(axis=0), ref.centers, params.r_threshold,
                          L - 1 - L // 2, params, guess, gate=not params.period_samples)
        return res
    if any(len(t.values) != params.half for t in bit_templates):
        raise ValueError("SST_Q needs half bit templates of length rho // 2")
    tr = xnor_metric(bits, params)
    sym = 2.0 * tr.values / params.half - 1.0
    res = _sst("SST_Q", bits, sym, tr.centers, bit_similarity, bit_templates, params,
               params.sym_threshold, params.half)
    return res


# ---------------------------------------------------------------------------
# prior-work baselines

def baseline_one_template(
    env: Envelope, tmpl0: PssTemplate, params: SyncParams, threshold: float | None = None
) -> SyncResult:
    """Single nid2 = 0 template, thresholded (one-template tag stand-in).

    ``threshold`` overrides ``params.r_threshold`` for the gate.
    """
    tr = cross_correlate(env, tmpl0)
    L = len(tmpl0.values)
    gate = params.r_threshold if threshold is None else threshold
    res = _detect_max("one-template", env, tr.values, tr.centers, gate,
                      L - 1 - L // 2, params, np.full(len(tr), tmpl0.nid2), gate=True)
    return res


def energy_rise(env, window: int) -> MetricTrace:
    """mean(S[t:t+w]) - mean(S[t-w:t]) for t = w .. len - w."""
    s = np.asarray(getattr(env, "samples", env), dtype=float)
    sums = _window_sums(s, window) / window
    rise = sums[window:] - sums[:-window]
    return MetricTrace(rise, "energy-rise", window)


def _runs(mask: np.ndarray, lo: int, hi: int):
    """(start, stop) of each run of True in mask[lo:hi], stop exclusive."""
    m = np.concatenate([[False], mask[lo:hi], [False]]).astype(np.int8)
    d = np.diff(m)
    for a, b in zip(np.flatnonzero(d == 1), np.flatnonzero(d == -1)):
        yield lo + int(a), lo + int(b)


def baseline_rising_edge(env: Envelope, params: SyncParams) -> SyncResult:
    """First energy rise per period (rising-edge tag stand-in).

    The rise is measured between two adjacent ``edge_window`` blocks and
    compared with ``edge_threshold`` times the mean envelope. The edge is
    the rise peak of the first above-threshold run; the PSS centre is
    assumed one CP plus half a symbol later.
    """
    w = params.edge_window or max(2, params.rho // 8)
    tr = energy_rise(env, w)
    s = np.asarray(env.samples, dtype=float)
    level = params.edge_threshold * (s.mean() if len(s) else 0.0)
    above = tr.values >= level
    lead = int(round(params.rho * (0.5 + params.cp_fraction)))
    edges = []
    windows = (_period_windows(tr.centers, params.period_samples) if params.period_samples
               else [(0, len(tr))])
    for lo, hi in windows:
        for start, stop in _runs(above, lo, hi):
            edges.append(start + int(np.argmax(tr.values[start:stop])))
            if params.period_samples:
                break
    dets = [Detection(int(tr.centers[e]) + lead, None, int(tr.centers[e]) + w) for e in edges]
    md = {"rho": params.rho, **params.thresholds(), "edge_window": w}
    res = SyncResult("rising-edge", dets, env.sample_rate_hz, np.asarray(env.true_pss_centers, float), metadata=md)
    res.metadata["edge_indices"] = [int(tr.centers[e]) for e in edges]
    return res
