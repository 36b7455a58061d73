"""Single-symbol backscatter link: BER as a function of timing offset.

The tag switches its reflection phase once per backscatter symbol. The
reader integrates each symbol over a window that starts ``offset`` late, so
a fraction offset/T of the window collects the next symbol. Noise is added
per sample at the link SNR and summed over the window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MODULATIONS = {"BPSK": 2, "QPSK": 4, "16PSK": 16}


@dataclass(frozen=True)
class BerRecord:
    modulation: str
    timing_offset_us: float
    snr_db: float
    ber: float
    trials: int
    synchronized: bool | None = None

    def __post_init__(self):
        if not 0.0 <= self.ber <= 1.0:
            raise ValueError("ber must lie in [0, 1]")


@dataclass(frozen=True)
class LinkConfig:
    """Backscatter symbol length and the reader's sampling rate."""

    symbol_us: float = 1e6 / 30e3 * (1 + 0.0703)
    sample_rate_hz: float = 1.92e6
    symbols_per_trial: int = 64

    @property
    def samples_per_symbol(self) -> int:
        return max(1, int(round(self.symbol_us * 1e-6 * self.sample_rate_hz)))


def _gray(n: np.ndarray) -> np.ndarray:
    return n ^ (n >> 1)


def psk_constellation(modulation: str) -> tuple[np.ndarray, int]:
    """Unit-energy PSK points indexed by Gray-coded bit label."""
    if modulation not in MODULATIONS:
        raise ValueError(f"unknown modulation {modulation!r}")
    m = MODULATIONS[modulation]
    k = int(np.log2(m))
    points = np.empty(m, dtype=complex)
    points[_gray(np.arange(m))] = np.exp(2j * np.pi * np.arange(m) / m)
    return points, k


def _demod(z: np.ndarray, m: int) -> np.ndarray:
    """Nearest PSK point, returned as its Gray-coded label."""
    idx = np.round(np.angle(z) / (2 * np.pi / m)).astype(np.int64) % m
    return _gray(idx)


def _bit_errors(a: np.ndarray, b: np.ndarray, k: int) -> int:
    x = np.bitwise_xor(a, b)
    return int(sum(((x >> i) & 1).sum() for i in range(k)))


def simulate_ber(
    modulation: str,
    offsets_us: np.ndarray,
    snr_db: float,
    rng: np.random.Generator,
    link: LinkConfig | None = None,
) -> float:
    """Pooled BER over one burst per entry of ``offsets_us``."""
    link = link or LinkConfig()
    points, k = psk_constellation(modulation)
    m = len(points)
    offsets_us = np.atleast_1d(np.asarray(offsets_us, dtype=float))
    if np.any(offsets_us < 0):
        raise ValueError("timing offsets must be non-negative")
    n_sym, L = link.symbols_per_trial, link.samples_per_symbol
    labels = rng.integers(0, m, size=(len(offsets_us), n_sym + 1))
    tx = points[labels]
    # a late window of d samples takes L - d samples of symbol i and d of the
    # next; offsets past one symbol keep wrapping forward
    d_total = np.round(offsets_us * 1e-6 * link.sample_rate_hz).astype(np.int64)
    skip, d = np.divmod(d_total, L)
    cur = np.take_along_axis(tx, np.minimum(np.arange(n_sym)[None, :] + skip[:, None], n_sym), axis=1)
    nxt = np.take_along_axis(tx, np.minimum(np.arange(n_sym)[None, :] + skip[:, None] + 1, n_sym), axis=1)
    sig = ((L - d)[:, None] * cur + d[:, None] * nxt) / L
    sigma = np.sqrt(10 ** (-snr_db / 10) / 2 / L)  # per-sample noise summed over L samples
    noise = sigma * (rng.standard_normal(sig.shape) + 1j * rng.standard_normal(sig.shape))
    rx = _demod(sig + noise, m)
    return _bit_errors(rx, labels[:, :n_sym], k) / (labels[:, :n_sym].size * k)


def ber_experiment(
    modulation: str,
    offsets_us,
    snr_db: float = 15.0,
    trials: int = 1000,
    seed: int = 0,
    link: LinkConfig | None = None,
) -> list[BerRecord]:
    """BER at each fixed timing offset, ``trials`` bursts per offset."""
    out = []
    for i, off in enumerate(offsets_us):
        if off < 0:
            raise ValueError("timing offsets must be non-negative")
        rng = np.random.default_rng([seed, i, MODULATIONS[modulation]])
        ber = simulate_ber(modulation, np.full(trials, float(off)), snr_db, rng, link)
        out.append(BerRecord(modulation, float(off), float(snr_db), ber, trials))
    return out


def offset_ber(
    modulation: str,
    offsets_us: np.ndarray,
    snr_db: float,
    seed: int = 0,
    link: LinkConfig | None = None,
    synchronized: bool | None = None,
) -> BerRecord:
    """Median per-burst BER when burst j is read with offset ``offsets_us[j]``."""
    link = link or LinkConfig()
    rng = np.random.default_rng([seed, MODULATIONS[modulation]])
    per_burst = [simulate_ber(modulation, np.array([o]), snr_db, rng, link) for o in offsets_us]
    return BerRecord(modulation, float(np.median(offsets_us)), float(snr_db), float(np.median(per_burst)),
                     len(offsets_us), synchronized)
