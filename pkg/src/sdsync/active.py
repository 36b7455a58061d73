"""IQ-domain synchronisation as a phone would do it.

These detectors see complex samples, so they are a reference point for the
envelope-only tag detectors, not something a passive tag could run.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .detectors import Detection, SyncResult
from .waveform import IqWaveform, NumerologyConfig, generate_pss_sequence, pss_time_domain

ACTIVE_METHODS = ("active-xcorr", "active-autocorr")


@dataclass(frozen=True)
class CfoEstimate:
    """Normalised CFO estimate in (-0.5, 0.5] and the correlation magnitude."""

    epsilon_hat: float
    confidence: float


def cp_cfo_estimate(iq: IqWaveform, cfg: NumerologyConfig, symbol_start: int) -> CfoEstimate:
    """CFO from the cyclic prefix of the symbol whose CP starts at ``symbol_start``.

    The CP and the symbol tail it copies differ only by the CFO rotation
    accumulated over one FFT length, so the phase of their correlation is
    2*pi*epsilon.
    """
    n, g = cfg.fft_size, cfg.cp_samples
    if g < 1:
        raise ValueError("CFO estimation needs a cyclic prefix")
    if symbol_start < 0 or symbol_start + g + n > len(iq):
        raise ValueError(f"symbol at {symbol_start} does not fit in {len(iq)} samples")
    y = iq.samples
    acc = np.sum(np.conj(y[symbol_start:symbol_start + g]) * y[symbol_start + n:symbol_start + n + g])
    eps = float(np.angle(acc) / (2 * np.pi))
    if eps <= -0.5:
        eps += 1.0
    return CfoEstimate(eps, float(np.abs(acc)))


def correct_cfo(iq: IqWaveform, epsilon: float, fft_size: int) -> IqWaveform:
    """Undo a rotation of exp(j 2 pi epsilon n / N)."""
    n = np.arange(len(iq))
    return replace(iq, samples=iq.samples * np.exp(-2j * np.pi * epsilon * n / fft_size))


def pss_iq_templates(cfg: NumerologyConfig | None = None) -> list[IqWaveform]:
    """CP-stripped time-domain PSS for nid2 = 0, 1, 2."""
    cfg = cfg or NumerologyConfig()
    out = []
    for nid2 in range(3):
        sym = pss_time_domain(generate_pss_sequence(nid2), cfg)
        out.append(IqWaveform(sym.samples[cfg.cp_samples:], cfg.sample_rate_hz))
    return out


def iq_cross_correlation(y: np.ndarray, p: np.ndarray) -> np.ndarray:
    """C(theta) = |sum y[theta+n] p*[n]| / sum |y[theta+n]|^2 for every theta."""
    L = len(p)
    if len(y) < L:
        raise ValueError("waveform shorter than template")
    n_fft = 1 << int(np.ceil(np.log2(len(y) + L - 1)))
    full = np.fft.ifft(np.fft.fft(y, n_fft) * np.conj(np.fft.fft(p, n_fft)))
    num = np.abs(full[:len(y) - L + 1])  # circular lags 0..len-L hold the valid correlation
    c = np.concatenate([[0.0], np.cumsum(np.abs(y) ** 2)])
    energy = c[L:] - c[:-L]
    return np.where(energy > 0, num / np.where(energy > 0, energy, 1.0), 0.0)


def iq_symmetric_autocorr(y: np.ndarray, half: int) -> np.ndarray:
    """|sum_n y[t+n] y[t-n]| normalised by the arm energy, for t = half..len-half-1.

    A conjugate-symmetric symbol makes every product y(c+n) y(c-n) real and
    positive at its centre c. A CFO adds the same phase to every product,
    so the magnitude ignores it.
    """
    m = len(y) - 2 * half
    if m <= 0:
        raise ValueError("waveform shorter than one symmetric window")
    acc = np.zeros(m, dtype=complex)
    energy = np.zeros(m)
    for n in range(1, half + 1):
        a = y[half + n:half + n + m]
        b = y[half - n:half - n + m]
        acc += a * b
        energy += 0.5 * (np.abs(a) ** 2 + np.abs(b) ** 2)
    return np.where(energy > 0, np.abs(acc) / np.where(energy > 0, energy, 1.0), 0.0)


def _per_period_peaks(values: np.ndarray, offset: int, period: int) -> list[int]:
    picks = []
    centers = offset + np.arange(len(values))
    for k in range(int(centers[0]) // period, int(centers[-1]) // period + 1):
        lo = np.searchsorted(centers, k * period)
        hi = np.searchsorted(centers, (k + 1) * period)
        if hi > lo:
            picks.append(lo + int(np.argmax(values[lo:hi])))
    return picks


def iq_fine_timing(
    iq: IqWaveform,
    pss_iq: list[IqWaveform] | None = None,
    correct: bool = False,
    cfg: NumerologyConfig | None = None,
    method: str = "active-xcorr",
    cfo_symbol_start: int = 0,
) -> SyncResult:
    """Per-period PSS timing on IQ samples.

    ``active-xcorr`` peaks C(theta, i) over the three PSS replicas and
    reports the winning replica as the nid2 guess; ``active-autocorr`` peaks
    the conjugate-symmetry metric and cannot tell the cell ID. With
    ``correct`` the CFO is first estimated from the cyclic prefix starting at
    ``cfo_symbol_start`` and removed.
    """
    cfg = cfg or NumerologyConfig()
    if method not in ACTIVE_METHODS:
        raise ValueError(f"unknown active method {method!r}")
    y_wave = iq
    eps_hat = None
    if correct:
        eps_hat = cp_cfo_estimate(iq, cfg, cfo_symbol_start).epsilon_hat
        y_wave = correct_cfo(iq, eps_hat, cfg.fft_size)
    y = y_wave.samples
    n = cfg.fft_size
    half = n // 2
    if method == "active-xcorr":
        pss_iq = pss_iq or pss_iq_templates(cfg)
        if len(pss_iq) != 3:
            raise ValueError("active-xcorr needs three PSS replicas")
        vals = np.vstack([iq_cross_correlation(y, p.samples) for p in pss_iq])
        best, guess = vals.max(axis=0), vals.argmax(axis=0)
        offset = half
    else:
        best = iq_symmetric_autocorr(y, half - 1)
        guess = None
        offset = half - 1
    picks = _per_period_peaks(best, offset, cfg.period_samples)
    dets = [
        Detection(offset + i, None if guess is None else int(guess[i]), offset + i + half - 1)
        for i in picks
    ]
    md = {"fft_size": n, "cfo_corrected": correct, "epsilon_hat": eps_hat}
    return SyncResult(method, dets, iq.sample_rate_hz, iq.pss_centers, metadata=md)
