"""5G NR downlink waveform synthesis: PSS sequences, SSB symbol groups and
periodic frames.

Only the properties that matter to an envelope-domain tag are modelled
faithfully. The PSS is the real BPSK m-sequence, so its time-domain symbol is
conjugate-symmetric and its envelope mirror-symmetric. PBCH, SSS and PDSCH
content is replaced by seeded QPSK/BPSK fill. Every occupied resource
element carries unit power, so a symbol's power scales with its occupied
bandwidth and the PSS-only symbol is a power dip within a loaded carrier.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PSS_LENGTH = 127
PBCH_SUBCARRIERS = 240
SSS_OFFSET_IN_SSB = 56  # SSS occupies SSB subcarriers 56..182
PBCH_EDGE = 48  # PBCH subcarriers on each side of the SSS in SSB symbol 2
DATA_SUBCARRIERS = 288  # 24 resource blocks, a 10 MHz carrier at 30 kHz

_PSS_SEED = (0, 1, 1, 0, 1, 1, 1)


@dataclass(frozen=True)
class NumerologyConfig:
    """OFDM numerology of the simulated gNodeB.

    ``cp_samples`` defaults to the normal-CP ratio (about 7 % of the FFT
    size). ``pss_first_bin`` is the lowest subcarrier index that carries a
    PSS value; any placement keeps the spectrum real, and a frequency shift
    leaves every envelope unchanged. ``data_subcarriers`` is the occupied
    width of data symbols (clipped to the FFT size).
    """

    scs_hz: float = 30e3
    fft_size: int = 512
    cp_samples: int | None = None
    ssb_period_s: float = 5e-3
    pss_first_bin: int = 1
    data_subcarriers: int = DATA_SUBCARRIERS

    def __post_init__(self):
        if self.fft_size < 128 or self.fft_size & (self.fft_size - 1):
            raise ValueError(f"fft_size must be a power of two >= 128, got {self.fft_size}")
        if self.scs_hz <= 0:
            raise ValueError("scs_hz must be positive")
        if self.ssb_period_s <= 0:
            raise ValueError("ssb_period_s must be positive")
        if self.cp_samples is None:
            object.__setattr__(self, "cp_samples", int(round(0.0703 * self.fft_size)))
        if not 0 <= self.cp_samples < self.fft_size:
            raise ValueError("cp_samples must be in [0, fft_size)")
        if not 0 <= self.pss_first_bin <= self.fft_size - PSS_LENGTH:
            raise ValueError("PSS does not fit at pss_first_bin")
        if self.data_subcarriers < 1:
            raise ValueError("data_subcarriers must be positive")

    @property
    def sample_rate_hz(self) -> float:
        return self.scs_hz * self.fft_size

    @property
    def symbol_duration_s(self) -> float:
        """Useful (CP-free) OFDM symbol duration, 1/scs."""
        return self.fft_size / (self.scs_hz * self.fft_size)

    @property
    def symbol_samples(self) -> int:
        return self.fft_size + self.cp_samples

    @property
    def period_samples(self) -> int:
        return int(round(self.ssb_period_s * self.sample_rate_hz))


@dataclass(frozen=True)
class PssFreqSequence:
    nid2: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (PSS_LENGTH,):
            raise ValueError("PSS must hold exactly 127 values")
        if not np.all(np.abs(self.values) == 1):
            raise ValueError("PSS entries must be +1 or -1")


@dataclass(frozen=True)
class Annotation:
    label: str
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class IqWaveform:
    """Complex baseband samples plus the extents of every placed symbol.

    A ``"pss"`` annotation covers the CP-stripped PSS body, so its midpoint
    is the mirror-symmetry centre of the PSS envelope.
    """

    samples: np.ndarray
    sample_rate_hz: float
    annotations: tuple[Annotation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ValueError("sample_rate_hz must be positive")
        n = len(self.samples)
        spans = sorted((a.start, a.stop) for a in self.annotations)
        for lo, hi in spans:
            if lo < 0 or hi > n:
                raise ValueError(f"annotation [{lo}, {hi}) outside {n} samples")
        for (_, hi), (lo, _) in zip(spans, spans[1:]):
            if lo < hi:
                raise ValueError("annotations overlap")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def pss_centers(self) -> np.ndarray:
        return np.array(
            [a.start + a.length / 2 for a in self.annotations if a.label == "pss"],
            dtype=float,
        )


def _pss_msequence() -> np.ndarray:
    x = np.zeros(PSS_LENGTH, dtype=np.int64)
    x[:7] = _PSS_SEED
    for i in range(PSS_LENGTH - 7):
        x[i + 7] = (x[i + 4] + x[i]) % 2
    return x


def generate_pss_sequence(nid2: int) -> PssFreqSequence:
    """BPSK PSS d(n) = 1 - 2 x((n + 43 nid2) mod 127)."""
    if nid2 not in (0, 1, 2):
        raise ValueError(f"nid2 must be 0, 1 or 2, got {nid2!r}")
    x = _pss_msequence()
    m = (np.arange(PSS_LENGTH) + 43 * nid2) % PSS_LENGTH
    return PssFreqSequence(nid2, (1 - 2 * x[m]).astype(float))


def _ofdm(spectra: np.ndarray, cp: int) -> np.ndarray:
    """IDFT (1/N scaling) each row and prepend its cyclic prefix."""
    body = np.fft.ifft(spectra, axis=-1)
    return np.concatenate([body[..., body.shape[-1] - cp:], body], axis=-1)


def pss_spectrum(seq: PssFreqSequence, cfg: NumerologyConfig) -> np.ndarray:
    spec = np.zeros(cfg.fft_size, dtype=complex)
    spec[cfg.pss_first_bin:cfg.pss_first_bin + PSS_LENGTH] = seq.values
    return spec


def pss_time_domain(seq: PssFreqSequence, cfg: NumerologyConfig | None = None) -> IqWaveform:
    """One PSS OFDM symbol (CP + body)."""
    cfg = cfg or NumerologyConfig()
    sym = _ofdm(pss_spectrum(seq, cfg), cfg.cp_samples)
    ann = (Annotation("pss", cfg.cp_samples, cfg.fft_size),)
    return IqWaveform(sym, cfg.sample_rate_hz, ann)


def _qpsk(rng: np.random.Generator, n: int) -> np.ndarray:
    bits = rng.integers(0, 2, size=(2, n))
    return ((1 - 2 * bits[0]) + 1j * (1 - 2 * bits[1])) / np.sqrt(2)


def _data_spectra(rng: np.random.Generator, count: int, cfg: NumerologyConfig) -> np.ndarray:
    d = min(cfg.data_subcarriers, cfg.fft_size)
    lo = min(cfg.pss_first_bin, cfg.fft_size - d)
    spectra = np.zeros((count, cfg.fft_size), dtype=complex)
    spectra[:, lo:lo + d] = _qpsk(rng, count * d).reshape(count, d)
    return spectra


def _ssb_spectra(nid2: int, rng: np.random.Generator, cfg: NumerologyConfig) -> np.ndarray:
    """Four SSB symbol spectra: PSS, PBCH, PBCH+SSS, PBCH.

    The block starts at ``pss_first_bin``; symbol 2 uses the NR layout
    (PBCH on 0..47 and 192..239, SSS on 56..182) when the FFT is wide enough.
    """
    n, b = cfg.fft_size, cfg.pss_first_bin
    width = min(PBCH_SUBCARRIERS, n - b)
    spectra = np.zeros((4, n), dtype=complex)
    spectra[0] = pss_spectrum(generate_pss_sequence(nid2), cfg)
    for k in (1, 3):
        spectra[k, b:b + width] = _qpsk(rng, width)

    s0 = min(SSS_OFFSET_IN_SSB, width - PSS_LENGTH)
    lo_edge = min(PBCH_EDGE, s0)
    hi_start = PBCH_SUBCARRIERS - PBCH_EDGE if width >= PBCH_SUBCARRIERS else s0 + PSS_LENGTH
    hi_edge = max(min(PBCH_EDGE, width - hi_start), 0)
    spectra[2, b + s0:b + s0 + PSS_LENGTH] = 1 - 2 * rng.integers(0, 2, PSS_LENGTH).astype(float)
    spectra[2, b:b + lo_edge] = _qpsk(rng, lo_edge)
    spectra[2, b + hi_start:b + hi_start + hi_edge] = _qpsk(rng, hi_edge)
    return spectra


def _ssb_annotations(start: int, cfg: NumerologyConfig) -> list[Annotation]:
    L, cp = cfg.symbol_samples, cfg.cp_samples
    return [
        Annotation("pss", start + cp, cfg.fft_size),
        Annotation("pbch", start + L, L),
        Annotation("sss_pbch", start + 2 * L, L),
        Annotation("pbch", start + 3 * L, L),
    ]


def build_ssb(nid2: int, payload_seed: int, cfg: NumerologyConfig | None = None) -> IqWaveform:
    """Four consecutive SSB symbols with seeded PBCH/SSS stand-ins."""
    cfg = cfg or NumerologyConfig()
    rng = np.random.default_rng(payload_seed)
    symbols = _ofdm(_ssb_spectra(nid2, rng, cfg), cfg.cp_samples)
    return IqWaveform(symbols.reshape(-1), cfg.sample_rate_hz, tuple(_ssb_annotations(0, cfg)))


def build_downlink_frame(
    nid2: int,
    duration_s: float,
    cfg: NumerologyConfig | None = None,
    payload_seed: int = 0,
) -> IqWaveform:
    """A gapless downlink frame with one SSB per SSB period.

    Each period holds ``period_samples // symbol_samples`` symbols; the
    leftover samples lengthen the first symbol's cyclic prefix (as the long
    CP every half-subframe does in NR). The SSB starts at the same
    seed-chosen symbol slot in every period, so PSS centres are exactly
    periodic. Every other symbol is QPSK data.
    """
    cfg = cfg or NumerologyConfig()
    if nid2 not in (0, 1, 2):
        raise ValueError(f"nid2 must be 0, 1 or 2, got {nid2!r}")
    n_periods = int(np.floor(duration_s / cfg.ssb_period_s + 1e-9))
    if n_periods < 1:
        raise ValueError(f"duration {duration_s} s is shorter than one SSB period")

    L, P = cfg.symbol_samples, cfg.period_samples
    per_period = P // L
    if per_period < 8:
        raise ValueError("SSB period too short for this numerology")
    extra_cp = P - per_period * L
    if extra_cp + cfg.cp_samples > cfg.fft_size:
        raise ValueError("SSB period leaves a cyclic prefix longer than the FFT")
    rng = np.random.default_rng(payload_seed)
    ssb_slot = int(rng.integers(2, per_period - 5))
    ssb_offset = extra_cp + ssb_slot * L

    n_data = per_period - 4
    data = _data_spectra(rng, n_data * n_periods, cfg)
    data_iq = _ofdm(data, cfg.cp_samples).reshape(n_periods, n_data, L)

    out = np.empty(n_periods * P, dtype=complex)
    annotations: list[Annotation] = []
    for p in range(n_periods):
        ssb = _ofdm(_ssb_spectra(nid2, rng, cfg), cfg.cp_samples).reshape(-1)
        period = np.empty(P, dtype=complex)
        # first symbol of the period carries the long cyclic prefix
        first = data_iq[p, 0]
        body = first[cfg.cp_samples:]
        period[:extra_cp + L] = np.concatenate([body[cfg.fft_size - cfg.cp_samples - extra_cp:], body])
        rest = data_iq[p, 1:].reshape(-1)
        before = ssb_offset - (extra_cp + L)
        period[extra_cp + L:ssb_offset] = rest[:before]
        period[ssb_offset:ssb_offset + 4 * L] = ssb
        period[ssb_offset + 4 * L:] = rest[before:]
        out[p * P:(p + 1) * P] = period
        annotations += _ssb_annotations(p * P + ssb_offset, cfg)
    return IqWaveform(out, cfg.sample_rate_hz, tuple(annotations))
