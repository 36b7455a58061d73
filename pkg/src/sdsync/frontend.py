"""Channel impairments and the tag's analog front end.

gNodeB IQ -> CFO + AWGN -> passive envelope detector -> tag-rate sampling
-> 12-bit ADC or 1-bit comparator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .waveform import IqWaveform


@dataclass(frozen=True)
class ChannelConfig:
    """AWGN + carrier frequency offset.

    Give either ``epsilon`` (CFO normalised to the subcarrier spacing) or
    ``cfo_hz``; the other is derived. ``snr_db=inf`` disables noise.
    """

    snr_db: float = np.inf
    epsilon: float | None = None
    cfo_hz: float | None = None
    scs_hz: float = 30e3
    rng_seed: int = 0

    def __post_init__(self):
        if self.epsilon is not None and self.cfo_hz is not None:
            if not np.isclose(self.epsilon * self.scs_hz, self.cfo_hz):
                raise ValueError("epsilon and cfo_hz disagree; give only one")
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", (self.cfo_hz or 0.0) / self.scs_hz)
        if self.cfo_hz is None:
            object.__setattr__(self, "cfo_hz", self.epsilon * self.scs_hz)


@dataclass(frozen=True)
class Envelope:
    samples: np.ndarray
    sample_rate_hz: float
    true_pss_centers: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if len(self.samples) and np.min(self.samples) < 0:
            raise ValueError("envelope samples must be non-negative")

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class BitStream:
    bits: np.ndarray
    sample_rate_hz: float
    threshold_trace: np.ndarray
    true_pss_centers: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        if len(self.bits) != len(self.threshold_trace):
            raise ValueError("threshold_trace must match the bit count")

    def __len__(self) -> int:
        return len(self.bits)


def apply_channel(wave: IqWaveform, cfg: ChannelConfig) -> IqWaveform:
    """Rotate by the CFO and add complex white Gaussian noise.

    Noise power is set from the mean power of ``wave`` so that the
    signal-to-noise ratio equals ``cfg.snr_db``.
    """
    x = wave.samples
    if cfg.cfo_hz:
        n = np.arange(len(x))
        x = x * np.exp(2j * np.pi * cfg.cfo_hz / wave.sample_rate_hz * n)
    if np.isfinite(cfg.snr_db):
        rng = np.random.default_rng(cfg.rng_seed)
        p_noise = np.mean(np.abs(wave.samples) ** 2) / 10 ** (cfg.snr_db / 10)
        noise = rng.standard_normal((2, len(x)))
        x = x + np.sqrt(p_noise / 2) * (noise[0] + 1j * noise[1])
    elif x is wave.samples:
        x = x.copy()
    return replace(wave, samples=x)


def centered_moving_average(x: np.ndarray, width: int) -> np.ndarray:
    """Symmetric boxcar average; edges average over the samples available.

    A symmetric kernel keeps any mirror symmetry of ``x`` about the same
    centre.
    """
    if width <= 1:
        return np.asarray(x, dtype=float).copy()
    half = width // 2
    c = np.concatenate([[0.0], np.cumsum(x, dtype=float)])
    idx = np.arange(len(x))
    lo = np.clip(idx - half, 0, len(x))
    hi = np.clip(idx + half + 1, 0, len(x))
    return (c[hi] - c[lo]) / (hi - lo)


def extract_envelope(wave: IqWaveform, tag_rate_hz: float, smooth_len: int = 3) -> Envelope:
    """Passive envelope detection and tag-rate sampling.

    ``smooth_len`` is the detector's averaging span in tag samples; it is
    applied at the waveform rate before linear-interpolation resampling.
    """
    fs = wave.sample_rate_hz
    if tag_rate_hz <= 0 or tag_rate_hz > fs * (1 + 1e-12):
        raise ValueError(f"tag rate {tag_rate_hz} Hz must be in (0, {fs}] Hz")
    mag = np.abs(wave.samples)
    span = int(round(smooth_len * fs / tag_rate_hz))
    if span % 2 == 0:
        span += 1
    mag = centered_moving_average(mag, span) if smooth_len > 0 else mag
    ratio = fs / tag_rate_hz
    n_out = int(np.floor((len(mag) - 1) / ratio + 1e-9)) + 1
    t = np.arange(n_out) * ratio
    env = np.interp(t, np.arange(len(mag)), mag)
    return Envelope(env, tag_rate_hz, wave.pss_centers / ratio)


def quantize_adc(env: Envelope, bits: int = 12) -> Envelope:
    """Mid-rise uniform quantiser with 2**bits levels over [0, max(env)]."""
    if len(env) == 0:
        raise ValueError("cannot quantise an empty envelope")
    if not 1 <= bits <= 16:
        raise ValueError(f"bits must be in [1, 16], got {bits}")
    peak = float(np.max(env.samples))
    if peak == 0:
        return replace(env, samples=env.samples.copy())
    levels = 2 ** bits
    step = peak / levels
    code = np.minimum(np.floor(env.samples / step), levels - 1)
    return replace(env, samples=(code + 0.5) * step)


@dataclass(frozen=True)
class FixedThreshold:
    value: float


@dataclass(frozen=True)
class SlidingMean:
    """Threshold = centred running mean over ``window`` samples."""

    window: int

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("sliding-mean window must be >= 1")


def comparator_threshold(samples: np.ndarray, policy) -> np.ndarray:
    if isinstance(policy, FixedThreshold):
        return np.full(len(samples), float(policy.value))
    if isinstance(policy, SlidingMean):
        return centered_moving_average(samples, policy.window)
    raise ValueError(f"unknown comparator policy {policy!r}")


def quantize_comparator(env: Envelope, policy: FixedThreshold | SlidingMean) -> BitStream:
    thr = comparator_threshold(env.samples, policy)
    bits = (env.samples >= thr).astype(np.uint8)
    return BitStream(bits, env.sample_rate_hz, thr, env.true_pss_centers)
