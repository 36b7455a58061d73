import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sdsync.detectors import SyncParams, sd_detect
from sdsync.frontend import (
    BitStream,
    ChannelConfig,
    Envelope,
    FixedThreshold,
    SlidingMean,
    apply_channel,
    centered_moving_average,
    extract_envelope,
    quantize_adc,
    quantize_comparator,
)
from sdsync.waveform import (
    IqWaveform,
    NumerologyConfig,
    build_downlink_frame,
    generate_pss_sequence,
    pss_time_domain,
)

CFG = NumerologyConfig()


@pytest.fixture(scope="module")
def frame():
    return build_downlink_frame(1, 10e-3, CFG, 21)


def test_identity_channel_is_bit_exact(frame):
    out = apply_channel(frame, ChannelConfig())
    assert np.array_equal(out.samples, frame.samples)
    assert out.samples is not frame.samples


def test_cfo_phase_advance_per_sample():
    cfg = NumerologyConfig(fft_size=256)
    wave = IqWaveform(np.ones(1000, dtype=complex), cfg.sample_rate_hz)
    out = apply_channel(wave, ChannelConfig(epsilon=0.2, scs_hz=cfg.scs_hz))
    step = np.angle(out.samples[1:] * np.conj(out.samples[:-1]))
    assert np.allclose(step, 2 * np.pi * 0.2 / 256, atol=1e-12)


def test_epsilon_and_cfo_hz_are_linked():
    assert ChannelConfig(epsilon=0.2).cfo_hz == pytest.approx(6e3)
    assert ChannelConfig(cfo_hz=9e3).epsilon == pytest.approx(0.3)
    with pytest.raises(ValueError):
        ChannelConfig(epsilon=0.1, cfo_hz=6e3)


def test_measured_snr_over_a_million_samples():
    wave = build_downlink_frame(0, 70e-3, CFG, 2)
    assert len(wave) >= 1_000_000
    out = apply_channel(wave, ChannelConfig(snr_db=15.0, rng_seed=5))
    noise = out.samples - wave.samples
    measured = 10 * np.log10(np.mean(np.abs(wave.samples) ** 2) / np.mean(np.abs(noise) ** 2))
    assert abs(measured - 15.0) <= 0.3


def test_channel_is_seeded(frame):
    a = apply_channel(frame, ChannelConfig(snr_db=10.0, epsilon=0.1, rng_seed=3))
    b = apply_channel(frame, ChannelConfig(snr_db=10.0, epsilon=0.1, rng_seed=3))
    c = apply_channel(frame, ChannelConfig(snr_db=10.0, epsilon=0.1, rng_seed=4))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, c.samples)


def test_constant_modulus_gives_constant_envelope():
    phase = np.random.default_rng(0).uniform(0, 2 * np.pi, 5000)
    wave = IqWaveform(0.7 * np.exp(1j * phase), 15.36e6)
    env = extract_envelope(wave, 5e6)
    assert np.allclose(env.samples, 0.7, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(-0.5, 0.5), rate=st.sampled_from([1e6, 3.84e6, 5e6, 7.68e6]))
def test_envelope_ignores_cfo(frame, eps, rate):
    rotated = apply_channel(frame, ChannelConfig(epsilon=eps))
    a = extract_envelope(frame, rate).samples
    b = extract_envelope(rotated, rate).samples
    assert np.max(np.abs(a - b)) < 1e-12


def test_rho_167_at_5mhz_from_61_44mhz():
    cfg = NumerologyConfig(fft_size=2048)
    assert cfg.sample_rate_hz == pytest.approx(61.44e6)
    wave = build_downlink_frame(0, 5e-3, cfg, 0)
    env = extract_envelope(wave, 5e6)
    assert SyncParams.for_rate(5e6).rho == 167
    assert round(cfg.symbol_duration_s * env.sample_rate_hz) == 167
    assert len(env) == pytest.approx(len(wave) * 5e6 / cfg.sample_rate_hz, abs=1)
    assert env.true_pss_centers[0] == pytest.approx(wave.pss_centers[0] * 5e6 / cfg.sample_rate_hz)


def test_tag_rate_above_waveform_rate_is_rejected(frame):
    with pytest.raises(ValueError):
        extract_envelope(frame, 2 * frame.sample_rate_hz)


def test_moving_average_preserves_mirror_symmetry():
    x = np.random.default_rng(1).random(51)
    x = np.concatenate([x, x[-2::-1]])
    y = centered_moving_average(x, 7)
    assert np.allclose(y, y[::-1])


def test_adc_half_lsb_bound():
    env = Envelope(np.random.default_rng(2).random(10_000) * 3.0, 5e6)
    q = quantize_adc(env, 12)
    assert np.max(np.abs(q.samples - env.samples)) <= env.samples.max() / 2 ** 13 + 1e-15
    assert np.all(q.samples >= 0)
    assert len(np.unique(q.samples)) <= 2 ** 12


def test_adc_constant_envelope():
    q = quantize_adc(Envelope(np.full(100, 0.4), 5e6), 12)
    assert np.ptp(q.samples) == 0


@pytest.mark.parametrize("bits", [0, 17])
def test_adc_bit_depth_range(bits):
    with pytest.raises(ValueError):
        quantize_adc(Envelope(np.ones(4), 5e6), bits)


def test_adc_empty_envelope_is_rejected():
    with pytest.raises(ValueError):
        quantize_adc(Envelope(np.zeros(0), 5e6))


@pytest.mark.slow
def test_adc_does_not_move_sd_error():
    """Median SD error with a 12-bit ADC stays within 0.5 us of the unquantised one."""
    rate = 5e6
    params = SyncParams.for_rate(rate)
    raw, adc = [], []
    for t in range(1000):
        wave = build_downlink_frame(t % 3, 5e-3, CFG, 50_000 + t)
        wave = apply_channel(wave, ChannelConfig(snr_db=15.0, rng_seed=t))
        env = extract_envelope(wave, rate)
        raw.extend(sd_detect(env, params).errors_us)
        adc.extend(sd_detect(quantize_adc(env, 12), params).errors_us)
    assert abs(np.median(adc) - np.median(raw)) <= 0.5


def test_fixed_zero_threshold_gives_all_ones():
    env = Envelope(np.random.default_rng(3).random(100) + 0.01, 5e6)
    bits = quantize_comparator(env, FixedThreshold(0.0))
    assert bits.bits.all()
    assert np.array_equal(bits.threshold_trace, np.zeros(100))


def test_sliding_mean_bits_mirror_symmetric_on_pss():
    rate = 3.84e6  # four waveform samples per tag sample, so the PSS centre is on the grid
    body = pss_time_domain(generate_pss_sequence(1), CFG).samples[CFG.cp_samples:]
    env = extract_envelope(IqWaveform(np.tile(body, 3), CFG.sample_rate_hz), rate)
    rho = SyncParams.for_rate(rate).rho
    bits = quantize_comparator(env, SlidingMean(rho)).bits
    c = int(1.5 * CFG.fft_size * rate / CFG.sample_rate_hz)
    n = np.arange(1, rho // 2 + 1)
    assert np.sum(bits[c + n] != bits[c - n]) <= 2


def test_sliding_mean_ones_fraction_on_frame():
    wave = build_downlink_frame(0, 50e-3, CFG, 8)
    env = extract_envelope(wave, 5e6)
    bits = quantize_comparator(env, SlidingMean(SyncParams.for_rate(5e6).rho))
    assert 0.3 <= bits.bits.mean() <= 0.7
    assert len(bits) == len(env) == len(bits.threshold_trace)


@pytest.mark.parametrize("policy", ["mean", None, 0.5])
def test_invalid_comparator_policy(policy):
    with pytest.raises(ValueError):
        quantize_comparator(Envelope(np.ones(10), 5e6), policy)


@pytest.mark.parametrize("window", [0, -3])
def test_sliding_mean_rejects_bad_window(window):
    with pytest.raises(ValueError):
        SlidingMean(window)


def test_bitstream_length_invariant():
    with pytest.raises(ValueError):
        BitStream(np.ones(5, np.uint8), 1e6, np.zeros(4))


@settings(max_examples=25, deadline=None)
@given(snr=st.floats(-10, 30), seed=st.integers(0, 2 ** 32 - 1))
def test_front_end_never_goes_negative(snr, seed):
    wave = build_downlink_frame(0, 5e-3, CFG, seed % 1000)
    env = extract_envelope(apply_channel(wave, ChannelConfig(snr_db=snr, rng_seed=seed)), 3.84e6)
    assert env.samples.min() >= 0
    assert quantize_adc(env).samples.min() >= 0
