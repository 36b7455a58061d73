"""Envelope-domain PSS synchronisation for passive 5G backscatter tags."""

from .detectors import (
    SyncParams,
    SyncResult,
    baseline_one_template,
    baseline_rising_edge,
    cross_correlate,
    make_bit_templates,
    make_templates,
    nft_detect,
    quantized_detect,
    sa_detect,
    sd_detect,
    sd_metric,
    sd_plus_detect,
    sst_detect,
    symmetric_autocorr,
)
from .frontend import (
    ChannelConfig,
    FixedThreshold,
    SlidingMean,
    apply_channel,
    extract_envelope,
    quantize_adc,
    quantize_comparator,
)
from .resources import CostTable, computational_load, count_resources, quantized_resources, resource_grid
from .waveform import NumerologyConfig, build_downlink_frame, build_ssb, generate_pss_sequence, pss_time_domain

__version__ = "0.1.0"
