import pytest
from hypothesis import given, strategies as st

from sdsync.resources import (
    PRINTED_COUNTS,
    CostTable,
    computational_load,
    count_resources,
    ops_per_window,
    quantized_resources,
    rho_for_rate,
    resource_grid,
)


@pytest.mark.parametrize("method, rho, mult, add, ff", [
    ("NFT", 36, 327, 531, 162_387),
    ("SST", 36, 165, 261, 81_765),
    ("SA", 36, 55, 87, 27_255),
    ("SD", 36, 0, 35, 875),
    ("SD", 128, 0, 127, 3_175),
    ("SST", 128, 579, 951, 287_799),
    ("NFT", 256, 2_307, 3_831, 1_147_767),
])
def test_golden_resource_counts(method, rho, mult, add, ff):
    r = count_resources(method, rho)
    assert (r.multipliers, r.adders, r.d_flip_flops) == (mult, add, ff)


@given(rho=st.integers(2, 2000).map(lambda k: 2 * k), method=st.sampled_from(["NFT", "SST", "SA", "SD", "SD+"]))
def test_flip_flop_identity(rho, method):
    r = count_resources(method, rho)
    assert r.d_flip_flops == 456 * r.multipliers + 25 * r.adders
    assert r.fits_budget == (r.d_flip_flops <= 6_144)


@given(rho=st.integers(2, 2000).map(lambda k: 2 * k))
def test_cost_ordering(rho):
    ff = [count_resources(m, rho).d_flip_flops for m in ("SD", "SA", "SST", "NFT")]
    assert ff == sorted(ff) and len(set(ff)) == 4


def test_sa_is_one_third_of_sst():
    sa, sst = count_resources("SA", 128), count_resources("SST", 128)
    assert 3 * sa.multipliers == sst.multipliers and 3 * sa.adders == sst.adders


def test_custom_cost_table():
    r = count_resources("NFT", 36, CostTable(1, 1, 10))
    assert r.d_flip_flops == 327 + 531 and not r.fits_budget
    with pytest.raises(ValueError):
        CostTable(0, 25, 6144)


@pytest.mark.parametrize("method, rho", [("XYZ", 36), ("SA", 35), ("SST", 0), ("SD", 1)])
def test_resource_argument_errors(method, rho):
    with pytest.raises(ValueError):
        count_resources(method, rho)


def test_odd_rho_allowed_where_formula_is_defined():
    assert count_resources("SD", 167).adders == 166
    assert count_resources("NFT", 167).multipliers == 3 * (3 * 167 + 1)


def test_printed_grid_and_errata():
    rows = {(r.method, r.rate_hz): r for r in resource_grid()}
    assert len(rows) == 12
    assert {r.report.rho for r in rows.values()} == {64, 128, 256}
    flagged = {k for k, r in rows.items() if r.erratum}
    assert flagged == {("NFT", 1.92e6), ("NFT", 3.84e6)}
    assert rows[("NFT", 1.92e6)].report.d_flip_flops == 287_799
    assert rows[("NFT", 3.84e6)].report.d_flip_flops == 574_455
    for key, row in rows.items():
        assert row.matches_printed == (key not in flagged)
        assert row.printed == PRINTED_COUNTS[key]
    d = rows[("SD", 7.68e6)].as_dict()
    assert d["matches_printed"] is True and d["printed_d_flip_flops"] == 6_375


def test_rho_rule():
    assert [rho_for_rate(r) for r in (1.92e6, 3.84e6, 7.68e6, 5e6, 1e6)] == [64, 128, 256, 167, 33]


@pytest.mark.parametrize("method, ff, fits", [("SD_Q", 853, True), ("SA_Q", 855, True), ("SST_Q", 2_900, True),
                                              ("NFT_Q", 7_208, False)])
def test_quantized_calibration_at_5mhz(method, ff, fits):
    r = quantized_resources(method, 167)
    assert r.d_flip_flops == ff and r.multipliers == 0 and r.fits_budget == fits


def test_quantized_ratios():
    ff = {m: quantized_resources(m, 167).d_flip_flops for m in ("SD_Q", "SST_Q", "NFT_Q")}
    assert ff["NFT_Q"] / ff["SD_Q"] == pytest.approx(8.5, abs=0.05)
    assert ff["SST_Q"] / ff["SD_Q"] == pytest.approx(3.4, abs=0.05)


@given(rho=st.integers(4, 2000))
def test_quantized_scales_linearly(rho):
    a = quantized_resources("SD_Q", rho).d_flip_flops
    b = quantized_resources("SD_Q", 2 * rho).d_flip_flops
    assert abs(b - 2 * a) <= 1


def test_quantized_argument_errors():
    with pytest.raises(ValueError):
        quantized_resources("SD", 167)
    with pytest.raises(ValueError):
        quantized_resources("SD_Q", 2)


def test_load_golden_values():
    assert computational_load("SD", 250_000, 167).total_ops == 41_500_000
    sd = computational_load("SD", 97_000, 64)
    sdp = computational_load("SD+", 97_000, 64, 1_000)
    assert sdp.total_ops == 63_000 and sdp.windows_executed == 1_000
    assert sd.total_ops / sdp.total_ops == 97


def test_nft_to_sd_load_ratio_at_1_92mhz():
    n = 96_000
    ratio = computational_load("NFT", n, 64).total_ops / computational_load("SD", n, 64).total_ops
    assert ratio == pytest.approx(27, abs=0.5)


def test_per_window_formulas():
    assert ops_per_window("NFT", 36) == 3 * (9 * 36 - 1)
    assert ops_per_window("SA", 36) == 9 * 18 - 1
    assert ops_per_window("SST", 36) == (9 * 18 - 1) + 3 * (9 * 18 - 1)
    assert ops_per_window("SD", 36) == 35


@given(n=st.integers(1, 10 ** 6), rho=st.integers(4, 300))
def test_sd_load_is_n_rho_minus_one(n, rho):
    assert computational_load("SD", n, rho).total_ops == n * (rho - 1)


@pytest.mark.parametrize("args", [("SD", 0, 64), ("SD", 10, 0), ("SD+", 10, 64), ("NOPE", 10, 64)])
def test_load_argument_errors(args):
    with pytest.raises(ValueError):
        computational_load(*args)
