"""Shared fixtures: Monte-Carlo sweeps reused by several test modules, and the
per-criterion pass/fail lines printed at the end of the session."""

from __future__ import annotations

import numpy as np
import pytest

from sdsync.harness import ExperimentConfig, run_scenario

_CRITERIA: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number and title")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n, title = mark.args
    detail = getattr(item, "criterion_detail", "")
    _CRITERIA[n] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[n]
        line = f"criterion {n:>2} {status}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the criterion report."""

    def _set(text: str) -> None:
        request.node.criterion_detail = text

    return _set


def pooled(cfg: ExperimentConfig) -> dict[tuple[str, float, int], np.ndarray]:
    """Per-attempt errors keyed by (method, rate, nid2); trial t uses nid2 = nid2_values[t % k]."""
    out: dict[tuple[str, float, int], list[float]] = {}
    k = len(cfg.nid2_values)
    for snr in cfg.snr_db_values:
        for t in range(cfg.trials_per_point):
            nid2 = cfg.nid2_values[t % k]
            for rec in run_scenario(cfg, nid2, snr, cfg.cfo_values[0], t):
                out.setdefault((rec.method, rec.rate_hz, nid2), []).extend(rec.errors_us)
    return {key: np.array(v) for key, v in out.items()}


def merge(errs: dict, method: str, rate: float) -> np.ndarray:
    return np.concatenate([v for (m, r, _), v in errs.items() if m == method and r == rate])


@pytest.fixture(scope="session")
def operating_point():
    """1,000 trials at 15 dB, nid2 cycling 0, 1, 2, one 5 ms frame each.

    Every method sees the same noisy frames at both rates.
    """
    cfg = ExperimentConfig(
        methods=("SD_Q", "NFT_Q", "SST_Q", "SA_Q", "one-template", "rising-edge", "NFT", "SD"),
        tag_rates_hz=(1e6, 5e6), snr_db_values=(15.0,), trials_per_point=1000,
        frame_duration_s=5e-3, rng_seed=20_240_101,
    )
    return pooled(cfg)


@pytest.fixture(scope="session")
def rate_sweep():
    """Median error vs tag rate at 15 dB, 150 trials per rate."""
    cfg = ExperimentConfig(
        methods=("NFT", "SST", "SA", "SD", "SD+", "SD_Q", "NFT_Q", "SST_Q", "SA_Q"),
        tag_rates_hz=(1e6, 1.92e6, 3.84e6, 5e6, 7.68e6), snr_db_values=(15.0,),
        trials_per_point=150, frame_duration_s=5e-3, rng_seed=7,
    )
    return cfg, pooled(cfg)


@pytest.fixture(scope="session")
def low_snr():
    """300 trials at -5 dB, 7.68 MHz."""
    cfg = ExperimentConfig(
        methods=("NFT", "SST", "SA", "SD"), tag_rates_hz=(7.68e6,), snr_db_values=(-5.0,),
        trials_per_point=300, frame_duration_s=5e-3, rng_seed=11,
    )
    return pooled(cfg)
