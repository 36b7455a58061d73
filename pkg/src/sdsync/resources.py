"""Closed-form hardware cost and operation counts for each detector.

Costs are in D flip-flops of a small flash FPGA: a 12x12 multiplier and a
12-bit adder are charged fixed flip-flop counts, and the datapath of each
detector is counted in multipliers and adders as a function of the window
length rho.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

SCS_HZ = 30e3
GRID_RATES_HZ = (1.92e6, 3.84e6, 7.68e6)
QUANTIZED_RHO_REF = 167

# Printed grid as published: (method, rate_hz) -> (multipliers, adders, flip-flops).
PRINTED_COUNTS = {
    ("NFT", 1.92e6): (579, 951, 277_299),
    ("NFT", 3.84e6): (1_155, 1_911, 274_455),
    ("NFT", 7.68e6): (2_307, 3_831, 1_147_767),
    ("SST", 1.92e6): (291, 471, 144_471),
    ("SST", 3.84e6): (579, 951, 287_799),
    ("SST", 7.68e6): (1_155, 1_911, 574_455),
    ("SA", 1.92e6): (97, 157, 48_157),
    ("SA", 3.84e6): (193, 317, 95_933),
    ("SA", 7.68e6): (385, 637, 191_485),
    ("SD", 1.92e6): (0, 63, 1_575),
    ("SD", 3.84e6): (0, 127, 3_175),
    ("SD", 7.68e6): (0, 255, 6_375),
}

# Published flip-flop totals of the one-bit datapaths at rho = 167 (5 MHz).
QUANTIZED_FF_AT_REF = {"SD_Q": 853, "SA_Q": 855, "SST_Q": 2_900, "NFT_Q": 7_208}


@dataclass(frozen=True)
class CostTable:
    ff_per_multiplier: int = 456
    ff_per_adder: int = 25
    budget_ff: int = 6_144

    def __post_init__(self):
        if min(self.ff_per_multiplier, self.ff_per_adder, self.budget_ff) <= 0:
            raise ValueError("cost table entries must be positive")


@dataclass(frozen=True)
class ResourceReport:
    method: str
    rho: int
    multipliers: int
    adders: int
    d_flip_flops: int
    fits_budget: bool


@dataclass(frozen=True)
class LoadReport:
    method: str
    n_samples: int
    rho: int
    windows_executed: int
    total_ops: int


@dataclass(frozen=True)
class GridRow:
    method: str
    rate_hz: float
    report: ResourceReport
    printed: tuple[int, int, int] | None

    @property
    def matches_printed(self) -> bool:
        r = self.report
        return self.printed == (r.multipliers, r.adders, r.d_flip_flops)

    @property
    def erratum(self) -> bool:
        """Printed multipliers and adders agree but the flip-flop total does not."""
        if self.printed is None:
            return False
        m, a, ff = self.printed
        r = self.report
        return (m, a) == (r.multipliers, r.adders) and ff != r.d_flip_flops

    def as_dict(self) -> dict:
        d = {"method": self.method, "rate_hz": self.rate_hz, **asdict(self.report)}
        m, a, ff = self.printed or (None, None, None)
        d.update(printed_multipliers=m, printed_adders=a, printed_d_flip_flops=ff,
                 matches_printed=self.matches_printed, erratum=self.erratum)
        return d


def _even(rho: int, method: str) -> None:
    if rho < 2 or rho % 2:
        raise ValueError(f"{method} cost formula needs an even rho >= 2, got {rho}")


def datapath(method: str, rho: int) -> tuple[int, int]:
    """(multipliers, adders) of an unquantised detector with window rho.

    The three-template correlator charges 3(3L+1) multipliers and 3(5L-3)
    adders for a length-L template; SST runs it on half templates and the
    symmetric autocorrelation costs one third of that.
    """
    method = "SD" if method == "SD+" else method
    if method == "NFT":
        if rho < 2:
            raise ValueError("rho must be >= 2")
        return 3 * (3 * rho + 1), 3 * (5 * rho - 3)
    if method == "SST":
        _even(rho, method)
        return 3 * (3 * rho // 2 + 1), 3 * (5 * rho // 2 - 3)
    if method == "SA":
        _even(rho, method)
        return 3 * rho // 2 + 1, 5 * rho // 2 - 3
    if method == "SD":
        if rho < 2:
            raise ValueError("rho must be >= 2")
        return 0, rho - 1
    raise ValueError(f"unknown method {method!r}")


def count_resources(method: str, rho: int, table: CostTable | None = None) -> ResourceReport:
    table = table or CostTable()
    mult, add = datapath(method, rho)
    ff = mult * table.ff_per_multiplier + add * table.ff_per_adder
    return ResourceReport(method, rho, mult, add, ff, ff <= table.budget_ff)


def rho_for_rate(rate_hz: float, scs_hz: float = SCS_HZ) -> int:
    return int(round(rate_hz / scs_hz))


def resource_grid(rates_hz=GRID_RATES_HZ, table: CostTable | None = None) -> list[GridRow]:
    """Method x rate grid, each cell paired with the printed value if one exists."""
    rows = []
    for method in ("NFT", "SST", "SA", "SD"):
        for rate in rates_hz:
            rep = count_resources(method, rho_for_rate(rate), table)
            rows.append(GridRow(method, float(rate), rep, PRINTED_COUNTS.get((method, float(rate)))))
    return rows


def _quantized_adders(method: str, rho: int) -> int:
    h = rho // 2
    if method in ("SD_Q", "SA_Q"):
        return h - 1  # popcount of h XOR/XNOR outputs
    if method == "SST_Q":
        return (h - 1) + 3 * (h - 1)  # symmetry popcount + three half-template popcounts
    if method == "NFT_Q":
        return 3 * (rho - 1)
    raise ValueError(f"unknown quantized method {method!r}")


def quantized_resources(method: str, rho: int, table: CostTable | None = None) -> ResourceReport:
    """One-bit datapath: no multipliers, flip-flops linear in rho.

    Flip-flop totals scale the published rho = 167 values in proportion to
    the window, since every stage of a one-bit datapath (shift register,
    XOR bank, popcount) grows linearly with it. Adder counts are the
    popcount trees and are reported for information only.
    """
    table = table or CostTable()
    if method not in QUANTIZED_FF_AT_REF:
        raise ValueError(f"unknown quantized method {method!r}")
    if rho < 4:
        raise ValueError("rho must be >= 4")
    ff = int(round(QUANTIZED_FF_AT_REF[method] * rho / QUANTIZED_RHO_REF))
    return ResourceReport(method, rho, 0, _quantized_adders(method, rho), ff, ff <= table.budget_ff)


def ops_per_window(method: str, rho: int) -> int:
    """Arithmetic operations for one window position."""
    if method == "NFT":
        return 3 * (9 * rho - 1)
    if method == "SA":
        return 9 * (rho // 2) - 1
    if method == "SST":
        # symmetry stage plus three half-template correlations
        return ops_per_window("SA", rho) + 3 * (9 * (rho // 2) - 1)
    if method in ("SD", "SD+"):
        return rho - 1
    if method in ("SD_Q", "SA_Q"):
        return rho // 2
    if method == "SST_Q":
        return rho // 2 + 3 * (rho // 2)
    if method == "NFT_Q":
        return 3 * rho
    raise ValueError(f"unknown method {method!r}")


def computational_load(
    method: str, n_samples: int, rho: int, first_detect_windows: int | None = None
) -> LoadReport:
    """Total operations over a capture of ``n_samples``.

    Full-scan detectors evaluate one window per sample. SD+ evaluates only
    ``first_detect_windows`` windows (those needed to find the first PSS).
    """
    if n_samples <= 0 or rho <= 0:
        raise ValueError("n_samples and rho must be positive")
    if method == "SD+":
        if first_detect_windows is None or first_detect_windows <= 0:
            raise ValueError("SD+ needs a positive first_detect_windows")
        windows = min(first_detect_windows, n_samples)
    else:
        windows = n_samples
    return LoadReport(method, n_samples, rho, windows, windows * ops_per_window(method, rho))
