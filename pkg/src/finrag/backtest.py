"""Monthly rolling long-only backtest and the metric suite.

The strategy holds each month's chosen companies, weighted by market value,
through that month; the equity curve is the running *sum* of monthly simple
returns (additive accumulated return, starting from 0).  All derived metrics
stay consistent with that additive convention:

    ARR   = (AR_M / M) * 12          (arithmetic annualization)
    ANVOL = stdev(monthly returns) * sqrt(12)   (sample stdev)
    SR    = (ARR - rf) / ANVOL       (absent when ANVOL is 0)
    MD    = largest peak-to-trough decline of the AR curve, AR_0 = 0 included
    CR    = ARR / MD                 (absent when MD is 0)
    MDD   = longest drawdown episode, in months
    AERR  = ARR - ARR_benchmark

Annualization is arithmetic on purpose: the accumulated-return curve is a
sum of simple returns, so geometric compounding would be inconsistent with
it.  `annualize` is the single place to change if the alternative convention
is ever wanted.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import Company, PriceSeries
from .errors import CoverageError, InputError
from .months import validate_month
from .prediction import ChosenSet

CSV_VALUE_FORMAT = "%.10g"


@dataclass(frozen=True)
class Portfolio:
    """Holdings for one month; weights are nonnegative and sum to 1."""

    month: str
    holdings: dict[str, float]

    def __post_init__(self):
        validate_month(self.month)
        if self.holdings:
            total = math.fsum(self.holdings.values())
            if abs(total - 1.0) > 1e-12:
                raise InputError(f"portfolio weights sum to {total!r}, expected 1")
            if any(w < 0 for w in self.holdings.values()):
                raise InputError("portfolio weights must be nonnegative")


def cap_weights(companies: Sequence[Company]) -> dict[str, float]:
    """Capitalization weights w_i = v_i / sum(v).  An empty list yields an
    empty portfolio (the month is held in cash at zero return)."""
    if not companies:
        return {}
    ids = [c.id for c in companies]
    if len(set(ids)) != len(ids):
        raise InputError("duplicate company in weighting universe")
    total = math.fsum(c.market_value for c in companies)
    return {c.id: c.market_value / total for c in companies}


@dataclass(frozen=True)
class EquityCurve:
    """Accumulated-return curve: ar[i] is exactly the float accumulation
    ar[i-1] + monthly_returns[i], starting from 0."""

    months: tuple[str, ...]
    ar: tuple[float, ...]
    monthly_returns: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.months) == len(self.ar) == len(self.monthly_returns)):
            raise InputError("equity curve fields must have equal length")
        previous = None
        for month in self.months:
            validate_month(month)
            if previous is not None and month <= previous:
                raise InputError(f"curve months not strictly increasing at {month}")
            previous = month
        running = 0.0
        for i, r in enumerate(self.monthly_returns):
            running = running + r
            if self.ar[i] != running:
                raise InputError(
                    f"ar[{i}]={self.ar[i]!r} is not the additive accumulation "
                    f"{running!r}"
                )

    @classmethod
    def from_returns(cls, months: Sequence[str], returns: Sequence[float]) -> "EquityCurve":
        ar = []
        running = 0.0
        for r in returns:
            running = running + r
            ar.append(running)
        return cls(tuple(months), tuple(ar), tuple(float(r) for r in returns))

    def __len__(self) -> int:
        return len(self.months)


def run_strategy(
    chosen: Mapping[str, ChosenSet | Iterable[str]],
    universe: Mapping[str, Company],
    prices: Mapping[str, PriceSeries],
) -> EquityCurve:
    """Roll the chosen sets month by month into an accumulated-return curve.

    Each held company contributes its cap weight times its simple return
    close(m+1)/close(m) - 1; an empty chosen set holds cash at 0%.
    """
    months = sorted(chosen)
    returns = []
    for month in months:
        selection = chosen[month]
        members = sorted(
            selection.company_ids if isinstance(selection, ChosenSet) else selection
        )
        if not members:
            returns.append(0.0)
            continue
        missing = [c for c in members if c not in universe]
        if missing:
            raise InputError(f"no market value for companies {missing} in {month}")
        weights = cap_weights([universe[c] for c in members])
        contributions = []
        for company_id in members:
            if company_id not in prices:
                raise CoverageError(company_id, month)
            realized = prices[company_id].monthly_return(month)
            contributions.append(weights[company_id] * realized)
        returns.append(math.fsum(contributions))
    return EquityCurve.from_returns(months, returns)


# --- metrics ----------------------------------------------------------------


def annualize(accumulated: float, n_months: int) -> float:
    """Arithmetic annualization of an additive accumulated return."""
    return accumulated / n_months * 12.0


def sharpe_ratio(arr: float, anvol: float, rf: float = 0.0) -> float | None:
    """Risk-adjusted return; undefined (None) at zero volatility."""
    return (arr - rf) / anvol if anvol > 0 else None


def calmar_ratio(arr: float, md: float) -> float | None:
    """Return over max drawdown; undefined (None) at zero drawdown."""
    return arr / md if md > 0 else None


def excess_return(arr: float, benchmark_arr: float) -> float:
    return arr - benchmark_arr


def drawdown_stats(curve: EquityCurve) -> tuple[float, int]:
    """(max drawdown, longest drawdown episode in months) of the AR curve.

    The implicit starting point AR_0 = 0 counts as a peak candidate, and an
    episode that never recovers runs to the end of the curve.
    """
    peak = 0.0
    max_decline = 0.0
    longest = 0
    current = 0
    for value in curve.ar:
        if value >= peak:
            peak = value
            current = 0
        else:
            current += 1
            longest = max(longest, current)
            max_decline = max(max_decline, peak - value)
    return max_decline, longest


@dataclass(frozen=True)
class BacktestReport:
    """Equity curve plus the eight headline metrics.  sr and cr are None when
    undefined (zero volatility / zero drawdown); aerr and acc are None when
    no benchmark / no labels were supplied."""

    arr: float
    aerr: float | None
    anvol: float
    sr: float | None
    md: float
    cr: float | None
    mdd: int
    acc: float | None
    curve: EquityCurve
    rf: float = 0.0

    def metrics(self) -> dict:
        return {
            "arr": self.arr,
            "aerr": self.aerr,
            "anvol": self.anvol,
            "sr": self.sr,
            "md": self.md,
            "cr": self.cr,
            "mdd": self.mdd,
            "acc": self.acc,
        }


def compute_metrics(
    curve: EquityCurve,
    benchmark: EquityCurve | None = None,
    acc: float | None = None,
    rf: float = 0.0,
) -> BacktestReport:
    if len(curve) == 0:
        raise InputError("cannot compute metrics on an empty curve")
    if benchmark is not None and benchmark.months != curve.months:
        raise InputError("benchmark months do not align with the strategy curve")

    n = len(curve)
    arr = annualize(curve.ar[-1], n)
    anvol = statistics.stdev(curve.monthly_returns) * math.sqrt(12.0) if n >= 2 else 0.0
    sr = sharpe_ratio(arr, anvol, rf)
    md, mdd = drawdown_stats(curve)
    cr = calmar_ratio(arr, md)
    aerr = (
        excess_return(arr, annualize(benchmark.ar[-1], n))
        if benchmark is not None
        else None
    )
    return BacktestReport(
        arr=arr, aerr=aerr, anvol=anvol, sr=sr, md=md, cr=cr, mdd=mdd,
        acc=acc, curve=curve, rf=rf,
    )


# --- export -----------------------------------------------------------------


def export_equity_curve(curves: Mapping[str, EquityCurve], path: str | Path) -> Path:
    """Write curves as CSV: `month,<name>,...`, one row per month across the
    union axis, blanks where a curve has no value, 10 significant digits."""
    path = Path(path)
    names = list(curves)
    axis = sorted({m for curve in curves.values() for m in curve.months})
    lookup = {
        name: dict(zip(curve.months, curve.ar)) for name, curve in curves.items()
    }
    lines = [",".join(["month", *names])]
    for month in axis:
        row = [month]
        for name in names:
            value = lookup[name].get(month)
            row.append(CSV_VALUE_FORMAT % value if value is not None else "")
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def parse_equity_curve_csv(path: str | Path) -> dict[str, list[tuple[str, float]]]:
    """Parse an exported curve file back into per-strategy (month, AR) points."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise InputError(f"empty equity-curve file: {path}")
    header = lines[0].split(",")
    if header[0] != "month":
        raise InputError(f"equity-curve file missing month column: {path}")
    names = header[1:]
    out: dict[str, list[tuple[str, float]]] = {name: [] for name in names}
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        month = validate_month(cells[0])
        for name, cell in zip(names, cells[1:]):
            if cell != "":
                out[name].append((month, float(cell)))
    return out


def load_benchmark_curve(path: str | Path, name: str | None = None) -> EquityCurve:
    """Rebuild a benchmark curve from an exported CSV (first column unless
    named).  Monthly returns are recovered as AR differences."""
    parsed = parse_equity_curve_csv(path)
    if not parsed:
        raise InputError(f"no curves in benchmark file: {path}")
    if name is None:
        name = next(iter(parsed))
    if name not in parsed:
        raise InputError(f"no curve named {name!r} in benchmark file: {path}")
    points = parsed[name]
    months = [m for m, _ in points]
    returns = []
    previous = 0.0
    for _, value in points:
        returns.append(value - previous)
        previous = value
    return EquityCurve.from_returns(months, returns)


def report_to_json(report: BacktestReport, metadata: Mapping | None = None) -> dict:
    payload: dict = {
        "metrics": report.metrics(),
        "rf": report.rf,
        "window": {
            "start": report.curve.months[0],
            "end": report.curve.months[-1],
            "n_months": len(report.curve),
        },
        "curve": {
            "months": list(report.curve.months),
            "ar": list(report.curve.ar),
            "monthly_returns": list(report.curve.monthly_returns),
        },
    }
    if metadata:
        payload["metadata"] = dict(metadata)
    return payload
