"""Market metrics over verified generation and ledger events.

Derives the hourly liquidity comparison against a no-split baseline,
constant-product slippage, capacity factors, inflation prevention, exergy
accounting, and the per-city settlement report. Everything here is a pure
transformation over immutable inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .ledger import COST_DIVISOR, WEI_PER_TOKEN, LedgerEvent

MJ_PER_MWH = 3600.0
DEFAULT_EXERGY_QUALITY_FACTOR = 0.0273
DEFAULT_REFERENCE_TRADE_MW = 0.001864
DAYLIGHT_HOURS = range(6, 20)  # hours 6-19 inclusive


class AnalyticsError(ValueError):
    pass


@dataclass(frozen=True)
class AnalyticsConfig:
    """Calibration of the liquidity/slippage comparison.

    The pool floor values are the schema minima of the hourly market data;
    the voluntary fraction models how much verified supply reaches the pool
    without the forced split. The reference trade size fixes the slippage
    probe applied to both pools.
    """

    solarchain_floor_mw: float = 0.018
    baseline_floor_mw: float = 0.008
    forced_split_fraction: float = 0.75
    voluntary_fraction: float = 0.50
    reference_trade_mw: float = DEFAULT_REFERENCE_TRADE_MW
    exergy_quality_factor: float = DEFAULT_EXERGY_QUALITY_FACTOR

    def __post_init__(self) -> None:
        if self.solarchain_floor_mw < 0 or self.baseline_floor_mw < 0:
            raise AnalyticsError("liquidity floors must be nonnegative")
        if not 0.0 < self.forced_split_fraction <= 1.0:
            raise AnalyticsError("forced_split_fraction out of (0, 1]")
        if not 0.0 < self.voluntary_fraction < self.forced_split_fraction:
            raise AnalyticsError(
                "voluntary_fraction must be positive and below the forced split"
            )
        if self.reference_trade_mw <= 0:
            raise AnalyticsError("reference_trade_mw must be positive")
        if not 0.0 < self.exergy_quality_factor <= 1.0:
            raise AnalyticsError("exergy_quality_factor out of (0, 1]")


@dataclass(frozen=True)
class MarketHour:
    timestamp: str
    hour: int
    total_verified: float          # MW
    solarchain_liquidity: float    # MW
    baseline_liquidity: float      # MW
    slippage_solarchain: float     # percent
    slippage_baseline: float       # percent


@dataclass(frozen=True)
class TradeRecord:
    """Analytics view of one executed factory purchase."""

    trade_id: str
    timestamp: str
    hour: int
    factory_id: str
    city: str
    energy_units: int
    cost_wei: int
    exergy_mj: float

    @property
    def energy_mwh(self) -> float:
        return self.energy_units / 100_000_000  # units -> MWh (unit = 0.01 Wh)

    @property
    def tokens_burned(self) -> float:
        return self.cost_wei / WEI_PER_TOKEN


@dataclass(frozen=True)
class CityStats:
    city: str
    capacity_kw: float
    verified_kwh: float
    peak_kw: float
    capacity_factor_pct: float


def slippage(pool_depth: float, trade_size: float) -> float:
    """Price impact in percent of a constant-product swap against the pool.

    A probe against an empty pool consumes everything: reported as 100%.
    """
    if trade_size < 0:
        raise AnalyticsError(f"trade_size must be nonnegative: {trade_size}")
    if trade_size == 0.0:
        return 0.0
    if pool_depth <= 0.0:
        return 100.0
    return trade_size / (pool_depth + trade_size) * 100.0


def liquidity_series(
    hourly_verified: Sequence[float],
    config: AnalyticsConfig = AnalyticsConfig(),
    timestamps: Optional[Sequence[str]] = None,
) -> list[MarketHour]:
    """Hourly pool depth under the forced split and under the no-split baseline."""
    if any(v < 0 for v in hourly_verified):
        raise AnalyticsError("verified MW values must be nonnegative")
    if timestamps is not None and len(timestamps) != len(hourly_verified):
        raise AnalyticsError("timestamps length must match the series")

    hours = []
    for hour, verified in enumerate(hourly_verified):
        solarchain = config.solarchain_floor_mw + config.forced_split_fraction * verified
        baseline = config.baseline_floor_mw + config.voluntary_fraction * verified
        hours.append(
            MarketHour(
                timestamp=timestamps[hour] if timestamps is not None else str(hour),
                hour=hour,
                total_verified=verified,
                solarchain_liquidity=solarchain,
                baseline_liquidity=baseline,
                slippage_solarchain=slippage(solarchain, config.reference_trade_mw),
                slippage_baseline=slippage(baseline, config.reference_trade_mw),
            )
        )
    return hours


def liquidity_area(series: Iterable[float]) -> float:
    """Integrated pool depth in MW-hours under the hourly rectangle rule."""
    return sum(series)


def inflation_prevented(rejected_energy: float, verified_energy: float) -> float:
    """Rejected claims as a percentage of the verified energy they would inflate."""
    if verified_energy <= 0:
        raise AnalyticsError("verified_energy must be positive")
    return rejected_energy / verified_energy * 100.0


def capacity_factor(capacity_kw: float, verified_kwh: float, horizon_hours: float) -> float:
    """Delivered energy over nameplate potential, in percent."""
    if capacity_kw <= 0 or horizon_hours <= 0:
        raise AnalyticsError("capacity and horizon must be positive")
    return verified_kwh / (capacity_kw * horizon_hours) * 100.0


def exergy_of_trade(
    energy_mwh: float, quality_factor: float = DEFAULT_EXERGY_QUALITY_FACTOR
) -> float:
    """Useful-work content in MJ dissipated by a purchase of the given size."""
    if energy_mwh < 0:
        raise AnalyticsError("energy must be nonnegative")
    if not 0.0 < quality_factor <= 1.0:
        raise AnalyticsError("quality_factor out of (0, 1]")
    return energy_mwh * MJ_PER_MWH * quality_factor


def liquidity_uplift_pct(mean_solarchain: float, mean_baseline: float) -> float:
    """Relative gain of the forced-split pool over the baseline, in percent."""
    if mean_baseline <= 0:
        raise AnalyticsError("baseline mean must be positive")
    return (mean_solarchain / mean_baseline - 1.0) * 100.0


def market_summary(hours: Sequence[MarketHour]) -> dict:
    """Aggregate liquidity and slippage comparison over the market day."""
    if not hours:
        raise AnalyticsError("empty market series")
    s_liq = [h.solarchain_liquidity for h in hours]
    b_liq = [h.baseline_liquidity for h in hours]
    daylight = [h for h in hours if h.hour in DAYLIGHT_HOURS]
    return {
        "avg_liquidity_solarchain_mw": sum(s_liq) / len(s_liq),
        "avg_liquidity_baseline_mw": sum(b_liq) / len(b_liq),
        "peak_liquidity_solarchain_mw": max(s_liq),
        "peak_liquidity_baseline_mw": max(b_liq),
        "liquidity_area_solarchain_mwh": liquidity_area(s_liq),
        "liquidity_area_baseline_mwh": liquidity_area(b_liq),
        "avg_slippage_solarchain_pct": sum(h.slippage_solarchain for h in hours) / len(hours),
        "avg_slippage_baseline_pct": sum(h.slippage_baseline for h in hours) / len(hours),
        "daylight_slippage_solarchain_pct": (
            sum(h.slippage_solarchain for h in daylight) / len(daylight) if daylight else 0.0
        ),
        "daylight_slippage_baseline_pct": (
            sum(h.slippage_baseline for h in daylight) / len(daylight) if daylight else 0.0
        ),
        "liquidity_uplift_pct": liquidity_uplift_pct(
            sum(s_liq) / len(s_liq), sum(b_liq) / len(b_liq)
        ),
    }


def settlement_report(
    trades: Sequence[TradeRecord], ledger_events: Sequence[LedgerEvent]
) -> dict:
    """Per-city settlement aggregation, cross-checked against purchase events.

    The reconciliation flag is exact: the integer wei total of the trades must
    equal the wei burned through EnergyPurchased events.
    """
    cities: dict[str, dict] = {}
    for trade in trades:
        bucket = cities.setdefault(
            trade.city,
            {"trades": 0, "volume_mwh": 0.0, "solr_burned": 0.0, "exergy_mj": 0.0,
             "_cost_wei": 0, "_energy_units": 0},
        )
        bucket["trades"] += 1
        bucket["volume_mwh"] += trade.energy_mwh
        bucket["solr_burned"] += trade.tokens_burned
        bucket["exergy_mj"] += trade.exergy_mj
        bucket["_cost_wei"] += trade.cost_wei
        bucket["_energy_units"] += trade.energy_units

    total_cost_wei = sum(t.cost_wei for t in trades)
    purchase_events = [e for e in ledger_events if e.kind == "EnergyPurchased"]
    event_cost_wei = sum(e.payload["cost_wei"] for e in purchase_events)

    per_city = {
        city: {k: v for k, v in bucket.items() if not k.startswith("_")}
        for city, bucket in sorted(cities.items())
    }
    return {
        "cities": per_city,
        "totals": {
            "trades": len(trades),
            "volume_mwh": sum(t.energy_mwh for t in trades),
            "solr_burned": sum(t.tokens_burned for t in trades),
            "exergy_mj": sum(t.exergy_mj for t in trades),
            "cost_wei": total_cost_wei,
        },
        "event_cost_wei": event_cost_wei,
        "reconciled": total_cost_wei == event_cost_wei,
    }


def city_stats(
    city: str,
    capacity_kw: float,
    hourly_verified_kw: Sequence[float],
    horizon_hours: float = 24.0,
) -> CityStats:
    """Capacity, verified energy, peak, and capacity factor for one city."""
    verified_kwh = sum(hourly_verified_kw)  # 1-hour bins: kW == kWh per bin
    peak_kw = max(hourly_verified_kw) if hourly_verified_kw else 0.0
    return CityStats(
        city=city,
        capacity_kw=capacity_kw,
        verified_kwh=verified_kwh,
        peak_kw=peak_kw,
        capacity_factor_pct=(
            capacity_factor(capacity_kw, verified_kwh, horizon_hours)
            if capacity_kw > 0
            else 0.0
        ),
    )
