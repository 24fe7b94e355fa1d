"""Seeded benchmark generator and dataset loader.

Produces the four-file benchmark (node registry, hourly generation with
labeled anomaly injections, hourly market records, factory trades) plus a
metrics report, end to end through the physics verifier, the ledger, and the
analytics layer. Identical (seed, config) pairs produce byte-identical files.

The RNG is counter-based (Philox) with one independent substream per logical
site: adding cities or nodes never perturbs draws made by existing ones. All
values bound for CSV storage are quantized to their column precision before
verification, so reloading a dataset reproduces every verdict exactly.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace
from datetime import date, datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from . import analytics, physics
from .analytics import AnalyticsConfig, MarketHour, TradeRecord
from .ledger import Ledger, LedgerConfig, WEI_PER_TOKEN
from .physics import BoundConfig, NodeSpec, PowerBound, Verdict, WeatherSample


class BenchmarkError(ValueError):
    pass


class InfeasiblePlan(BenchmarkError):
    pass


class SchemaMismatch(BenchmarkError):
    pass


class ParseError(BenchmarkError):
    pass


@dataclass(frozen=True)
class CityProfile:
    name: str
    node_prefix: str     # three-letter node id prefix
    factory_code: str    # two-letter factory id code
    latitude: float
    longitude: float
    cloud_base: float    # mean atmospheric clearness multiplier
    temp_min_c: float
    temp_max_c: float


DEFAULT_CITIES = (
    CityProfile("Beijing", "BEI", "BJ", 39.9042, 116.4074, 0.60, 13.5, 24.5),
    CityProfile("Shanghai", "SHA", "SH", 31.2304, 121.4737, 0.72, 15.5, 24.5),
    CityProfile("Chengdu", "CHE", "CD", 30.5728, 104.0668, 0.36, 16.0, 22.5),
    CityProfile("Shenzhen", "SHE", "SZ", 22.5431, 114.0579, 0.50, 21.0, 26.5),
    CityProfile("Hangzhou", "HAN", "HZ", 30.2741, 120.1551, 0.75, 15.0, 25.0),
)

# Coordinate envelope of the released node registry.
LAT_ENVELOPE = (22.465945, 39.982854)
LON_ENVELOPE = (104.022990, 121.522048)

PANEL_AREA_RANGE = (18.43, 63.57)
EFFICIENCY_RANGE = (0.1768, 0.2234)
TEMP_COEFF_RANGE = (-0.00460, -0.00326)
INSTALL_DATE_RANGE = (date(2020, 1, 9), date(2024, 5, 10))

# Normalized diurnal temperature shape: coolest before dawn, warmest mid-afternoon.
TEMP_SHAPE = tuple(
    (1.0 - math.cos(2.0 * math.pi * ((h - 5) % 24) / 24.0)) / 2.0 for h in range(24)
)

NODES_FILE = "urban_energy_nodes.csv"
GENERATION_FILE = "spatiotemporal_generation.csv"
MARKET_FILE = "market_liquidity.csv"
TRADES_FILE = "p2p_trades.csv"
METRICS_FILE = "metrics.json"
EVENTS_FILE = "ledger_events.ndjson"

NODES_COLUMNS = [
    "node_id", "city", "latitude", "longitude", "panel_area_m2",
    "efficiency", "temp_coefficient", "install_date",
]
GENERATION_COLUMNS = [
    "timestamp", "hour", "node_id", "city", "latitude", "longitude",
    "irradiance_Wm2", "air_temp_C", "P_max_W", "P_reported_W",
    "fdia_detected", "verification_status",
]
MARKET_COLUMNS = [
    "timestamp", "hour", "total_verified_MW", "SolarChain_liquidity_MW",
    "baseline_liquidity_MW", "slippage_SolarChain_pct", "slippage_baseline_pct",
]
TRADES_COLUMNS = [
    "trade_id", "timestamp", "hour", "factory_id", "city",
    "energy_purchased_MW", "tokens_burned", "exergy_dissipated_MJ",
]


@dataclass(frozen=True)
class AnomalyPlan:
    night_time: int = 28
    above_bound: int = 26
    corrupted: int = 6

    @property
    def total(self) -> int:
        return self.night_time + self.above_bound + self.corrupted


@dataclass(frozen=True)
class BenchmarkConfig:
    seed: int = 42
    day: date = date(2026, 5, 1)
    utc_offset_hours: int = 8
    cities: tuple[CityProfile, ...] = DEFAULT_CITIES
    nodes_per_city: int = 10
    anomalies: AnomalyPlan = AnomalyPlan()
    tau: float = 1.0
    trades_total: int = 42
    trade_hours: tuple[int, int] = (6, 19)  # inclusive window
    factory_budget_solr: int = 2000
    bound: BoundConfig = BoundConfig()
    ledger: LedgerConfig = LedgerConfig()
    analytics: AnalyticsConfig = AnalyticsConfig()

    def __post_init__(self) -> None:
        if self.nodes_per_city < 1 or not self.cities:
            raise BenchmarkError("need at least one city and one node per city")
        total_records = self.record_count
        if self.anomalies.total > 0.05 * total_records:
            raise BenchmarkError(
                f"anomaly plan {self.anomalies.total} exceeds 5% of {total_records} records"
            )
        if not 0 <= self.trade_hours[0] <= self.trade_hours[1] <= 23:
            raise BenchmarkError(f"invalid trade window {self.trade_hours}")

    @property
    def node_count(self) -> int:
        return len(self.cities) * self.nodes_per_city

    @property
    def record_count(self) -> int:
        return self.node_count * 24

    @property
    def tzinfo(self) -> timezone:
        return timezone(timedelta(hours=self.utc_offset_hours))

    def hour_timestamp(self, hour: int) -> datetime:
        return datetime(self.day.year, self.day.month, self.day.day, hour,
                        tzinfo=self.tzinfo)

    def hour_iso(self, hour: int) -> str:
        return self.hour_timestamp(hour).isoformat()

    def hour_epoch(self, hour: int) -> int:
        return int(self.hour_timestamp(hour).timestamp())


@dataclass(frozen=True)
class GenerationRecord:
    """One node-hour observation, quantized exactly as stored on disk."""

    timestamp: str
    hour: int
    node_id: str
    city: str
    latitude: float
    longitude: float
    irradiance: float
    air_temp: float
    p_max: float
    p_reported: float
    fdia_injected: bool
    status: str
    anomaly_class: str
    residual: float
    ratio: Optional[float]


@dataclass(frozen=True)
class FactorySpec:
    label: str            # e.g. FAC-SH-01
    city: str
    owner: str
    latitude: float
    longitude: float
    consumption_units: int  # energy-units per hour


@dataclass
class Benchmark:
    nodes: list[NodeSpec]
    records: list[GenerationRecord]
    market_hours: list[MarketHour]
    trades: list[TradeRecord]


@dataclass
class PipelineResult:
    config: BenchmarkConfig
    nodes: list[NodeSpec]
    records: list[GenerationRecord]
    market_hours: list[MarketHour]
    trades: list[TradeRecord]
    ledger: Ledger
    factories: list[FactorySpec]
    hourly_verified_mw: list[float]
    metrics: dict


def substream(seed: int, *tags) -> np.random.Generator:
    """Independent Philox stream keyed by (seed, tags); order-insensitive use."""
    material = json.dumps([seed, *tags], separators=(",", ":")).encode()
    key = np.frombuffer(hashlib.sha256(material).digest()[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _uniform(gen: np.random.Generator, lo: float, hi: float) -> float:
    return float(gen.uniform(lo, hi))


def _clamp(value: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, value))


# --------------------------------------------------------------------- nodes

def generate_nodes(config: BenchmarkConfig) -> list[NodeSpec]:
    """Deterministic node registry: ids {PREFIX}-{NNN}, specs within the
    published ranges, coordinates jittered inside the registry envelope."""
    nodes = []
    day_span = (INSTALL_DATE_RANGE[1] - INSTALL_DATE_RANGE[0]).days
    for city in config.cities:
        for idx in range(1, config.nodes_per_city + 1):
            gen = substream(config.seed, "node", city.name, idx)
            lat = _clamp(city.latitude + _uniform(gen, -0.075, 0.075), *LAT_ENVELOPE)
            lon = _clamp(city.longitude + _uniform(gen, -0.075, 0.075), *LON_ENVELOPE)
            nodes.append(
                NodeSpec(
                    node_id=f"{city.node_prefix}-{idx:03d}",
                    city=city.name,
                    latitude=round(lat, 6),
                    longitude=round(lon, 6),
                    panel_area=round(_uniform(gen, *PANEL_AREA_RANGE), 2),
                    efficiency=round(_uniform(gen, *EFFICIENCY_RANGE), 4),
                    temp_coefficient=round(_uniform(gen, *TEMP_COEFF_RANGE), 5),
                    install_date=INSTALL_DATE_RANGE[0]
                    + timedelta(days=int(gen.integers(0, day_span, endpoint=True))),
                )
            )
    return nodes


# ------------------------------------------------------------------- weather

def _city_weather(config: BenchmarkConfig, city: CityProfile) -> tuple[list[float], list[float]]:
    """Per-hour (cloud factor, base air temp) for one city-day."""
    clouds, temps = [], []
    for hour in range(24):
        gen = substream(config.seed, "weather", city.name, hour)
        clouds.append(_clamp(city.cloud_base + float(gen.normal(0.0, 0.07)), 0.03, 0.97))
        span = city.temp_max_c - city.temp_min_c
        temp = city.temp_min_c + span * TEMP_SHAPE[hour] + float(gen.normal(0.0, 0.3))
        temps.append(_clamp(temp, 9.10, 27.00))
    return clouds, temps


def _truncated_ratio(gen: np.random.Generator, mean: float = 0.978, std: float = 0.014) -> float:
    # Honest reported-to-bound ratio, truncated to (0, 1].
    while True:
        r = float(gen.normal(mean, std))
        if 0.0 < r <= 1.0:
            return r


# ---------------------------------------------------------------- generation

def generate_generation(
    config: BenchmarkConfig, nodes: Sequence[NodeSpec]
) -> list[GenerationRecord]:
    """Node-hour records with honest reports plus the planned injections.

    Every record's verdict is the verifier's own output on the quantized
    values; the injection label is carried separately.
    """
    city_by_name = {c.name: c for c in config.cities}
    weather_cache = {c.name: _city_weather(config, c) for c in config.cities}

    # First pass: quantized weather and bounds for every node-hour.
    raw: dict[tuple[str, int], dict] = {}
    for node in nodes:
        clouds, base_temps = weather_cache[node.city]
        temps = []
        for hour in range(24):
            gen = substream(config.seed, "nodehour", node.node_id, hour)
            temps.append(
                round(_clamp(base_temps[hour] + float(gen.normal(0.0, 0.3)), 9.10, 27.00), 2)
            )
        daily_min = min(temps)
        for hour in range(24):
            gen = substream(config.seed, "irradiance", node.node_id, hour)
            ts = config.hour_timestamp(hour)
            elevation = physics.solar_elevation(node.latitude, node.longitude, ts)
            ceiling = physics.clear_sky_irradiance(
                elevation, config.bound.atmospheric_transmittance
            )
            site_factor = _clamp(1.0 + float(gen.normal(0.0, 0.02)), 0.90, 1.10)
            irradiance = round(_clamp(ceiling * clouds[hour] * site_factor, 0.0, 1400.0), 2)
            weather = WeatherSample(
                timestamp=ts,
                irradiance=irradiance,
                air_temp=temps[hour],
                daily_min_temp=daily_min,
            )
            bound = physics.compute_p_max(node, weather, config.bound)
            raw[(node.node_id, hour)] = {
                "node": node,
                "weather": weather,
                "bound": replace(bound, p_max=round(bound.p_max, 2)),
            }

    plan = _injection_plan(config, raw)

    records = []
    for node in nodes:
        for hour in range(24):
            cell = raw[(node.node_id, hour)]
            bound: PowerBound = cell["bound"]
            injected = plan.get((node.node_id, hour))
            gen = substream(config.seed, "report", node.node_id, hour)
            if injected is None:
                if bound.p_max == 0.0:
                    p_reported = 0.0
                else:
                    p_reported = round(bound.p_max * _truncated_ratio(gen), 2)
            elif injected == physics.ANOMALY_NIGHT:
                p_reported = round(_uniform(gen, 50.0, 900.0), 2)
            elif injected == physics.ANOMALY_ABOVE_BOUND:
                # Lower edge 1.05 keeps the violation intact after 2-decimal storage.
                p_reported = round(bound.p_max * _uniform(gen, 1.05, 1.65), 2)
            else:  # corrupted: negative or non-finite daylight value
                if int(gen.integers(0, 2)) == 0:
                    p_reported = round(-_uniform(gen, 10.0, 500.0), 2)
                else:
                    p_reported = float("nan")
            verdict: Verdict = physics.verify_record(p_reported, bound, config.tau)
            weather: WeatherSample = cell["weather"]
            records.append(
                GenerationRecord(
                    timestamp=config.hour_iso(hour),
                    hour=hour,
                    node_id=node.node_id,
                    city=node.city,
                    latitude=node.latitude,
                    longitude=node.longitude,
                    irradiance=weather.irradiance,
                    air_temp=weather.air_temp,
                    p_max=bound.p_max,
                    p_reported=p_reported,
                    fdia_injected=injected is not None,
                    status=verdict.status,
                    anomaly_class=verdict.anomaly_class,
                    residual=verdict.residual,
                    ratio=verdict.ratio,
                )
            )
    return records


def _injection_plan(
    config: BenchmarkConfig, raw: dict[tuple[str, int], dict]
) -> dict[tuple[str, int], str]:
    """Choose disjoint (node, hour) slots for each anomaly class."""
    night_slots = sorted(k for k, v in raw.items() if v["bound"].p_max == 0.0)
    # Daylight slots need enough headroom that class labels survive rounding.
    day_slots = sorted(k for k, v in raw.items() if v["bound"].p_max >= 50.0)

    plan_gen = substream(config.seed, "plan")
    want = config.anomalies
    if len(night_slots) < want.night_time:
        raise InfeasiblePlan(
            f"need {want.night_time} night slots, only {len(night_slots)} have p_max = 0"
        )
    if len(day_slots) < want.above_bound + want.corrupted:
        raise InfeasiblePlan(
            f"need {want.above_bound + want.corrupted} daylight slots, "
            f"only {len(day_slots)} have p_max >= 50 W"
        )

    plan: dict[tuple[str, int], str] = {}
    night_pick = plan_gen.choice(len(night_slots), size=want.night_time, replace=False)
    for i in sorted(int(x) for x in night_pick):
        plan[night_slots[i]] = physics.ANOMALY_NIGHT
    day_pick = plan_gen.choice(
        len(day_slots), size=want.above_bound + want.corrupted, replace=False
    )
    day_pick = sorted(int(x) for x in day_pick)
    for i in day_pick[: want.above_bound]:
        plan[day_slots[i]] = physics.ANOMALY_ABOVE_BOUND
    for i in day_pick[want.above_bound:]:
        plan[day_slots[i]] = physics.ANOMALY_CORRUPTED
    return plan


# ------------------------------------------------------------------ factories

def default_factories(config: BenchmarkConfig) -> list[FactorySpec]:
    """Six demand nodes across the five cities; the largest market hosts two."""
    by_name = {c.name: c for c in config.cities}
    roster = [("Beijing", 1), ("Shanghai", 1), ("Shanghai", 2),
              ("Chengdu", 1), ("Shenzhen", 1), ("Hangzhou", 1)]
    factories = []
    for city_name, ordinal in roster:
        if city_name not in by_name:
            continue
        city = by_name[city_name]
        gen = substream(config.seed, "factory", city.name, ordinal)
        kw = _uniform(gen, 60.0, 180.0)
        factories.append(
            FactorySpec(
                label=f"FAC-{city.factory_code}-{ordinal:02d}",
                city=city.name,
                owner=f"fac-{city.factory_code.lower()}-{ordinal:02d}",
                latitude=round(city.latitude + _uniform(gen, -0.05, 0.05), 6),
                longitude=round(city.longitude + _uniform(gen, -0.05, 0.05), 6),
                consumption_units=int(round(kw * 10)) * 10_000,  # 0.1 kW steps -> units/hour
            )
        )
    if not factories:
        raise BenchmarkError("no default factory city present in config")
    return factories


# ------------------------------------------------------------------- pipeline

def _verified_units(record: GenerationRecord) -> int:
    # 2-decimal W over one hour -> integer 0.01 Wh units, exactly.
    return int(round(record.p_reported * 100))


def run_pipeline(config: BenchmarkConfig = BenchmarkConfig(),
                 out_dir: Optional[str] = None) -> PipelineResult:
    """Generate, verify, settle, and aggregate one benchmark day.

    When out_dir is given, writes the four CSV files, metrics.json, and the
    ledger event log there.
    """
    nodes = generate_nodes(config)
    records = generate_generation(config, nodes)
    factories = default_factories(config)

    ledger = Ledger(config.ledger)
    genesis_ts = config.hour_epoch(0)
    factory_ids: dict[str, int] = {}
    for factory in factories:
        fid = ledger.create_factory(
            factory.owner, factory.latitude, factory.longitude,
            factory.consumption_units, ts=genesis_ts,
        )
        factory_ids[factory.label] = fid
        budget = config.factory_budget_solr * WEI_PER_TOKEN
        ledger.mint(factory.owner, budget, ts=genesis_ts)
        ledger.approve(factory.owner, config.ledger.exchange_account, budget, ts=genesis_ts)

    by_hour: dict[int, list[GenerationRecord]] = {h: [] for h in range(24)}
    for record in records:
        by_hour[record.hour].append(record)

    demand_units = sum(f.consumption_units for f in factories)
    trades: list[TradeRecord] = []
    hourly_verified_mw: list[float] = []
    trade_schedule = _trade_schedule(config)
    trade_no = 0

    for hour in range(24):
        ts = config.hour_epoch(hour)
        entries = []
        verified_watts = 0.0
        for record in by_hour[hour]:
            if record.status != physics.STATUS_VERIFIED:
                continue
            verified_watts += record.p_reported
            units = _verified_units(record)
            if units > 0:
                entries.append((f"own-{record.node_id}", units))
        total_units = sum(u for _, u in entries)
        ledger.update_market_step(entries, total_units, demand_units, ts=ts)
        hourly_verified_mw.append(round(verified_watts / 1e6, 6))

        for city_name in trade_schedule.get(hour, []):
            trade_no += 1
            trade = _execute_trade(config, ledger, factories, factory_ids,
                                   city_name, trade_no, hour)
            trades.append(trade)

    market_hours = _quantized_market_hours(config, hourly_verified_mw)

    metrics = _compute_metrics(config, nodes, records, market_hours, trades, ledger)
    result = PipelineResult(
        config=config, nodes=nodes, records=records, market_hours=market_hours,
        trades=trades, ledger=ledger, factories=factories,
        hourly_verified_mw=hourly_verified_mw, metrics=metrics,
    )
    if out_dir is not None:
        write_dataset(result, out_dir)
    return result


def _trade_schedule(config: BenchmarkConfig) -> dict[int, list[str]]:
    """Assign each trade an hour (evenly over the window) and a city
    (demand-weighted)."""
    factories = default_factories(config)
    weights: dict[str, int] = {}
    for factory in factories:
        weights[factory.city] = weights.get(factory.city, 0) + factory.consumption_units
    city_names = sorted(weights)
    total_weight = sum(weights.values())
    probabilities = [weights[c] / total_weight for c in city_names]

    lo, hi = config.trade_hours
    window = list(range(lo, hi + 1))
    gen = substream(config.seed, "trade-schedule")
    schedule: dict[int, list[str]] = {}
    for t in range(config.trades_total):
        hour = window[t % len(window)]
        city = city_names[int(gen.choice(len(city_names), p=probabilities))]
        schedule.setdefault(hour, []).append(city)
    return schedule


def _execute_trade(
    config: BenchmarkConfig,
    ledger: Ledger,
    factories: list[FactorySpec],
    factory_ids: dict[str, int],
    city_name: str,
    trade_no: int,
    hour: int,
) -> TradeRecord:
    gen = substream(config.seed, "trade", trade_no)
    candidates = [f for f in factories if f.city == city_name]
    factory = candidates[int(gen.integers(0, len(candidates)))]

    draw = int(gen.integers(32_600, 3_750_200, endpoint=True))
    pool_cap = ledger.global_supply_energy // 4
    units = min(draw, pool_cap) // 100 * 100  # multiples of 100 round-trip at 6 dp MWh
    if units < 100:
        raise InfeasiblePlan(
            f"market pool too shallow for trade {trade_no} at hour {hour}"
        )
    exergy = round(
        analytics.exergy_of_trade(units / 1e8, config.analytics.exergy_quality_factor), 4
    )
    ts = config.hour_epoch(hour)
    trade = ledger.buy_energy_for_factory(
        factory.owner, factory_ids[factory.label], units, ts=ts, exergy_mj=exergy
    )
    return TradeRecord(
        trade_id=f"TRD-{trade_no:04d}",
        timestamp=config.hour_iso(hour),
        hour=hour,
        factory_id=factory.label,
        city=factory.city,
        energy_units=trade.energy_units,
        cost_wei=trade.cost_wei,
        exergy_mj=exergy,
    )


def _quantized_market_hours(
    config: BenchmarkConfig, hourly_verified_mw: Sequence[float]
) -> list[MarketHour]:
    # Quantize to CSV precision so files round-trip exactly.
    hours = analytics.liquidity_series(
        hourly_verified_mw, config.analytics,
        timestamps=[config.hour_iso(h) for h in range(24)],
    )
    return [
        MarketHour(
            timestamp=h.timestamp,
            hour=h.hour,
            total_verified=round(h.total_verified, 6),
            solarchain_liquidity=round(h.solarchain_liquidity, 6),
            baseline_liquidity=round(h.baseline_liquidity, 6),
            slippage_solarchain=round(h.slippage_solarchain, 4),
            slippage_baseline=round(h.slippage_baseline, 4),
        )
        for h in hours
    ]


# -------------------------------------------------------------------- metrics

def summary_metrics(
    nodes: Sequence[NodeSpec],
    records: Sequence[GenerationRecord],
    market_hours: Sequence[MarketHour],
    trades: Sequence[TradeRecord],
    ledger: Ledger,
) -> dict:
    """Verification, city, market, and settlement aggregates for one day."""
    city_order: list[str] = []
    for node in nodes:
        if node.city not in city_order:
            city_order.append(node.city)

    verified = [r for r in records if r.status == physics.STATUS_VERIFIED]
    rejected = [r for r in records if r.status == physics.STATUS_REJECTED]

    true_positive = sum(1 for r in records if r.fdia_injected and r.status == "rejected")
    false_positive = sum(1 for r in records if not r.fdia_injected and r.status == "rejected")
    false_negative = sum(1 for r in records if r.fdia_injected and r.status == "verified")
    precision = true_positive / (true_positive + false_positive) if (true_positive + false_positive) else 1.0
    recall = true_positive / (true_positive + false_negative) if (true_positive + false_negative) else 1.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0

    verified_kwh = sum(r.p_reported for r in verified) / 1000.0
    rejected_kwh = sum(
        r.p_reported for r in rejected if math.isfinite(r.p_reported) and r.p_reported > 0
    ) / 1000.0

    eligible = [(r.p_reported, r.p_max) for r in verified if r.p_max > 0]
    stats = physics.residual_stats(eligible) if len(eligible) >= 2 else None

    city_rows = []
    for city_name in city_order:
        capacity_kw = sum(n.capacity_kw for n in nodes if n.city == city_name)
        hourly_kw = [
            sum(r.p_reported for r in verified if r.city == city_name and r.hour == h) / 1000.0
            for h in range(24)
        ]
        cs = analytics.city_stats(city_name, capacity_kw, hourly_kw)
        city_rows.append({
            "city": cs.city,
            "capacity_kw": round(cs.capacity_kw, 2),
            "verified_kwh": round(cs.verified_kwh, 2),
            "peak_kw": round(cs.peak_kw, 2),
            "capacity_factor_pct": round(cs.capacity_factor_pct, 2),
        })

    settlement = analytics.settlement_report(list(trades), ledger.events)
    market = analytics.market_summary(list(market_hours))

    pool_intake = sum(
        e.payload["total_energy"] * 75 // 100 for e in ledger.events if e.kind == "MarketStep"
    )
    reward_intake = sum(
        units * 25 // 100
        for e in ledger.events if e.kind == "MarketStep"
        for _, units in e.payload["entries"]
    )

    anomaly_counts = {
        kind: sum(1 for r in rejected if r.anomaly_class == kind)
        for kind in (physics.ANOMALY_NIGHT, physics.ANOMALY_ABOVE_BOUND, physics.ANOMALY_CORRUPTED)
    }

    return {
        "counts": {
            "nodes": len(nodes),
            "records": len(records),
            "verified": len(verified),
            "rejected": len(rejected),
            "injected": sum(1 for r in records if r.fdia_injected),
            "trades": len(trades),
            "anomalies": anomaly_counts,
        },
        "verification": {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "verified_kwh": round(verified_kwh, 2),
            "rejected_kwh": round(rejected_kwh, 2),
            "inflation_prevented_pct": round(
                analytics.inflation_prevented(rejected_kwh, verified_kwh), 2
            ) if verified_kwh > 0 else 0.0,
            "residual_stats": {
                "pearson_r": round(stats.pearson_r, 4),
                "mean_ratio": round(stats.mean_ratio, 4),
                "ratio_std": round(stats.ratio_std, 4),
                "mae_w": round(stats.mae, 2),
                "rmse_w": round(stats.rmse, 2),
            } if stats is not None else None,
        },
        "cities": city_rows,
        "market": {k: round(v, 6) for k, v in market.items()},
        "settlement": {
            "cities": {
                city: {
                    "trades": row["trades"],
                    "volume_mwh": round(row["volume_mwh"], 4),
                    "solr_burned": round(row["solr_burned"], 4),
                    "exergy_mj": round(row["exergy_mj"], 4),
                }
                for city, row in settlement["cities"].items()
            },
            "totals": {
                "trades": settlement["totals"]["trades"],
                "volume_mwh": round(settlement["totals"]["volume_mwh"], 4),
                "solr_burned": round(settlement["totals"]["solr_burned"], 4),
                "exergy_mj": round(settlement["totals"]["exergy_mj"], 4),
                "cost_wei": settlement["totals"]["cost_wei"],
            },
            "reconciled": settlement["reconciled"],
        },
        "ledger": {
            "total_supply_wei": ledger.total_supply,
            "cumulative_minted_wei": ledger.cumulative_minted,
            "cumulative_burned_wei": ledger.cumulative_burned,
            "pool_energy_units": ledger.global_supply_energy,
            "pool_intake_units": pool_intake,
            "reward_intake_units": reward_intake,
            "events": len(ledger.events),
        },
    }


def _compute_metrics(
    config: BenchmarkConfig,
    nodes: Sequence[NodeSpec],
    records: Sequence[GenerationRecord],
    market_hours: Sequence[MarketHour],
    trades: Sequence[TradeRecord],
    ledger: Ledger,
) -> dict:
    metrics = {
        "config": {
            "seed": config.seed,
            "date": config.day.isoformat(),
            "tau": config.tau,
            "cities": [c.name for c in config.cities],
            "nodes_per_city": config.nodes_per_city,
        },
    }
    metrics.update(summary_metrics(nodes, records, market_hours, trades, ledger))
    return metrics


# ----------------------------------------------------------------- CSV plane

def _fmt(value: float, places: int) -> str:
    if isinstance(value, float) and math.isnan(value):
        return "NaN"
    return f"{value:.{places}f}"


def write_dataset(result: PipelineResult, out_dir: str) -> dict[str, str]:
    """Write the four CSVs, metrics.json, and the event log; returns paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    path = os.path.join(out_dir, NODES_FILE)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(NODES_COLUMNS)
        for n in result.nodes:
            writer.writerow([
                n.node_id, n.city, _fmt(n.latitude, 6), _fmt(n.longitude, 6),
                _fmt(n.panel_area, 2), _fmt(n.efficiency, 4),
                _fmt(n.temp_coefficient, 5), n.install_date.isoformat(),
            ])
    paths[NODES_FILE] = path

    path = os.path.join(out_dir, GENERATION_FILE)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(GENERATION_COLUMNS)
        for r in result.records:
            writer.writerow([
                r.timestamp, r.hour, r.node_id, r.city,
                _fmt(r.latitude, 6), _fmt(r.longitude, 6),
                _fmt(r.irradiance, 2), _fmt(r.air_temp, 2),
                _fmt(r.p_max, 2), _fmt(r.p_reported, 2),
                str(r.fdia_injected), r.status,
            ])
    paths[GENERATION_FILE] = path

    path = os.path.join(out_dir, MARKET_FILE)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(MARKET_COLUMNS)
        for h in result.market_hours:
            writer.writerow([
                h.timestamp, h.hour, _fmt(h.total_verified, 6),
                _fmt(h.solarchain_liquidity, 6), _fmt(h.baseline_liquidity, 6),
                _fmt(h.slippage_solarchain, 4), _fmt(h.slippage_baseline, 4),
            ])
    paths[MARKET_FILE] = path

    path = os.path.join(out_dir, TRADES_FILE)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp)
        writer.writerow(TRADES_COLUMNS)
        for t in result.trades:
            writer.writerow([
                t.trade_id, t.timestamp, t.hour, t.factory_id, t.city,
                _fmt(t.energy_mwh, 6), _fmt(t.tokens_burned, 4), _fmt(t.exergy_mj, 4),
            ])
    paths[TRADES_FILE] = path

    path = os.path.join(out_dir, METRICS_FILE)
    with open(path, "w") as fp:
        json.dump(result.metrics, fp, indent=2, sort_keys=True)
        fp.write("\n")
    paths[METRICS_FILE] = path

    path = os.path.join(out_dir, EVENTS_FILE)
    with open(path, "w") as fp:
        result.ledger.write_events(fp)
    paths[EVENTS_FILE] = path

    return paths


# -------------------------------------------------------------------- loader

def _parse_timestamp(value: str, row: int, file: str) -> datetime:
    try:
        ts = datetime.fromisoformat(value)
    except ValueError as exc:
        raise ParseError(f"{file} row {row}: bad timestamp {value!r}") from exc
    if ts.tzinfo is None:
        raise ParseError(f"{file} row {row}: timestamp {value!r} lacks a UTC offset")
    return ts


def _parse_float(value: str, row: int, file: str, column: str) -> float:
    if value.lower() == "nan":
        return float("nan")
    try:
        return float(value)
    except ValueError as exc:
        raise ParseError(f"{file} row {row}: bad {column} {value!r}") from exc


def _read_rows(path: str, required: list[str]) -> list[dict]:
    file = os.path.basename(path)
    if not os.path.exists(path):
        raise SchemaMismatch(f"missing dataset file {file}")
    with open(path, newline="") as fp:
        reader = csv.DictReader(fp)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise SchemaMismatch(f"{file}: missing column {column!r}")
        return list(reader)


def load_dataset(path: str, tau: float = 1.0) -> Benchmark:
    """Load a benchmark directory into typed records.

    Verdict evidence (anomaly class, residual, ratio) is recomputed from the
    stored bound and report with the same arithmetic the verifier uses, so a
    freshly generated dataset round-trips exactly.
    """
    nodes = []
    for i, row in enumerate(_read_rows(os.path.join(path, NODES_FILE), NODES_COLUMNS), start=2):
        try:
            install = date.fromisoformat(row["install_date"])
        except ValueError as exc:
            raise ParseError(f"{NODES_FILE} row {i}: bad install_date") from exc
        try:
            nodes.append(NodeSpec(
                node_id=row["node_id"],
                city=row["city"],
                latitude=_parse_float(row["latitude"], i, NODES_FILE, "latitude"),
                longitude=_parse_float(row["longitude"], i, NODES_FILE, "longitude"),
                panel_area=_parse_float(row["panel_area_m2"], i, NODES_FILE, "panel_area_m2"),
                efficiency=_parse_float(row["efficiency"], i, NODES_FILE, "efficiency"),
                temp_coefficient=_parse_float(
                    row["temp_coefficient"], i, NODES_FILE, "temp_coefficient"),
                install_date=install,
            ))
        except physics.ValidationError as exc:
            raise SchemaMismatch(f"{NODES_FILE} row {i}: {exc}") from exc

    records = []
    for i, row in enumerate(
        _read_rows(os.path.join(path, GENERATION_FILE), GENERATION_COLUMNS), start=2
    ):
        ts = _parse_timestamp(row["timestamp"], i, GENERATION_FILE)
        p_max = _parse_float(row["P_max_W"], i, GENERATION_FILE, "P_max_W")
        p_reported = _parse_float(row["P_reported_W"], i, GENERATION_FILE, "P_reported_W")
        if row["fdia_detected"] not in ("True", "False"):
            raise ParseError(
                f"{GENERATION_FILE} row {i}: bad fdia_detected {row['fdia_detected']!r}"
            )
        if row["verification_status"] not in (physics.STATUS_VERIFIED, physics.STATUS_REJECTED):
            raise ParseError(
                f"{GENERATION_FILE} row {i}: bad verification_status "
                f"{row['verification_status']!r}"
            )
        bound = PowerBound(p_max=p_max, g_used=_parse_float(
            row["irradiance_Wm2"], i, GENERATION_FILE, "irradiance_Wm2"),
            t_used=0.0, thermal_factor=1.0)
        verdict = physics.verify_record(p_reported, bound, tau)
        records.append(GenerationRecord(
            timestamp=ts.isoformat(),
            hour=int(row["hour"]),
            node_id=row["node_id"],
            city=row["city"],
            latitude=_parse_float(row["latitude"], i, GENERATION_FILE, "latitude"),
            longitude=_parse_float(row["longitude"], i, GENERATION_FILE, "longitude"),
            irradiance=bound.g_used,
            air_temp=_parse_float(row["air_temp_C"], i, GENERATION_FILE, "air_temp_C"),
            p_max=p_max,
            p_reported=p_reported,
            fdia_injected=row["fdia_detected"] == "True",
            status=row["verification_status"],
            anomaly_class=verdict.anomaly_class,
            residual=verdict.residual,
            ratio=verdict.ratio,
        ))

    market_hours = []
    market_path = os.path.join(path, MARKET_FILE)
    if os.path.exists(market_path):
        for i, row in enumerate(_read_rows(market_path, MARKET_COLUMNS), start=2):
            _parse_timestamp(row["timestamp"], i, MARKET_FILE)
            market_hours.append(MarketHour(
                timestamp=row["timestamp"],
                hour=int(row["hour"]),
                total_verified=_parse_float(
                    row["total_verified_MW"], i, MARKET_FILE, "total_verified_MW"),
                solarchain_liquidity=_parse_float(
                    row["SolarChain_liquidity_MW"], i, MARKET_FILE, "SolarChain_liquidity_MW"),
                baseline_liquidity=_parse_float(
                    row["baseline_liquidity_MW"], i, MARKET_FILE, "baseline_liquidity_MW"),
                slippage_solarchain=_parse_float(
                    row["slippage_SolarChain_pct"], i, MARKET_FILE, "slippage_SolarChain_pct"),
                slippage_baseline=_parse_float(
                    row["slippage_baseline_pct"], i, MARKET_FILE, "slippage_baseline_pct"),
            ))

    trades = []
    trades_path = os.path.join(path, TRADES_FILE)
    if os.path.exists(trades_path):
        for i, row in enumerate(_read_rows(trades_path, TRADES_COLUMNS), start=2):
            _parse_timestamp(row["timestamp"], i, TRADES_FILE)
            energy_mwh = _parse_float(
                row["energy_purchased_MW"], i, TRADES_FILE, "energy_purchased_MW")
            tokens = _parse_float(row["tokens_burned"], i, TRADES_FILE, "tokens_burned")
            trades.append(TradeRecord(
                trade_id=row["trade_id"],
                timestamp=row["timestamp"],
                hour=int(row["hour"]),
                factory_id=row["factory_id"],
                city=row["city"],
                energy_units=int(round(energy_mwh * 1e8)),
                cost_wei=int(round(tokens * 10_000)) * 10**14,
                exergy_mj=_parse_float(
                    row["exergy_dissipated_MJ"], i, TRADES_FILE, "exergy_dissipated_MJ"),
            ))

    return Benchmark(nodes=nodes, records=records, market_hours=market_hours, trades=trades)
