"""Generator and loader tests: structure, determinism, label soundness,
stream independence, and file round-trips."""
from __future__ import annotations

import hashlib
import math
from datetime import date

import pytest

from solarchain import physics
from solarchain.benchmark import (
    AnomalyPlan,
    Benchmark,
    BenchmarkConfig,
    BenchmarkError,
    CityProfile,
    DEFAULT_CITIES,
    EFFICIENCY_RANGE,
    GENERATION_FILE,
    InfeasiblePlan,
    LAT_ENVELOPE,
    LON_ENVELOPE,
    MARKET_FILE,
    NODES_FILE,
    PANEL_AREA_RANGE,
    ParseError,
    SchemaMismatch,
    TEMP_COEFF_RANGE,
    TRADES_FILE,
    _injection_plan,
    generate_generation,
    generate_nodes,
    load_dataset,
    run_pipeline,
    substream,
    write_dataset,
)
from solarchain.physics import PowerBound


def _records_equal(a, b) -> bool:
    for field in ("timestamp", "hour", "node_id", "city", "latitude", "longitude",
                  "irradiance", "air_temp", "p_max", "p_reported", "fdia_injected",
                  "status", "anomaly_class", "residual", "ratio"):
        va, vb = getattr(a, field), getattr(b, field)
        if isinstance(va, float) and isinstance(vb, float):
            if math.isnan(va) and math.isnan(vb):
                continue
            if va != vb:
                return False
        elif va != vb:
            return False
    return True


class TestGenerateNodes:
    def test_default_registry_shape(self):
        nodes = generate_nodes(BenchmarkConfig())
        assert len(nodes) == 50
        for city in DEFAULT_CITIES:
            assert sum(1 for n in nodes if n.city == city.name) == 10
        assert nodes[0].node_id == "BEI-001"
        assert len({n.node_id for n in nodes}) == 50

    def test_same_seed_identical(self):
        assert generate_nodes(BenchmarkConfig(seed=7)) == generate_nodes(BenchmarkConfig(seed=7))

    def test_different_seed_differs(self):
        assert generate_nodes(BenchmarkConfig(seed=7)) != generate_nodes(BenchmarkConfig(seed=8))

    def test_ranges(self):
        for node in generate_nodes(BenchmarkConfig()):
            assert PANEL_AREA_RANGE[0] <= node.panel_area <= PANEL_AREA_RANGE[1]
            assert EFFICIENCY_RANGE[0] <= node.efficiency <= EFFICIENCY_RANGE[1]
            assert TEMP_COEFF_RANGE[0] <= node.temp_coefficient <= TEMP_COEFF_RANGE[1]
            assert LAT_ENVELOPE[0] <= node.latitude <= LAT_ENVELOPE[1]
            assert LON_ENVELOPE[0] <= node.longitude <= LON_ENVELOPE[1]
            assert date(2020, 1, 9) <= node.install_date <= date(2024, 5, 10)


class TestGenerateGeneration:
    def test_record_and_rejection_counts(self, default_result):
        records = default_result.records
        assert len(records) == 1200
        rejected = [r for r in records if r.status == "rejected"]
        assert len(rejected) == 60
        by_class = {}
        for r in rejected:
            by_class[r.anomaly_class] = by_class.get(r.anomaly_class, 0) + 1
        assert by_class == {"night_time": 28, "above_bound": 26, "corrupted": 6}

    def test_labels_match_verdicts_exactly(self, default_result):
        for record in default_result.records:
            assert record.fdia_injected == (record.status == "rejected")

    def test_verified_records_satisfy_bound_exactly(self, default_result):
        tau = default_result.config.tau
        for record in default_result.records:
            if record.status == "verified":
                assert record.p_reported <= tau * record.p_max

    def test_injected_records_violate_by_construction(self, default_result):
        tau = default_result.config.tau
        for record in default_result.records:
            if not record.fdia_injected:
                continue
            if record.anomaly_class == "night_time":
                assert record.p_max == 0.0 and record.p_reported > 0
            elif record.anomaly_class == "above_bound":
                assert record.p_reported > tau * record.p_max
            else:
                assert (not math.isfinite(record.p_reported)) or record.p_reported < 0

    def test_weather_fields_within_published_ranges(self, default_result):
        for record in default_result.records:
            assert 0.0 <= record.irradiance <= 1400.0
            assert 9.10 <= record.air_temp <= 27.00

    def test_adding_a_city_does_not_perturb_existing_draws(self):
        base = BenchmarkConfig(seed=42)
        extra = CityProfile("Wuhan", "WUH", "WH", 30.5928, 114.3055, 0.55, 16.0, 25.0)
        grown = BenchmarkConfig(seed=42, cities=DEFAULT_CITIES + (extra,),
                                anomalies=AnomalyPlan(28, 26, 6))
        nodes_a = generate_nodes(base)
        nodes_b = generate_nodes(grown)
        assert nodes_b[: len(nodes_a)] == nodes_a
        # Weather-driven fields are per-substream; the injection plan is global.
        recs_a = {(r.node_id, r.hour): r for r in generate_generation(base, nodes_a)}
        recs_b = {(r.node_id, r.hour): r for r in generate_generation(grown, nodes_b)}
        for key, rec_a in recs_a.items():
            rec_b = recs_b[key]
            assert rec_a.irradiance == rec_b.irradiance
            assert rec_a.air_temp == rec_b.air_temp
            assert rec_a.p_max == rec_b.p_max

    def test_infeasible_plan_raises(self):
        config = BenchmarkConfig()
        raw = {
            ("X-001", h): {"bound": PowerBound(p_max=100.0, g_used=500.0,
                                               t_used=20.0, thermal_factor=1.0)}
            for h in range(24)
        }
        with pytest.raises(InfeasiblePlan):
            _injection_plan(config, raw)  # no night slots available

    def test_anomaly_budget_capped_at_five_percent(self):
        with pytest.raises(BenchmarkError):
            BenchmarkConfig(cities=DEFAULT_CITIES[:2], anomalies=AnomalyPlan(28, 26, 6))


class TestSubstream:
    def test_streams_are_independent_of_iteration_order(self):
        a = substream(42, "node", "Beijing", 1).random(4).tolist()
        substream(42, "node", "Shanghai", 9).random(10)
        b = substream(42, "node", "Beijing", 1).random(4).tolist()
        assert a == b

    def test_distinct_tags_give_distinct_streams(self):
        a = substream(42, "weather", "Beijing", 0).random(4).tolist()
        b = substream(42, "weather", "Beijing", 1).random(4).tolist()
        assert a != b


class TestPipeline:
    def test_byte_identical_reruns(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        run_pipeline(BenchmarkConfig(seed=42), out_dir=str(out_a))
        run_pipeline(BenchmarkConfig(seed=42), out_dir=str(out_b))
        for name in (NODES_FILE, GENERATION_FILE, MARKET_FILE, TRADES_FILE):
            ha = hashlib.sha256((out_a / name).read_bytes()).hexdigest()
            hb = hashlib.sha256((out_b / name).read_bytes()).hexdigest()
            assert ha == hb, name

    def test_trades_sit_in_daylight_window(self, default_result):
        assert len(default_result.trades) == 42
        assert all(6 <= t.hour <= 19 for t in default_result.trades)
        assert len({t.trade_id for t in default_result.trades}) == 42

    def test_trade_sizes_positive_and_aligned(self, default_result):
        for trade in default_result.trades:
            assert trade.energy_units > 0
            assert trade.energy_units % 100 == 0
            assert trade.cost_wei == trade.energy_units * 10**18 // 100_000

    def test_split_intake_ratio(self, default_result):
        ledger = default_result.ledger
        pool_intake = sum(
            e.payload["total_energy"] * 75 // 100
            for e in ledger.events if e.kind == "MarketStep"
        )
        reward_intake = sum(
            units * 25 // 100
            for e in ledger.events if e.kind == "MarketStep"
            for _, units in e.payload["entries"]
        )
        entry_count = sum(
            len(e.payload["entries"]) for e in ledger.events if e.kind == "MarketStep"
        )
        # Exact 1:3 up to per-entry truncation remainders.
        assert abs(pool_intake - 3 * reward_intake) <= 3 * entry_count + 24 * 3

    def test_settlement_reconciles(self, default_result):
        assert default_result.metrics["settlement"]["reconciled"] is True

    def test_ledger_replays(self, default_result):
        ledger = default_result.ledger
        replayed = type(ledger).replay(ledger.events, ledger.config)
        assert replayed.snapshot() == ledger.snapshot()

    def test_two_city_config_scales(self):
        config = BenchmarkConfig(seed=1, cities=DEFAULT_CITIES[:2],
                                 anomalies=AnomalyPlan(11, 10, 2))
        result = run_pipeline(config)
        assert len(result.records) == 480
        assert result.metrics["counts"]["rejected"] == 23

    def test_market_hours_quantized_and_ordered(self, default_result):
        hours = default_result.market_hours
        assert [h.hour for h in hours] == list(range(24))
        for h in hours:
            assert h.solarchain_liquidity >= h.baseline_liquidity
            assert h.slippage_solarchain < h.slippage_baseline


class TestLoader:
    def test_round_trip_counts(self, dataset_dir, default_result):
        bench = load_dataset(str(dataset_dir))
        assert len(bench.nodes) == 50
        assert len(bench.records) == 1200
        assert len(bench.market_hours) == 24
        assert len(bench.trades) == 42

    def test_round_trip_exact(self, dataset_dir, default_result):
        bench = load_dataset(str(dataset_dir))
        assert bench.nodes == default_result.nodes
        assert bench.market_hours == default_result.market_hours
        assert bench.trades == default_result.trades
        for rec_a, rec_b in zip(default_result.records, bench.records):
            assert _records_equal(rec_a, rec_b)

    def test_missing_column_names_the_column(self, dataset_dir, tmp_path):
        clone = tmp_path / "broken"
        clone.mkdir()
        for name in (NODES_FILE, GENERATION_FILE):
            (clone / name).write_text((dataset_dir / name).read_text())
        text = (clone / NODES_FILE).read_text().replace("panel_area_m2", "panel_area")
        (clone / NODES_FILE).write_text(text)
        with pytest.raises(SchemaMismatch, match="panel_area_m2"):
            load_dataset(str(clone))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaMismatch, match="urban_energy_nodes"):
            load_dataset(str(tmp_path))

    def test_timestamp_without_offset_is_parse_error(self, dataset_dir, tmp_path):
        clone = tmp_path / "naive"
        clone.mkdir()
        (clone / NODES_FILE).write_text((dataset_dir / NODES_FILE).read_text())
        text = (dataset_dir / GENERATION_FILE).read_text().replace("+08:00", "")
        (clone / GENERATION_FILE).write_text(text)
        with pytest.raises(ParseError, match="row 2"):
            load_dataset(str(clone))

    def test_nan_reports_survive_round_trip(self, dataset_dir):
        bench = load_dataset(str(dataset_dir))
        nan_rows = [r for r in bench.records if isinstance(r.p_reported, float)
                    and math.isnan(r.p_reported)]
        assert nan_rows
        assert all(r.anomaly_class == "corrupted" for r in nan_rows)


class TestCsvFormat:
    def test_generation_precision(self, dataset_dir):
        lines = (dataset_dir / GENERATION_FILE).read_text().splitlines()
        first = lines[1].split(",")
        # irradiance, air temp, bound, report carry two decimals
        for column in (6, 7, 8, 9):
            value = first[column]
            assert value == "NaN" or len(value.split(".")[1]) == 2

    def test_market_precision(self, dataset_dir):
        lines = (dataset_dir / MARKET_FILE).read_text().splitlines()
        row = lines[1].split(",")
        assert len(row[2].split(".")[1]) == 6
        assert len(row[5].split(".")[1]) == 4

    def test_headers_verbatim(self, dataset_dir):
        assert (dataset_dir / MARKET_FILE).read_text().splitlines()[0] == (
            "timestamp,hour,total_verified_MW,SolarChain_liquidity_MW,"
            "baseline_liquidity_MW,slippage_SolarChain_pct,slippage_baseline_pct"
        )
        assert (dataset_dir / TRADES_FILE).read_text().splitlines()[0] == (
            "trade_id,timestamp,hour,factory_id,city,energy_purchased_MW,"
            "tokens_burned,exergy_dissipated_MJ"
        )
