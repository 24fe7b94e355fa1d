"""Acceptance suite: one test per release criterion, at the stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS/FAIL line per
criterion.
"""
from __future__ import annotations

import functools
import hashlib
import random
import time

import pytest
from fastapi.testclient import TestClient

from solarchain import analytics, physics
from solarchain.benchmark import (
    Benchmark,
    BenchmarkConfig,
    GENERATION_FILE,
    MARKET_FILE,
    NODES_FILE,
    TRADES_FILE,
    run_pipeline,
)
from solarchain.ledger import Ledger, LedgerConfig, LedgerError, WEI_PER_TOKEN
from solarchain.service import ServiceState, create_app


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"ACCEPTANCE {name}: FAIL")
                raise
            print(f"ACCEPTANCE {name}: PASS")
            return result

        return wrapper

    return decorate


@criterion("verification-exactness")
def test_verification_exactness(default_result):
    """F1 = 1.0 exactly against injection labels on the default benchmark,
    with the verification pass itself completing in under a second."""
    records = default_result.records
    assert len(records) == 1200
    assert sum(1 for r in records if r.fdia_injected) == 60
    by_class = {}
    for r in records:
        if r.status == physics.STATUS_REJECTED:
            by_class[r.anomaly_class] = by_class.get(r.anomaly_class, 0) + 1
    assert by_class == {"night_time": 28, "above_bound": 26, "corrupted": 6}

    started = time.perf_counter()
    tp = fp = fn = 0
    for record in records:
        bound = physics.PowerBound(record.p_max, record.irradiance, 0.0, 1.0)
        verdict = physics.verify_record(record.p_reported, bound, default_result.config.tau)
        detected = verdict.status == physics.STATUS_REJECTED
        if record.fdia_injected and detected:
            tp += 1
        elif detected:
            fp += 1
        elif record.fdia_injected:
            fn += 1
    elapsed = time.perf_counter() - started

    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    f1 = 2 * precision * recall / (precision + recall)
    assert precision == 1.0
    assert recall == 1.0
    assert f1 == 1.0
    assert elapsed < 1.0, f"verification took {elapsed:.3f}s"


@criterion("published-row-oracle")
def test_published_row_oracle():
    """Capacity factors, inflation prevention, and the liquidity-area identity
    reproduce the published aggregate rows at their stated tolerances."""
    published = [
        (84.58, 427.72, 21.07),
        (92.62, 220.95, 9.94),
        (79.14, 539.39, 28.40),
        (84.12, 554.34, 27.46),
        (72.77, 285.73, 16.36),
    ]
    for capacity, verified, expected in published:
        got = analytics.capacity_factor(capacity, verified, 24)
        assert got == pytest.approx(expected, abs=0.01), (capacity, verified)

    assert analytics.inflation_prevented(141.59, 2028.13) == pytest.approx(6.98, abs=0.01)

    area = analytics.liquidity_area([0.0957] * 24)
    assert area == pytest.approx(2.2968, abs=1e-9)
    assert abs(area - 2.2979) / 2.2979 < 0.001


@criterion("ledger-arithmetic")
def test_ledger_arithmetic():
    """Fixed-point formulas over 10^4 random inputs, the 1:3 split for totals
    divisible by 4, and conservation/cap/replay over a 10^5-event random run."""
    rng = random.Random(20260501)

    # reward_wei = ((u * 25 // 100) * 10^18) // 100000 for 10^4 random inputs
    ledger = Ledger(LedgerConfig())
    expected_rewards: dict[str, int] = {}
    for i in range(5_000):
        units = rng.randint(0, 10**9)
        owner = f"u{i}"
        ledger.update_market_step([(owner, units)], units, 0)
        expected_rewards[owner] = (units * 25 // 100) * 10**18 // 100_000
    for owner, expected in expected_rewards.items():
        assert ledger.personal_reward_wei.get(owner, 0) == expected

    # cost_wei = e * 10^18 // 100000 for 10^4 random inputs
    ledger = Ledger(LedgerConfig())
    fid = ledger.create_factory("fab", 31.0, 121.0, 10)
    ledger.mint("fab", 10**8 * WEI_PER_TOKEN)
    ledger.approve("fab", ledger.config.exchange_account, 10**8 * WEI_PER_TOKEN)
    ledger.update_market_step([("u", 4 * 10**13)], 4 * 10**13, 0)
    for _ in range(5_000):
        units = rng.randint(1, 10**9)
        trade = ledger.buy_energy_for_factory("fab", fid, units)
        assert trade.cost_wei == units * 10**18 // 100_000

    # 1:3 pool-to-reward ratio for totals divisible by 4
    for _ in range(2_000):
        ledger = Ledger(LedgerConfig())
        entries = [(f"u{i}", 4 * rng.randint(1, 10**6)) for i in range(rng.randint(1, 8))]
        total = sum(u for _, u in entries)
        assert total % 4 == 0
        ledger.update_market_step(entries, total, 0)
        reward_units = sum(u * 25 // 100 for _, u in entries)
        assert ledger.global_supply_energy == 3 * reward_units

    # conservation + cap enforcement over a >= 10^5-event randomized run
    ledger = Ledger(LedgerConfig(cap_wei=10**7))
    accounts = [f"acct{i}" for i in range(8)]
    fid = ledger.create_factory(accounts[0], 31.0, 121.0, 10)
    cap_errors = 0
    while len(ledger.events) < 100_000:
        op = rng.randrange(7)
        account = rng.choice(accounts)
        other = rng.choice(accounts)
        amount = rng.randint(1, 50_000)
        try:
            if op == 0:
                ledger.mint(account, amount)
            elif op == 1:
                ledger.approve(account, ledger.config.exchange_account, amount)
            elif op == 2:
                ledger.burn_from(account, ledger.config.exchange_account, amount)
            elif op == 3:
                ledger.transfer(account, other, amount)
            elif op == 4:
                units = rng.randint(0, 100_000)
                ledger.update_market_step([(account, units)], units, amount)
            elif op == 5:
                ledger.buy_energy_for_factory(accounts[0], fid, rng.randint(0, 2_000))
            else:
                ledger.claim_reward(account, now=len(ledger.events) * 7200)
        except LedgerError as exc:
            if exc.code == "CapExceeded":
                cap_errors += 1
        assert ledger.total_supply == ledger.cumulative_minted - ledger.cumulative_burned
        assert ledger.total_supply <= ledger.config.cap_wei

    assert cap_errors > 0, "cap enforcement never exercised"
    ledger.check_conservation()
    replayed = Ledger.replay(ledger.events, ledger.config)
    assert replayed.snapshot() == ledger.snapshot()


@criterion("band-reproduction")
def test_band_reproduction(default_result):
    """Default-seed aggregates land inside the published bands, and settlement
    reconciles with the ledger burn events exactly in wei."""
    metrics = default_result.metrics

    assert 1400.0 <= metrics["verification"]["verified_kwh"] <= 2600.0
    assert 0.95 <= metrics["verification"]["residual_stats"]["mean_ratio"] <= 1.00
    assert 40.0 <= metrics["market"]["liquidity_uplift_pct"] <= 80.0

    for hour in default_result.market_hours:
        assert hour.slippage_solarchain < hour.slippage_baseline, hour

    report = analytics.settlement_report(default_result.trades, default_result.ledger.events)
    assert report["reconciled"] is True
    assert report["totals"]["cost_wei"] == default_result.ledger.cumulative_burned
    assert report["totals"]["cost_wei"] == sum(
        t.energy_units * 10**18 // 100_000 for t in default_result.trades
    )


@criterion("determinism")
def test_determinism(tmp_path):
    """Two seed-42 runs produce byte-identical CSVs in under ten seconds."""
    started = time.perf_counter()
    run_pipeline(BenchmarkConfig(seed=42), out_dir=str(tmp_path / "one"))
    first_elapsed = time.perf_counter() - started
    run_pipeline(BenchmarkConfig(seed=42), out_dir=str(tmp_path / "two"))

    for name in (NODES_FILE, GENERATION_FILE, MARKET_FILE, TRADES_FILE):
        digest_one = hashlib.sha256((tmp_path / "one" / name).read_bytes()).hexdigest()
        digest_two = hashlib.sha256((tmp_path / "two" / name).read_bytes()).hexdigest()
        assert digest_one == digest_two, name

    assert first_elapsed < 10.0, f"pipeline took {first_elapsed:.2f}s"


@criterion("api-gate")
def test_api_gate(default_result):
    """All 60 rejected records bounce with 409 and zero PanelCreated events;
    all 1140 verified records register."""
    benchmark = Benchmark(
        nodes=default_result.nodes,
        records=default_result.records,
        market_hours=default_result.market_hours,
        trades=default_result.trades,
    )
    state = ServiceState(benchmark, factories=default_result.factories)
    client = TestClient(create_app(state))
    headers = {"X-Account-Id": "gatekeeper", "X-Account-Role": "planner"}

    rejected = [r for r in default_result.records if r.status == physics.STATUS_REJECTED]
    verified = [r for r in default_result.records if r.status == physics.STATUS_VERIFIED]
    assert len(rejected) == 60
    assert len(verified) == 1140

    conflict_count = 0
    for record in rejected:
        response = client.post(
            "/api/panels", json={"node_id": record.node_id, "hour": record.hour},
            headers=headers,
        )
        assert response.status_code == 409, (record.node_id, record.hour, response.text)
        assert response.json()["code"] == "RecordRejected"
        conflict_count += 1
    assert conflict_count == 60
    assert sum(1 for e in state.ledger.events if e.kind == "PanelCreated") == 0

    for record in verified:
        response = client.post(
            "/api/panels", json={"node_id": record.node_id, "hour": record.hour},
            headers=headers,
        )
        assert response.status_code == 201, (record.node_id, record.hour, response.text)
    assert sum(1 for e in state.ledger.events if e.kind == "PanelCreated") == 1140
