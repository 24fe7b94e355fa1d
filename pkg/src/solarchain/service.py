"""HTTP facade over the verifier, ledger, and analytics.

Exposes the benchmark records with their verification evidence, enforces the
server-side gate that only verified records can back a panel registration,
and maps the remaining endpoints one-to-one onto ledger operations. All
endpoints are deterministic functions of (state, request): simulation time is
always supplied by the caller, never read from a wall clock.

Errors use the envelope {"code", "message", "details"}; ledger error codes
pass through verbatim.
"""
from __future__ import annotations

import math
import os
import threading
from datetime import datetime
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import analytics, physics
from .benchmark import (
    Benchmark,
    BenchmarkConfig,
    FactorySpec,
    GenerationRecord,
    default_factories,
    load_dataset,
    run_pipeline,
    summary_metrics,
)
from .analytics import AnalyticsConfig, TradeRecord
from .ledger import (
    CooldownActive,
    Ledger,
    LedgerConfig,
    LedgerError,
    NoSuchFactory,
    NoSuchListing,
    NoSuchOffer,
    NoSuchPanel,
    NotFactoryOwner,
    NotOwner,
    WEI_PER_TOKEN,
)

MUTATING_ROLES = ("planner", "pv_owner", "factory_owner")

_STATUS_BY_ERROR = {
    NotOwner: 403,
    NotFactoryOwner: 403,
    NoSuchPanel: 404,
    NoSuchFactory: 404,
    NoSuchListing: 404,
    NoSuchOffer: 404,
    CooldownActive: 429,
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, details: Optional[dict] = None):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


def _json_safe(value: Optional[float]):
    if value is None or (isinstance(value, float) and not math.isfinite(value)):
        return None
    return value


class ServiceState:
    """Session state: loaded benchmark plus a live ledger driven over HTTP."""

    def __init__(
        self,
        benchmark: Benchmark,
        ledger_config: LedgerConfig = LedgerConfig(),
        analytics_config: AnalyticsConfig = AnalyticsConfig(),
        factories: Optional[list[FactorySpec]] = None,
        factory_budget_solr: int = 2000,
    ):
        self.lock = threading.Lock()
        self.benchmark = benchmark
        self.analytics_config = analytics_config
        self.records = sorted(benchmark.records, key=lambda r: (r.node_id, r.hour))
        self.by_key = {(r.node_id, r.hour): r for r in self.records}
        self.hour_iso = {r.hour: r.timestamp for r in benchmark.records}
        self.hour_epoch = {
            h: int(datetime.fromisoformat(ts).timestamp()) for h, ts in self.hour_iso.items()
        }

        self.ledger = Ledger(ledger_config)
        self.registrations: dict[tuple[str, int], int] = {}
        self.panel_source: dict[int, tuple[str, int]] = {}
        self.applied_hours: dict[int, int] = {}  # hour -> MarketStep seq
        self.trades: list[TradeRecord] = []

        genesis_ts = self.hour_epoch.get(0, 0)
        self.factories = factories if factories is not None else default_factories(
            BenchmarkConfig()
        )
        self.factory_ids: dict[str, int] = {}
        for factory in self.factories:
            fid = self.ledger.create_factory(
                factory.owner, factory.latitude, factory.longitude,
                factory.consumption_units, ts=genesis_ts,
            )
            self.factory_ids[factory.label] = fid
            if factory_budget_solr > 0:
                self.ledger.mint(factory.owner, factory_budget_solr * WEI_PER_TOKEN,
                                 ts=genesis_ts)

    # Latest applied hour anchors default simulation time for trades/claims.
    def default_epoch(self) -> int:
        if self.applied_hours:
            return self.hour_epoch[max(self.applied_hours)]
        return self.hour_epoch.get(0, 0)

    def resolve_factory(self, factory_ref) -> tuple[FactorySpec, int]:
        if isinstance(factory_ref, str) and factory_ref in self.factory_ids:
            label = factory_ref
        else:
            try:
                fid = int(factory_ref)
            except (TypeError, ValueError):
                raise ApiError(404, "NoSuchFactory", f"unknown factory {factory_ref!r}")
            by_id = {v: k for k, v in self.factory_ids.items()}
            if fid not in by_id:
                raise ApiError(404, "NoSuchFactory", f"unknown factory id {fid}")
            label = by_id[fid]
        spec = next(f for f in self.factories if f.label == label)
        return spec, self.factory_ids[label]


def record_json(state: ServiceState, record: GenerationRecord) -> dict:
    return {
        "node_id": record.node_id,
        "city": record.city,
        "hour": record.hour,
        "timestamp": record.timestamp,
        "latitude": record.latitude,
        "longitude": record.longitude,
        "irradiance_Wm2": record.irradiance,
        "air_temp_C": record.air_temp,
        "P_max_W": record.p_max,
        "P_reported_W": _json_safe(record.p_reported),
        "fdia_detected": record.fdia_injected,
        "verification_status": record.status,
        "anomaly_class": record.anomaly_class,
        "residual_W": _json_safe(record.residual),
        "ratio": _json_safe(record.ratio),
        "panel_id": state.registrations.get((record.node_id, record.hour)),
    }


class PanelBody(BaseModel):
    node_id: str
    hour: int


class MarketStepBody(BaseModel):
    hour: int


class TradeBody(BaseModel):
    factory_id: str | int
    energy_units: int
    hour: Optional[int] = None


class ClaimBody(BaseModel):
    now: Optional[int] = None


class ApproveBody(BaseModel):
    spender: str
    amount_wei: int


class ListingBody(BaseModel):
    panel_id: int
    ask_wei: int


class OfferBody(BaseModel):
    item_id: int
    amount_wei: int


class SaleBody(BaseModel):
    item_id: int
    buyer: str


def create_app(
    state: ServiceState,
    console_dir: Optional[str] = None,
) -> FastAPI:
    app = FastAPI(title="solarchain", docs_url=None, redoc_url=None)
    app.state.service = state

    @app.exception_handler(ApiError)
    async def _api_error(request: Request, exc: ApiError):
        headers = {}
        if exc.code == "CooldownActive" and "remaining_s" in exc.details:
            headers["Retry-After"] = str(exc.details["remaining_s"])
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
            headers=headers,
        )

    def ledger_error(exc: LedgerError) -> ApiError:
        status = _STATUS_BY_ERROR.get(type(exc), 409)
        details = {}
        if isinstance(exc, CooldownActive):
            details["remaining_s"] = exc.remaining_s
        return ApiError(status, exc.code, str(exc), details)

    def require_account(account: Optional[str]) -> str:
        if not account:
            raise ApiError(401, "MissingAccount", "X-Account-Id header is required")
        return account

    def require_role(role: Optional[str], allowed: tuple[str, ...]) -> str:
        resolved = role or "planner"
        if resolved not in allowed:
            raise ApiError(403, "RoleForbidden", f"role {resolved!r} may not call this endpoint")
        return resolved

    # ------------------------------------------------------------------ reads

    @app.get("/api/health")
    def health():
        return {"status": "ok", "records": len(state.records)}

    @app.get("/api/nodes")
    def nodes():
        panels_by_node: dict[str, list[dict]] = {}
        for panel_id, (node_id, hour) in sorted(state.panel_source.items()):
            panel = state.ledger.panels[panel_id]
            panels_by_node.setdefault(node_id, []).append(
                {"panel_id": panel_id, "owner": panel.owner, "hour": hour,
                 "dc_power_W": panel.dc_power, "ac_power_W": panel.ac_power}
            )
        return {
            "nodes": [
                {
                    "node_id": n.node_id,
                    "city": n.city,
                    "latitude": n.latitude,
                    "longitude": n.longitude,
                    "panel_area_m2": n.panel_area,
                    "efficiency": n.efficiency,
                    "temp_coefficient": n.temp_coefficient,
                    "install_date": n.install_date.isoformat(),
                    "capacity_kw": round(n.capacity_kw, 4),
                    "panels": panels_by_node.get(n.node_id, []),
                }
                for n in state.benchmark.nodes
            ]
        }

    @app.get("/api/records")
    def records(
        status: Optional[str] = None,
        city: Optional[str] = None,
        hour: Optional[int] = None,
        cursor: int = 0,
        page_size: int = 100,
    ):
        if not state.records:
            raise ApiError(404, "NoBenchmark", "no benchmark is loaded")
        if page_size < 1 or page_size > 500:
            raise ApiError(422, "BadPageSize", "page_size must be in [1, 500]")
        rows = state.records
        if status is not None:
            rows = [r for r in rows if r.status == status]
        if city is not None:
            rows = [r for r in rows if r.city == city]
        if hour is not None:
            rows = [r for r in rows if r.hour == hour]
        page = rows[cursor:cursor + page_size]
        next_cursor = cursor + page_size if cursor + page_size < len(rows) else None
        return {
            "records": [record_json(state, r) for r in page],
            "total": len(rows),
            "cursor": cursor,
            "next_cursor": next_cursor,
        }

    @app.get("/api/factories")
    def factories():
        return {
            "factories": [
                {
                    "factory_id": state.factory_ids[f.label],
                    "label": f.label,
                    "city": f.city,
                    "owner": f.owner,
                    "latitude": f.latitude,
                    "longitude": f.longitude,
                    "power_consumption_units": f.consumption_units,
                    "energy_balance_units": state.ledger.factories[
                        state.factory_ids[f.label]
                    ].energy_balance,
                }
                for f in state.factories
            ]
        }

    # ------------------------------------------------------------------ panels

    @app.post("/api/panels", status_code=201)
    def create_panel(
        body: PanelBody,
        x_account_id: Optional[str] = Header(default=None),
        x_account_role: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        require_role(x_account_role, ("planner", "pv_owner"))
        key = (body.node_id, body.hour)
        record = state.by_key.get(key)
        if record is None:
            raise ApiError(404, "NoSuchRecord", f"no record for {body.node_id} hour {body.hour}")
        with state.lock:
            if record.status != physics.STATUS_VERIFIED:
                raise ApiError(
                    409, "RecordRejected",
                    f"record {body.node_id}@{body.hour} is rejected and cannot back a panel",
                    {"anomaly_class": record.anomaly_class},
                )
            if key in state.registrations:
                raise ApiError(
                    409, "AlreadyRegistered",
                    f"record {body.node_id}@{body.hour} already backs panel "
                    f"{state.registrations[key]}",
                    {"panel_id": state.registrations[key]},
                )
            try:
                panel_id = state.ledger.create_panel(
                    owner=account,
                    latitude=record.latitude,
                    longitude=record.longitude,
                    battery_temp=record.air_temp,
                    dc_power=int(record.p_max),
                    ac_power=int(record.p_reported),
                    ts=state.hour_epoch.get(record.hour, 0),
                )
            except LedgerError as exc:
                raise ledger_error(exc)
            state.registrations[key] = panel_id
            state.panel_source[panel_id] = key
            seq = state.ledger.events[-1].seq
        return {"panel_id": panel_id, "seq": seq, "node_id": body.node_id,
                "hour": body.hour, "owner": account}

    # ------------------------------------------------------------------ market

    @app.post("/api/market/step")
    def market_step(
        body: MarketStepBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        require_account(x_account_id)
        if body.hour not in state.hour_epoch:
            raise ApiError(404, "NoSuchHour", f"hour {body.hour} is outside the benchmark day")
        with state.lock:
            if body.hour in state.applied_hours:
                raise ApiError(
                    409, "HourAlreadyApplied", f"market step for hour {body.hour} already applied",
                    {"seq": state.applied_hours[body.hour]},
                )
            entries = []
            for record in state.records:
                if record.hour != body.hour or record.status != physics.STATUS_VERIFIED:
                    continue
                units = int(round(record.p_reported * 100))
                if units > 0:
                    entries.append((f"own-{record.node_id}", units))
            total = sum(u for _, u in entries)
            demand = sum(f.consumption_units for f in state.factories)
            try:
                seq = state.ledger.update_market_step(
                    entries, total, demand, ts=state.hour_epoch[body.hour]
                )
            except LedgerError as exc:
                raise ledger_error(exc)
            state.applied_hours[body.hour] = seq
        return {
            "hour": body.hour,
            "seq": seq,
            "total_energy_units": total,
            "demand_units": demand,
            "pool_energy_units": state.ledger.global_supply_energy,
        }

    def _market_hours() -> list[dict]:
        hourly = [0.0] * 24
        for record in state.records:
            if record.status == physics.STATUS_VERIFIED:
                hourly[record.hour] += record.p_reported
        series = analytics.liquidity_series(
            [round(w / 1e6, 6) for w in hourly],
            state.analytics_config,
            timestamps=[state.hour_iso.get(h, str(h)) for h in range(24)],
        )
        return [
            {
                "timestamp": h.timestamp,
                "hour": h.hour,
                "total_verified_MW": h.total_verified,
                "SolarChain_liquidity_MW": round(h.solarchain_liquidity, 6),
                "baseline_liquidity_MW": round(h.baseline_liquidity, 6),
                "slippage_SolarChain_pct": round(h.slippage_solarchain, 4),
                "slippage_baseline_pct": round(h.slippage_baseline, 4),
                "applied": h.hour in state.applied_hours,
                "seq": state.applied_hours.get(h.hour),
            }
            for h in series
        ]

    @app.get("/api/market/hours")
    def market_hours():
        return {"hours": [h for h in _market_hours() if h["applied"]]}

    @app.get("/api/analytics/summary")
    def analytics_summary():
        with state.lock:
            missing = [h for h in range(24) if h not in state.applied_hours]
            if missing:
                raise ApiError(
                    409, "PipelineIncomplete",
                    f"{len(missing)} market hours not yet applied",
                    {"missing_hours": missing},
                )
            hours = _market_hours()
            market_objects = analytics.liquidity_series(
                [h["total_verified_MW"] for h in hours],
                state.analytics_config,
                timestamps=[h["timestamp"] for h in hours],
            )
            summary = summary_metrics(
                state.benchmark.nodes, state.records, market_objects,
                state.trades, state.ledger,
            )
        return summary

    # ------------------------------------------------------------------ trades

    @app.get("/api/trades/preview")
    def trade_preview(
        energy_units: int,
        x_account_id: Optional[str] = Header(default=None),
    ):
        if energy_units < 0:
            raise ApiError(422, "InvalidAmount", "energy_units must be nonnegative")
        cost_wei = energy_units * WEI_PER_TOKEN // 100_000
        pool = state.ledger.global_supply_energy
        preview = {
            "energy_units": energy_units,
            "cost_wei": cost_wei,
            "cost_solr": cost_wei / WEI_PER_TOKEN,
            "pool_energy_units": pool,
            "sufficient_supply": energy_units <= pool,
        }
        if x_account_id:
            allowance = state.ledger.allowance(x_account_id, state.ledger.config.exchange_account)
            preview["allowance_wei"] = allowance
            preview["balance_wei"] = state.ledger.balance_of(x_account_id)
            preview["sufficient_allowance"] = allowance >= cost_wei
        return preview

    @app.get("/api/trades")
    def list_trades():
        return {
            "trades": [
                {
                    "trade_id": t.trade_id,
                    "timestamp": t.timestamp,
                    "hour": t.hour,
                    "factory_id": t.factory_id,
                    "city": t.city,
                    "energy_units": t.energy_units,
                    "energy_purchased_MW": round(t.energy_mwh, 6),
                    "tokens_burned": round(t.tokens_burned, 4),
                    "exergy_dissipated_MJ": t.exergy_mj,
                }
                for t in state.trades
            ]
        }

    @app.post("/api/trades", status_code=201)
    def create_trade(
        body: TradeBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        spec, fid = state.resolve_factory(body.factory_id)
        with state.lock:
            if body.hour is not None:
                if body.hour not in state.hour_epoch:
                    raise ApiError(404, "NoSuchHour", f"hour {body.hour} is outside the day")
                ts = state.hour_epoch[body.hour]
                hour = body.hour
            else:
                ts = state.default_epoch()
                hour = max(state.applied_hours) if state.applied_hours else 0
            exergy = round(
                analytics.exergy_of_trade(
                    body.energy_units / 1e8, state.analytics_config.exergy_quality_factor
                ),
                4,
            )
            try:
                trade = state.ledger.buy_energy_for_factory(
                    account, fid, body.energy_units, ts=ts, exergy_mj=exergy
                )
            except LedgerError as exc:
                raise ledger_error(exc)
            record = TradeRecord(
                trade_id=f"TRD-{len(state.trades) + 1:04d}",
                timestamp=state.hour_iso.get(hour, str(hour)),
                hour=hour,
                factory_id=spec.label,
                city=spec.city,
                energy_units=trade.energy_units,
                cost_wei=trade.cost_wei,
                exergy_mj=exergy if trade.energy_units else 0.0,
            )
            if trade.energy_units > 0:
                state.trades.append(record)
        return {
            "trade_id": record.trade_id if trade.energy_units else None,
            "seq": trade.seq,
            "factory_id": spec.label,
            "energy_units": trade.energy_units,
            "cost_wei": trade.cost_wei,
            "tokens_burned": trade.cost_wei / WEI_PER_TOKEN,
            "exergy_dissipated_MJ": record.exergy_mj,
            "pool_energy_units": state.ledger.global_supply_energy,
        }

    # ----------------------------------------------------------------- rewards

    @app.get("/api/rewards/{owner}")
    def rewards(owner: str):
        return {
            "owner": owner,
            "pending_wei": state.ledger.reward_preview(owner),
            "reward_balance_wei": state.ledger.personal_reward_wei.get(owner, 0),
            "last_claim": state.ledger.last_claim.get(owner),
            "cooldown_s": state.ledger.config.reward_cooldown_s,
        }

    @app.post("/api/rewards/claim")
    def claim(
        body: ClaimBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        now = body.now if body.now is not None else state.default_epoch()
        with state.lock:
            try:
                payout = state.ledger.claim_reward(account, now)
            except LedgerError as exc:
                raise ledger_error(exc)
            seq = state.ledger.events[-1].seq
        return {"owner": account, "payout_wei": payout, "seq": seq, "now": now}

    # -------------------------------------------------------------------- token

    @app.post("/api/token/approve")
    def approve(
        body: ApproveBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        with state.lock:
            try:
                seq = state.ledger.approve(account, body.spender, body.amount_wei,
                                           ts=state.default_epoch())
            except LedgerError as exc:
                raise ledger_error(exc)
        return {"owner": account, "spender": body.spender,
                "amount_wei": body.amount_wei, "seq": seq}

    @app.get("/api/token/balance/{owner}")
    def balance(owner: str):
        return {
            "owner": owner,
            "balance_wei": state.ledger.balance_of(owner),
            "total_supply_wei": state.ledger.total_supply,
            "cumulative_burned_wei": state.ledger.cumulative_burned,
        }

    # --------------------------------------------------------------------- shop

    @app.get("/api/shop/listings")
    def listings():
        return {
            "listings": [
                {
                    "item_id": l.item_id,
                    "panel_id": l.panel_id,
                    "seller": l.seller,
                    "ask_wei": l.ask_price,
                    "status": l.status,
                    "offers": dict(l.offers),
                }
                for l in state.ledger.listings.values()
            ]
        }

    @app.post("/api/shop/listings", status_code=201)
    def create_listing(
        body: ListingBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        with state.lock:
            try:
                item_id = state.ledger.list_panel(account, body.panel_id, body.ask_wei,
                                                  ts=state.default_epoch())
            except LedgerError as exc:
                raise ledger_error(exc)
            seq = state.ledger.events[-1].seq
        return {"item_id": item_id, "seq": seq}

    @app.post("/api/shop/offers", status_code=201)
    def create_offer(
        body: OfferBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        with state.lock:
            try:
                seq = state.ledger.place_offer(account, body.item_id, body.amount_wei,
                                               ts=state.default_epoch())
            except LedgerError as exc:
                raise ledger_error(exc)
        return {"item_id": body.item_id, "buyer": account, "seq": seq}

    @app.post("/api/shop/approve")
    def approve_sale(
        body: SaleBody,
        x_account_id: Optional[str] = Header(default=None),
    ):
        account = require_account(x_account_id)
        with state.lock:
            try:
                seq = state.ledger.approve_sale(account, body.item_id, body.buyer,
                                                ts=state.default_epoch())
            except LedgerError as exc:
                raise ledger_error(exc)
        return {"item_id": body.item_id, "buyer": body.buyer, "seq": seq}

    # ------------------------------------------------------------------- events

    @app.get("/api/events")
    def events(since: int = 0, limit: int = 500):
        rows = [e for e in state.ledger.events if e.seq > since][:limit]
        return {
            "events": [
                {"seq": e.seq, "kind": e.kind, "payload": e.payload, "ts": e.ts}
                for e in rows
            ],
            "head": len(state.ledger.events),
        }

    @app.get("/api/events/{seq}")
    def event(seq: int):
        if seq < 1 or seq > len(state.ledger.events):
            raise ApiError(404, "NoSuchEvent", f"no event with seq {seq}")
        e = state.ledger.events[seq - 1]
        return {"seq": e.seq, "kind": e.kind, "payload": e.payload, "ts": e.ts}

    # ------------------------------------------------------------------- static

    if console_dir and os.path.isdir(console_dir):
        app.mount("/ui", StaticFiles(directory=console_dir, html=True), name="console")

        @app.get("/")
        def index():
            return RedirectResponse(url="/ui/")

    return app


def build_state_from_path(data_dir: str, tau: float = 1.0) -> ServiceState:
    return ServiceState(load_dataset(data_dir, tau=tau))


def build_state_from_seed(seed: int = 42) -> ServiceState:
    config = BenchmarkConfig(seed=seed)
    result = run_pipeline(config)
    benchmark = Benchmark(
        nodes=result.nodes, records=result.records,
        market_hours=result.market_hours, trades=result.trades,
    )
    return ServiceState(
        benchmark,
        ledger_config=config.ledger,
        analytics_config=config.analytics,
        factories=result.factories,
        factory_budget_solr=config.factory_budget_solr,
    )
