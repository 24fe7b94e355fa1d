"""Operator entry points: generate, verify, simulate, serve.

Flags take precedence over SOLARCHAIN_* environment variables. Every command
exits 0 only when the invariants it checks hold; failures produce a
machine-parseable summary on stderr and a nonzero exit code.
"""
from __future__ import annotations

import json
import os
import sys

import click

from . import analytics, physics
from .benchmark import (
    Benchmark,
    BenchmarkConfig,
    MARKET_COLUMNS,
    BenchmarkError,
    default_factories,
    load_dataset,
    run_pipeline,
    summary_metrics,
)
from .ledger import Ledger, LedgerConfig, LedgerError, WEI_PER_TOKEN
from .physics import PowerBound


def _fail(code: str, message: str, as_json: bool, **details) -> None:
    payload = {"ok": False, "code": code, "message": message, **details}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


def _file_defaults() -> dict:
    # Lowest-precedence settings file; flags and SOLARCHAIN_* env vars win.
    path = os.environ.get("SOLARCHAIN_CONFIG", "solarchain.json")
    if not os.path.exists(path):
        return {}
    try:
        with open(path) as fp:
            loaded = json.load(fp)
        return loaded if isinstance(loaded, dict) else {}
    except (OSError, json.JSONDecodeError):
        return {}


def _env_default(name: str, fallback):
    value = os.environ.get(f"SOLARCHAIN_{name}")
    if value is not None:
        return value
    return _file_defaults().get(name.lower(), fallback)


@click.group()
def main():
    """Physics-verified PV benchmark and market simulator."""


@main.command()
@click.option("--seed", type=int, default=lambda: int(_env_default("SEED", 42)),
              show_default="42", help="Benchmark RNG seed.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Output directory for the dataset files.")
@click.option("--cities", type=int, default=None,
              help="Use only the first N default cities.")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
def generate(seed: int, out_dir: str, cities: int | None, as_json: bool):
    """Generate the benchmark dataset and print structural counts."""
    try:
        config = BenchmarkConfig(seed=seed)
        if cities is not None:
            subset = config.cities[:cities]
            # Shrink the anomaly plan proportionally to stay under the 5% budget.
            scale = len(subset) / len(config.cities)
            plan = config.anomalies
            from .benchmark import AnomalyPlan

            config = BenchmarkConfig(
                seed=seed,
                cities=subset,
                anomalies=AnomalyPlan(
                    night_time=int(plan.night_time * scale),
                    above_bound=int(plan.above_bound * scale),
                    corrupted=int(plan.corrupted * scale),
                ),
            )
        result = run_pipeline(config, out_dir=out_dir)
    except (BenchmarkError, LedgerError) as exc:
        _fail(type(exc).__name__, str(exc), as_json)
        return
    counts = result.metrics["counts"]
    summary = {
        "ok": True,
        "nodes": counts["nodes"],
        "records": counts["records"],
        "rejected": counts["rejected"],
        "trades": counts["trades"],
        "out": out_dir,
    }
    if as_json:
        click.echo(json.dumps(summary))
    else:
        click.echo(
            f"nodes={counts['nodes']} records={counts['records']} "
            f"rejected={counts['rejected']} trades={counts['trades']}"
        )


def _load(data_dir: str, tau: float, as_json: bool) -> Benchmark | None:
    try:
        return load_dataset(data_dir, tau=tau)
    except BenchmarkError as exc:
        _fail(type(exc).__name__, str(exc), as_json)
        return None


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--tau", type=float, default=1.0, show_default=True,
              help="Tolerance multiplier on the power bound.")
@click.option("--json", "as_json", is_flag=True)
def verify(data_dir: str, tau: float, as_json: bool):
    """Re-run verification on a stored dataset; print the confusion matrix."""
    bench = _load(data_dir, tau, as_json)
    verdicts = [
        physics.verify_record(
            r.p_reported,
            PowerBound(p_max=r.p_max, g_used=r.irradiance, t_used=0.0, thermal_factor=1.0),
            tau,
        )
        for r in bench.records
    ]
    labels = [r.fdia_injected for r in bench.records]
    rejected = [v.status == physics.STATUS_REJECTED for v in verdicts]

    tp = sum(1 for l, r in zip(labels, rejected) if l and r)
    fp = sum(1 for l, r in zip(labels, rejected) if not l and r)
    fn = sum(1 for l, r in zip(labels, rejected) if l and not r)
    tn = sum(1 for l, r in zip(labels, rejected) if not l and not r)
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0

    eligible = [
        (r.p_reported, r.p_max)
        for r, v in zip(bench.records, verdicts)
        if v.status == physics.STATUS_VERIFIED and r.p_max > 0
    ]
    stats = physics.residual_stats(eligible) if len(eligible) >= 2 else None

    report = {
        "ok": True,
        "tau": tau,
        "confusion": {"tp": tp, "fp": fp, "fn": fn, "tn": tn},
        "precision": round(precision, 4),
        "recall": round(recall, 4),
        "f1": round(f1, 4),
        "flagged": tp + fp,
        "residual_stats": {
            "pearson_r": round(stats.pearson_r, 4),
            "mean_ratio": round(stats.mean_ratio, 4),
            "ratio_std": round(stats.ratio_std, 4),
            "mae_w": round(stats.mae, 2),
            "rmse_w": round(stats.rmse, 2),
        } if stats else None,
    }
    if as_json:
        click.echo(json.dumps(report))
    else:
        click.echo(f"confusion: TP={tp} FP={fp} FN={fn} TN={tn}")
        click.echo(f"precision={precision:.3f} recall={recall:.3f} F1={f1:.3f}")
        if stats:
            click.echo(
                f"pearson={stats.pearson_r:.4f} mean_ratio={stats.mean_ratio:.4f} "
                f"std={stats.ratio_std:.4f} mae={stats.mae:.2f}W rmse={stats.rmse:.2f}W"
            )


@main.command()
@click.option("--data", "data_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@click.option("--tau", type=float, default=1.0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
def simulate(data_dir: str, report_path: str, tau: float, as_json: bool):
    """Replay the 24 market steps and stored trades; emit the metrics report."""
    bench = _load(data_dir, tau, as_json)
    ledger = Ledger(LedgerConfig())
    factories = default_factories(BenchmarkConfig())
    factory_ids = {}
    base_ts = 0
    if bench.records:
        from datetime import datetime

        base_ts = int(datetime.fromisoformat(bench.records[0].timestamp).timestamp())
    for factory in factories:
        fid = ledger.create_factory(
            factory.owner, factory.latitude, factory.longitude,
            factory.consumption_units, ts=base_ts,
        )
        factory_ids[factory.label] = fid
        budget = 2000 * WEI_PER_TOKEN
        ledger.mint(factory.owner, budget, ts=base_ts)
        ledger.approve(factory.owner, ledger.config.exchange_account, budget, ts=base_ts)

    demand = sum(f.consumption_units for f in factories)
    for hour in range(24):
        entries = []
        for record in bench.records:
            if record.hour != hour or record.status != physics.STATUS_VERIFIED:
                continue
            units = int(round(record.p_reported * 100))
            if units > 0:
                entries.append((f"own-{record.node_id}", units))
        ledger.update_market_step(entries, sum(u for _, u in entries), demand,
                                  ts=base_ts + hour * 3600)
        for trade in bench.trades:
            if trade.hour != hour:
                continue
            label_to_spec = {f.label: f for f in factories}
            spec = label_to_spec.get(trade.factory_id)
            if spec is None:
                _fail("NoSuchFactory", f"trade {trade.trade_id} references unknown "
                      f"factory {trade.factory_id}", as_json)
            try:
                ledger.buy_energy_for_factory(
                    spec.owner, factory_ids[spec.label], trade.energy_units,
                    ts=base_ts + hour * 3600, exergy_mj=trade.exergy_mj,
                )
            except LedgerError as exc:
                _fail(exc.code, f"replay of {trade.trade_id} failed: {exc}", as_json)

    hourly_mw = [0.0] * 24
    for record in bench.records:
        if record.status == physics.STATUS_VERIFIED:
            hourly_mw[record.hour] += record.p_reported
    hourly_mw = [round(w / 1e6, 6) for w in hourly_mw]
    timestamps = {r.hour: r.timestamp for r in bench.records}
    market_hours = analytics.liquidity_series(
        hourly_mw, analytics.AnalyticsConfig(),
        timestamps=[timestamps.get(h, str(h)) for h in range(24)],
    )
    summary = summary_metrics(bench.nodes, bench.records, market_hours, bench.trades, ledger)
    summary["ok"] = bool(summary["settlement"]["reconciled"])

    with open(report_path, "w") as fp:
        json.dump(summary, fp, indent=2, sort_keys=True)
        fp.write("\n")

    out_csv = os.path.join(os.path.dirname(os.path.abspath(report_path)),
                           "market_liquidity_replayed.csv")
    with open(out_csv, "w") as fp:
        fp.write(",".join(MARKET_COLUMNS) + "\n")
        for h in market_hours:
            fp.write(
                f"{h.timestamp},{h.hour},{h.total_verified:.6f},"
                f"{h.solarchain_liquidity:.6f},{h.baseline_liquidity:.6f},"
                f"{h.slippage_solarchain:.4f},{h.slippage_baseline:.4f}\n"
            )

    if as_json:
        click.echo(json.dumps({
            "ok": summary["ok"],
            "report": report_path,
            "liquidity_csv": out_csv,
            "uplift_pct": summary["market"]["liquidity_uplift_pct"],
            "trades": summary["counts"]["trades"],
        }))
    else:
        click.echo(
            f"replayed 24 market steps, {summary['counts']['trades']} trades; "
            f"uplift={summary['market']['liquidity_uplift_pct']:.1f}% "
            f"reconciled={summary['settlement']['reconciled']}"
        )
    if not summary["ok"]:
        sys.exit(1)


@main.command()
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False),
              default=lambda: _env_default("DATA", None))
@click.option("--seed", type=int, default=None,
              help="Generate the benchmark in memory instead of loading --data.")
@click.option("--port", type=int, default=lambda: int(_env_default("PORT", 8000)),
              show_default="8000")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--console-dir", type=click.Path(file_okay=False), default=None,
              help="Static console assets to serve under /ui.")
def serve(data_dir: str | None, seed: int | None, port: int, host: str,
          console_dir: str | None):
    """Start the HTTP service over a dataset directory or a generated seed."""
    import uvicorn

    from .service import build_state_from_path, build_state_from_seed, create_app

    try:
        if data_dir:
            state = build_state_from_path(data_dir)
        else:
            state = build_state_from_seed(seed if seed is not None else 42)
    except BenchmarkError as exc:
        _fail(type(exc).__name__, str(exc), as_json=True)
        return

    if console_dir is None:
        # src/solarchain/cli.py -> repo root -> frontend/dist (editable installs)
        repo_root = os.path.dirname(os.path.dirname(os.path.dirname(
            os.path.abspath(__file__))))
        bundled = os.path.join(repo_root, "frontend", "dist")
        console_dir = bundled if os.path.isdir(bundled) else None

    app = create_app(state, console_dir=console_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
