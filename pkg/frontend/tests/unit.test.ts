// View-layer tests: formatting, approve-control gating, chart geometry, and
// the purchase confirm conditions. Pure string rendering, no DOM required.

import assert from "node:assert/strict";
import { test } from "node:test";

import { fmtMW, fmtPct, fmtRatio, fmtSolr, fmtSolrFromWei, fmtW } from "../src/format.js";
import { chartPoints, renderAnalytics } from "../src/views/analytics.js";
import { confirmDisabled, renderPreview, renderPurchaseScreen } from "../src/views/purchase.js";
import { renderInlineError, renderRegistrationModal, renderReviewTable } from "../src/views/review.js";
import type { Factory, MarketHourRow, RecordRow, Summary, TradePreview } from "../src/types.js";

function record(overrides: Partial<RecordRow> = {}): RecordRow {
  return {
    node_id: "BEI-001",
    city: "Beijing",
    hour: 12,
    timestamp: "2026-05-01T12:00:00+08:00",
    latitude: 39.955172,
    longitude: 116.415554,
    irradiance_Wm2: 612.5,
    air_temp_C: 21.37,
    P_max_W: 4980.11,
    P_reported_W: 4861.4,
    fdia_detected: false,
    verification_status: "verified",
    anomaly_class: "none",
    residual_W: 118.71,
    ratio: 0.9762,
    panel_id: null,
    ...overrides,
  };
}

test("formatting fixes decimal places", () => {
  assert.equal(fmtW(4980.1), "4980.10");
  assert.equal(fmtW(null), "—");
  assert.equal(fmtW(Number.NaN), "—");
  assert.equal(fmtMW(0.0214), "0.021400");
  assert.equal(fmtPct(6.98), "6.98%");
  assert.equal(fmtRatio(0.9783), "0.9783");
  assert.equal(fmtSolr(1), "1.0000");
  assert.equal(fmtSolrFromWei(2.5e18), "2.5000");
});

test("verified unregistered rows render an approve control", () => {
  const html = renderReviewTable([record()], 1);
  assert.match(html, /data-action="open-registration"/);
  assert.match(html, /data-node="BEI-001"/);
});

test("rejected rows have no approve control and show the anomaly class", () => {
  const html = renderReviewTable(
    [record({ verification_status: "rejected", anomaly_class: "night_time" })],
    1,
  );
  assert.doesNotMatch(html, /open-registration/);
  assert.match(html, /data-field="anomaly_class">night_time</);
});

test("registered rows show the panel badge instead of the control", () => {
  const html = renderReviewTable([record({ panel_id: 17 })], 1);
  assert.doesNotMatch(html, /open-registration/);
  assert.match(html, /panel #17/);
});

test("registration modal shows location and predicted output verbatim", () => {
  const html = renderRegistrationModal(record());
  assert.match(html, /39\.955172, 116\.415554/);
  assert.match(html, /data-field="P_max_W">4980\.11 W</);
});

test("server errors surface their code and anomaly class inline", () => {
  const html = renderInlineError("RecordRejected", "cannot back a panel", {
    anomaly_class: "above_bound",
  });
  assert.match(html, /data-code="RecordRejected"/);
  assert.match(html, /above_bound/);
});

function preview(overrides: Partial<TradePreview> = {}): TradePreview {
  return {
    energy_units: 100000,
    cost_wei: 1e18,
    cost_solr: 1.0,
    pool_energy_units: 5_000_000,
    sufficient_supply: true,
    ...overrides,
  };
}

const FACTORY: Factory = {
  factory_id: 1,
  label: "FAC-BJ-01",
  city: "Beijing",
  owner: "fac-bj-01",
  latitude: 39.9,
  longitude: 116.4,
  power_consumption_units: 12_000_000,
  energy_balance_units: 0,
};

test("preview shows the server-computed cost", () => {
  const html = renderPreview(preview());
  assert.match(html, /data-field="cost_solr">1\.0000 SOLR</);
  assert.match(html, /data-field="energy_units">100000 units</);
});

test("confirm is disabled for zero amounts", () => {
  assert.equal(
    confirmDisabled({ selected: "FAC-BJ-01", energyUnits: 0, preview: preview(), receipt: null, error: null }),
    true,
  );
});

test("confirm is disabled when the pool cannot cover the trade", () => {
  const state = {
    selected: "FAC-BJ-01",
    energyUnits: 100000,
    preview: preview({ sufficient_supply: false }),
    receipt: null,
    error: null,
  };
  assert.equal(confirmDisabled(state), true);
  const html = renderPurchaseScreen([FACTORY], state);
  assert.match(html, /data-action="confirm-purchase" disabled/);
  assert.match(html, /InsufficientSupply/);
});

test("confirm is enabled for a covered positive amount", () => {
  const state = {
    selected: "FAC-BJ-01",
    energyUnits: 100000,
    preview: preview(),
    receipt: null,
    error: null,
  };
  assert.equal(confirmDisabled(state), false);
  const html = renderPurchaseScreen([FACTORY], state);
  assert.match(html, /data-action="confirm-purchase">/);
});

function marketHour(hour: number): MarketHourRow {
  return {
    timestamp: `2026-05-01T${String(hour).padStart(2, "0")}:00:00+08:00`,
    hour,
    total_verified_MW: 0.01 * hour,
    SolarChain_liquidity_MW: 0.018 + 0.0075 * hour,
    baseline_liquidity_MW: 0.008 + 0.005 * hour,
    slippage_SolarChain_pct: 2.0,
    slippage_baseline_pct: 5.0,
    applied: true,
    seq: hour + 1,
  };
}

test("chart polylines carry one point per hour", () => {
  const points = chartPoints(Array.from({ length: 24 }, (_, h) => h), 23);
  assert.equal(points.split(" ").length, 24);
});

const SUMMARY: Summary = {
  counts: {
    nodes: 50, records: 1200, verified: 1140, rejected: 60, injected: 60, trades: 42,
    anomalies: { night_time: 28, above_bound: 26, corrupted: 6 },
  },
  verification: {
    precision: 1, recall: 1, f1: 1, verified_kwh: 1888.84, rejected_kwh: 134.04,
    inflation_prevented_pct: 7.1,
    residual_stats: { pearson_r: 0.9997, mean_ratio: 0.9763, ratio_std: 0.0124, mae_w: 72.96, rmse_w: 98.43 },
  },
  cities: [
    { city: "Beijing", capacity_kw: 83.03, verified_kwh: 370.63, peak_kw: 46.23, capacity_factor_pct: 18.6 },
  ],
  market: {
    avg_liquidity_solarchain_mw: 0.077, avg_liquidity_baseline_mw: 0.047,
    peak_liquidity_solarchain_mw: 0.197, peak_liquidity_baseline_mw: 0.127,
    liquidity_area_solarchain_mwh: 1.849, liquidity_area_baseline_mwh: 1.136,
    avg_slippage_solarchain_pct: 5.22, avg_slippage_baseline_pct: 10.07,
    daylight_slippage_solarchain_pct: 2.24, daylight_slippage_baseline_pct: 3.76,
    liquidity_uplift_pct: 62.67,
  },
  settlement: {
    cities: { Beijing: { trades: 7, volume_mwh: 0.1235, solr_burned: 123.5, exergy_mj: 12.14 } },
    totals: { trades: 42, volume_mwh: 0.7679, solr_burned: 767.9, exergy_mj: 75.47, cost_wei: 0 },
    reconciled: true,
  },
  ledger: {
    total_supply_wei: 0, cumulative_minted_wei: 0, cumulative_burned_wei: 0,
    pool_energy_units: 0, events: 100,
  },
};

test("analytics screen renders two 24-point series and the summary fields", () => {
  const hours = Array.from({ length: 24 }, (_, h) => marketHour(h));
  const html = renderAnalytics(SUMMARY, hours);
  const polylines = html.match(/<polyline[^>]*points="([^"]*)"/g) ?? [];
  assert.equal(polylines.length, 4); // two charts, two series each
  for (const line of polylines) {
    const points = /points="([^"]*)"/.exec(line)![1]!;
    assert.equal(points.split(" ").length, 24);
  }
  assert.match(html, /F1 1\.000/);
  assert.match(html, /inflation prevented 7\.10%/);
  assert.match(html, /liquidity uplift 62\.7%/);
  assert.match(html, /data-field="capacity_factor_pct">18\.60%/);
  assert.match(html, /data-field="total_solr_burned">767\.9000/);
});
