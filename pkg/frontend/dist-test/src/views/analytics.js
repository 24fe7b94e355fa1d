// Analytics screen: dual-series liquidity chart, slippage chart, per-city
// settlement table, and the verification badges. Charts are hand-rolled SVG
// polylines over the hourly market rows.
import { escapeHtml, fmtKwh, fmtMW, fmtPct, fmtRatio, fmtSolr, fmtMJ } from "../format.js";
const CHART_WIDTH = 480;
const CHART_HEIGHT = 160;
const MARGIN = 8;
export function chartPoints(values, maxValue) {
    if (values.length === 0)
        return "";
    const span = Math.max(maxValue, 1e-9);
    const stepX = (CHART_WIDTH - 2 * MARGIN) / Math.max(values.length - 1, 1);
    return values
        .map((value, index) => {
        const x = MARGIN + index * stepX;
        const y = CHART_HEIGHT - MARGIN - (value / span) * (CHART_HEIGHT - 2 * MARGIN);
        return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
        .join(" ");
}
function dualSeriesChart(title, hours, pick, cssClass) {
    const primary = hours.map((h) => pick(h)[0]);
    const secondary = hours.map((h) => pick(h)[1]);
    const top = Math.max(...primary, ...secondary, 1e-9);
    return `
    <figure class="chart ${cssClass}">
      <figcaption>${escapeHtml(title)}</figcaption>
      <svg viewBox="0 0 ${CHART_WIDTH} ${CHART_HEIGHT}" role="img">
        <polyline class="series-solarchain" fill="none"
                  points="${chartPoints(primary, top)}"></polyline>
        <polyline class="series-baseline" fill="none"
                  points="${chartPoints(secondary, top)}"></polyline>
      </svg>
    </figure>`;
}
export function renderBadges(summary) {
    const stats = summary.verification.residual_stats;
    return `
    <div class="badges">
      <span class="badge" data-field="f1">F1 ${summary.verification.f1.toFixed(3)}</span>
      <span class="badge" data-field="inflation_prevented_pct">inflation prevented ${fmtPct(summary.verification.inflation_prevented_pct)}</span>
      <span class="badge" data-field="verified_kwh">verified ${fmtKwh(summary.verification.verified_kwh)} kWh</span>
      <span class="badge" data-field="liquidity_uplift_pct">liquidity uplift ${fmtPct(summary.market.liquidity_uplift_pct, 1)}</span>
      ${stats ? `<span class="badge" data-field="mean_ratio">mean ratio ${fmtRatio(stats.mean_ratio)}</span>` : ""}
    </div>`;
}
export function renderSettlementTable(summary) {
    const rows = Object.entries(summary.settlement.cities)
        .map(([city, row]) => `
      <tr data-city="${escapeHtml(city)}">
        <td>${escapeHtml(city)}</td>
        <td data-field="trades">${row.trades}</td>
        <td data-field="volume_mwh">${row.volume_mwh.toFixed(4)}</td>
        <td data-field="solr_burned">${fmtSolr(row.solr_burned)}</td>
        <td data-field="exergy_mj">${fmtMJ(row.exergy_mj)}</td>
      </tr>`)
        .join("");
    const totals = summary.settlement.totals;
    return `
    <table class="settlement">
      <thead><tr><th>city</th><th>trades</th><th>volume (MWh)</th><th>SOLR burned</th><th>exergy (MJ)</th></tr></thead>
      <tbody>${rows}</tbody>
      <tfoot>
        <tr class="${summary.settlement.reconciled ? "reconciled" : "unreconciled"}">
          <td>total</td>
          <td data-field="total_trades">${totals.trades}</td>
          <td data-field="total_volume_mwh">${totals.volume_mwh.toFixed(4)}</td>
          <td data-field="total_solr_burned">${fmtSolr(totals.solr_burned)}</td>
          <td data-field="total_exergy_mj">${fmtMJ(totals.exergy_mj)}</td>
        </tr>
      </tfoot>
    </table>`;
}
export function renderCityTable(summary) {
    const rows = summary.cities
        .map((row) => `
      <tr data-city="${escapeHtml(row.city)}">
        <td>${escapeHtml(row.city)}</td>
        <td data-field="capacity_kw">${row.capacity_kw.toFixed(2)}</td>
        <td data-field="verified_kwh">${fmtKwh(row.verified_kwh)}</td>
        <td data-field="peak_kw">${row.peak_kw.toFixed(2)}</td>
        <td data-field="capacity_factor_pct">${fmtPct(row.capacity_factor_pct)}</td>
      </tr>`)
        .join("");
    return `
    <table class="cities">
      <thead><tr><th>city</th><th>capacity (kW)</th><th>verified (kWh)</th><th>peak (kW)</th><th>cap. factor</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}
export function renderMarketHoursTable(hours) {
    const rows = hours
        .map((h) => `
      <tr data-hour="${h.hour}">
        <td>${h.hour}:00</td>
        <td data-field="total_verified_MW">${fmtMW(h.total_verified_MW)}</td>
        <td data-field="SolarChain_liquidity_MW">${fmtMW(h.SolarChain_liquidity_MW)}</td>
        <td data-field="baseline_liquidity_MW">${fmtMW(h.baseline_liquidity_MW)}</td>
        <td data-field="slippage_SolarChain_pct">${fmtPct(h.slippage_SolarChain_pct, 4)}</td>
        <td data-field="slippage_baseline_pct">${fmtPct(h.slippage_baseline_pct, 4)}</td>
      </tr>`)
        .join("");
    return `
    <table class="market-hours">
      <thead><tr><th>hour</th><th>verified (MW)</th><th>pool (MW)</th><th>baseline (MW)</th><th>slippage</th><th>baseline slippage</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}
export function renderAnalytics(summary, hours) {
    return `
    <section class="analytics">
      ${renderBadges(summary)}
      ${dualSeriesChart("Hourly liquidity: forced split vs. no-split baseline (MW)", hours, (h) => [h.SolarChain_liquidity_MW, h.baseline_liquidity_MW], "liquidity-chart")}
      ${dualSeriesChart("Hourly slippage of the reference trade (%)", hours, (h) => [h.slippage_SolarChain_pct, h.slippage_baseline_pct], "slippage-chart")}
      <h3>City generation</h3>
      ${renderCityTable(summary)}
      <h3>Settlement</h3>
      ${renderSettlementTable(summary)}
      <h3>Market hours</h3>
      ${renderMarketHoursTable(hours)}
    </section>`;
}
