// Purchase screen: factory selector, energy amount, server-computed cost
// preview, and the burn receipt. The confirm control stays disabled until the
// server preview says the pool and allowance can cover the trade.
import { escapeHtml, fmtMJ, fmtSolr, fmtSolrFromWei, fmtUnits } from "../format.js";
export function renderFactorySelect(factories, selected) {
    const options = factories
        .map((factory) => `<option value="${escapeHtml(factory.label)}"${factory.label === selected ? " selected" : ""}>` +
        `${escapeHtml(factory.label)} — ${escapeHtml(factory.city)}</option>`)
        .join("");
    return `<select data-action="select-factory">${options}</select>`;
}
export function renderPreview(preview) {
    if (preview === null) {
        return `<div class="preview empty">enter an energy amount to preview the burn</div>`;
    }
    const supplyNote = preview.sufficient_supply
        ? ""
        : `<p class="error" data-code="InsufficientSupply">InsufficientSupply: pool holds ` +
            `<span data-field="pool_energy_units">${fmtUnits(preview.pool_energy_units)}</span> units</p>`;
    return `
    <div class="preview">
      <dl>
        <dt>energy</dt><dd data-field="energy_units">${fmtUnits(preview.energy_units)} units</dd>
        <dt>cost</dt><dd data-field="cost_solr">${fmtSolr(preview.cost_solr)} SOLR</dd>
        <dt>pool depth</dt><dd data-field="pool_energy_units">${fmtUnits(preview.pool_energy_units)} units</dd>
      </dl>
      ${supplyNote}
    </div>`;
}
export function confirmDisabled(state) {
    return (state.selected === null ||
        state.energyUnits <= 0 ||
        state.preview === null ||
        !state.preview.sufficient_supply);
}
export function renderPurchaseScreen(factories, state) {
    const disabled = confirmDisabled(state) ? " disabled" : "";
    const receipt = state.receipt
        ? `
    <div class="receipt">
      <h4>burn receipt <span data-field="trade_id">${escapeHtml(state.receipt.trade_id ?? "")}</span></h4>
      <dl>
        <dt>tokens burned</dt><dd data-field="tokens_burned">${fmtSolr(state.receipt.tokens_burned)} SOLR</dd>
        <dt>cost (wei)</dt><dd data-field="cost_wei">${fmtSolrFromWei(state.receipt.cost_wei)} SOLR</dd>
        <dt>exergy</dt><dd data-field="exergy_dissipated_MJ">${fmtMJ(state.receipt.exergy_dissipated_MJ)} MJ</dd>
        <dt>event seq</dt><dd data-field="seq">${state.receipt.seq ?? "—"}</dd>
      </dl>
    </div>`
        : "";
    const error = state.error ? `<div class="error">${escapeHtml(state.error)}</div>` : "";
    return `
    <section class="purchase">
      ${renderFactorySelect(factories, state.selected)}
      <input type="number" min="0" step="100" value="${state.energyUnits}"
             data-action="energy-input" placeholder="energy units (0.01 Wh each)">
      <button data-action="approve-spending">Approve spending</button>
      <button data-action="confirm-purchase"${disabled}>Confirm purchase</button>
      ${renderPreview(state.preview)}
      ${receipt}
      ${error}
    </section>`;
}
