// Review screen: filterable verification-evidence table plus the
// registration confirmation modal. Rows with a rejected verdict never render
// an approve control; the anomaly class is shown in its place.
import { escapeHtml, fmtCoord, fmtRatio, fmtW } from "../format.js";
export function renderFilterBar(filters, cities) {
    const cityOptions = ["", ...cities]
        .map((city) => `<option value="${escapeHtml(city)}"${city === filters.city ? " selected" : ""}>` +
        `${city === "" ? "all cities" : escapeHtml(city)}</option>`)
        .join("");
    const statusOptions = ["", "verified", "rejected"]
        .map((status) => `<option value="${status}"${status === filters.status ? " selected" : ""}>` +
        `${status === "" ? "all statuses" : status}</option>`)
        .join("");
    const hourOptions = ["", ...Array.from({ length: 24 }, (_, h) => String(h))]
        .map((hour) => `<option value="${hour}"${hour === filters.hour ? " selected" : ""}>` +
        `${hour === "" ? "all hours" : `${hour}:00`}</option>`)
        .join("");
    return `
    <div class="filter-bar">
      <select data-action="filter-status">${statusOptions}</select>
      <select data-action="filter-city">${cityOptions}</select>
      <select data-action="filter-hour">${hourOptions}</select>
    </div>`;
}
function actionCell(record) {
    if (record.verification_status === "rejected") {
        return `<span class="badge badge-rejected" data-field="anomaly_class">${record.anomaly_class}</span>`;
    }
    if (record.panel_id != null) {
        return `<span class="badge badge-registered" data-field="panel_id">panel #${record.panel_id}</span>`;
    }
    return (`<button class="approve" data-action="open-registration" ` +
        `data-node="${escapeHtml(record.node_id)}" data-hour="${record.hour}">Register</button>`);
}
export function renderReviewTable(records, total) {
    const rows = records
        .map((record) => `
      <tr class="status-${record.verification_status}" data-node="${escapeHtml(record.node_id)}" data-hour="${record.hour}">
        <td>${escapeHtml(record.node_id)}</td>
        <td>${escapeHtml(record.city)}</td>
        <td>${record.hour}:00</td>
        <td data-field="irradiance_Wm2">${fmtW(record.irradiance_Wm2)}</td>
        <td data-field="air_temp_C">${fmtW(record.air_temp_C)}</td>
        <td data-field="P_max_W">${fmtW(record.P_max_W)}</td>
        <td data-field="P_reported_W">${fmtW(record.P_reported_W)}</td>
        <td data-field="ratio">${fmtRatio(record.ratio)}</td>
        <td data-field="verification_status">${record.verification_status}</td>
        <td>${actionCell(record)}</td>
      </tr>`)
        .join("");
    return `
    <table class="records">
      <thead>
        <tr>
          <th>node</th><th>city</th><th>hour</th><th>G (W/m²)</th><th>T (°C)</th>
          <th>P_max (W)</th><th>P_reported (W)</th><th>ratio</th><th>status</th><th></th>
        </tr>
      </thead>
      <tbody>${rows}</tbody>
    </table>
    <p class="table-footer">${records.length} of ${total} records</p>`;
}
export function renderRegistrationModal(record) {
    return `
    <div class="modal" data-node="${escapeHtml(record.node_id)}" data-hour="${record.hour}">
      <h3>Register ${escapeHtml(record.node_id)} @ ${record.hour}:00</h3>
      <dl>
        <dt>location</dt>
        <dd data-field="location">${fmtCoord(record.latitude)}, ${fmtCoord(record.longitude)}</dd>
        <dt>predicted output</dt>
        <dd data-field="P_max_W">${fmtW(record.P_max_W)} W</dd>
        <dt>reported output</dt>
        <dd data-field="P_reported_W">${fmtW(record.P_reported_W)} W</dd>
        <dt>reported / bound</dt>
        <dd data-field="ratio">${fmtRatio(record.ratio)}</dd>
      </dl>
      <button data-action="confirm-registration" data-node="${escapeHtml(record.node_id)}" data-hour="${record.hour}">Confirm registration</button>
      <button data-action="close-modal">Cancel</button>
    </div>`;
}
export function renderRegistrationResult(panelId, seq) {
    return (`<div class="notice" data-field="panel_id" data-seq="${seq}">` +
        `Registered as panel #${panelId} (event seq ${seq})</div>`);
}
export function renderInlineError(code, message, details) {
    const anomaly = typeof details["anomaly_class"] === "string"
        ? ` <span class="badge badge-rejected" data-field="anomaly_class">${escapeHtml(details["anomaly_class"])}</span>`
        : "";
    return `<div class="error" data-code="${escapeHtml(code)}">${escapeHtml(code)}: ${escapeHtml(message)}${anomaly}</div>`;
}
