// Display formatting only; no unit conversions beyond fixed decimal places
// and the wei -> SOLR divide for readouts the API reports in wei.
const WEI_PER_SOLR = 1e18;
export function fmtW(value) {
    return value == null || !Number.isFinite(value) ? "—" : value.toFixed(2);
}
export function fmtMW(value) {
    return value == null ? "—" : value.toFixed(6);
}
export function fmtPct(value, places = 2) {
    return value == null ? "—" : `${value.toFixed(places)}%`;
}
export function fmtRatio(value) {
    return value == null ? "—" : value.toFixed(4);
}
export function fmtKwh(value) {
    return value == null ? "—" : value.toFixed(2);
}
export function fmtSolr(value) {
    return value == null ? "—" : value.toFixed(4);
}
export function fmtSolrFromWei(wei) {
    return wei == null ? "—" : (wei / WEI_PER_SOLR).toFixed(4);
}
export function fmtMJ(value) {
    return value == null ? "—" : value.toFixed(4);
}
export function fmtUnits(value) {
    return value == null ? "—" : String(value);
}
export function fmtCoord(value) {
    return value.toFixed(6);
}
export function escapeHtml(value) {
    return value
        .replace(/&/g, "&amp;")
        .replace(/</g, "&lt;")
        .replace(/>/g, "&gt;")
        .replace(/"/g, "&quot;");
}
