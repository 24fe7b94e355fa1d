// Display formatting only; no unit conversions beyond fixed decimal places
// and the wei -> SOLR divide for readouts the API reports in wei.

const WEI_PER_SOLR = 1e18;

export function fmtW(value: number | null | undefined): string {
  return value == null || !Number.isFinite(value) ? "—" : value.toFixed(2);
}

export function fmtMW(value: number | null | undefined): string {
  return value == null ? "—" : value.toFixed(6);
}

export function fmtPct(value: number | null | undefined, places = 2): string {
  return value == null ? "—" : `${value.toFixed(places)}%`;
}

export function fmtRatio(value: number | null | undefined): string {
  return value == null ? "—" : value.toFixed(4);
}

export function fmtKwh(value: number | null | undefined): string {
  return value == null ? "—" : value.toFixed(2);
}

export function fmtSolr(value: number | null | undefined): string {
  return value == null ? "—" : value.toFixed(4);
}

export function fmtSolrFromWei(wei: number | null | undefined): string {
  return wei == null ? "—" : (wei / WEI_PER_SOLR).toFixed(4);
}

export function fmtMJ(value: number | null | undefined): string {
  return value == null ? "—" : value.toFixed(4);
}

export function fmtUnits(value: number | null | undefined): string {
  return value == null ? "—" : String(value);
}

export function fmtCoord(value: number): string {
  return value.toFixed(6);
}

export function escapeHtml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
