// Payload shapes of the JSON API. Field names mirror the CSV columns where a
// column counterpart exists.

export interface RecordRow {
  node_id: string;
  city: string;
  hour: number;
  timestamp: string;
  latitude: number;
  longitude: number;
  irradiance_Wm2: number;
  air_temp_C: number;
  P_max_W: number;
  P_reported_W: number | null;
  fdia_detected: boolean;
  verification_status: "verified" | "rejected";
  anomaly_class: "none" | "night_time" | "above_bound" | "corrupted";
  residual_W: number | null;
  ratio: number | null;
  panel_id: number | null;
}

export interface RecordsPage {
  records: RecordRow[];
  total: number;
  cursor: number;
  next_cursor: number | null;
}

export interface NodeRow {
  node_id: string;
  city: string;
  latitude: number;
  longitude: number;
  panel_area_m2: number;
  efficiency: number;
  temp_coefficient: number;
  install_date: string;
  capacity_kw: number;
  panels: { panel_id: number; owner: string; hour: number; dc_power_W: number; ac_power_W: number }[];
}

export interface Factory {
  factory_id: number;
  label: string;
  city: string;
  owner: string;
  latitude: number;
  longitude: number;
  power_consumption_units: number;
  energy_balance_units: number;
}

export interface TradePreview {
  energy_units: number;
  cost_wei: number;
  cost_solr: number;
  pool_energy_units: number;
  sufficient_supply: boolean;
  allowance_wei?: number;
  balance_wei?: number;
  sufficient_allowance?: boolean;
}

export interface TradeReceipt {
  trade_id: string | null;
  seq: number | null;
  factory_id: string;
  energy_units: number;
  cost_wei: number;
  tokens_burned: number;
  exergy_dissipated_MJ: number;
  pool_energy_units: number;
}

export interface MarketHourRow {
  timestamp: string;
  hour: number;
  total_verified_MW: number;
  SolarChain_liquidity_MW: number;
  baseline_liquidity_MW: number;
  slippage_SolarChain_pct: number;
  slippage_baseline_pct: number;
  applied: boolean;
  seq: number | null;
}

export interface StepResult {
  hour: number;
  seq: number;
  total_energy_units: number;
  demand_units: number;
  pool_energy_units: number;
}

export interface CityRow {
  city: string;
  capacity_kw: number;
  verified_kwh: number;
  peak_kw: number;
  capacity_factor_pct: number;
}

export interface Summary {
  counts: {
    nodes: number;
    records: number;
    verified: number;
    rejected: number;
    injected: number;
    trades: number;
    anomalies: Record<string, number>;
  };
  verification: {
    precision: number;
    recall: number;
    f1: number;
    verified_kwh: number;
    rejected_kwh: number;
    inflation_prevented_pct: number;
    residual_stats: {
      pearson_r: number;
      mean_ratio: number;
      ratio_std: number;
      mae_w: number;
      rmse_w: number;
    } | null;
  };
  cities: CityRow[];
  market: {
    avg_liquidity_solarchain_mw: number;
    avg_liquidity_baseline_mw: number;
    peak_liquidity_solarchain_mw: number;
    peak_liquidity_baseline_mw: number;
    liquidity_area_solarchain_mwh: number;
    liquidity_area_baseline_mwh: number;
    avg_slippage_solarchain_pct: number;
    avg_slippage_baseline_pct: number;
    daylight_slippage_solarchain_pct: number;
    daylight_slippage_baseline_pct: number;
    liquidity_uplift_pct: number;
  };
  settlement: {
    cities: Record<string, { trades: number; volume_mwh: number; solr_burned: number; exergy_mj: number }>;
    totals: { trades: number; volume_mwh: number; solr_burned: number; exergy_mj: number; cost_wei: number };
    reconciled: boolean;
  };
  ledger: {
    total_supply_wei: number;
    cumulative_minted_wei: number;
    cumulative_burned_wei: number;
    pool_energy_units: number;
    events: number;
  };
}

export interface PanelCreated {
  panel_id: number;
  seq: number;
  node_id: string;
  hour: number;
  owner: string;
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}
