// Typed fetch client. The console does no ledger arithmetic of its own; every
// number it shows comes back from these calls.

import type {
  ErrorBody,
  Factory,
  MarketHourRow,
  NodeRow,
  PanelCreated,
  RecordsPage,
  StepResult,
  Summary,
  TradePreview,
  TradeReceipt,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public details: Record<string, unknown> = {},
  ) {
    super(message);
  }
}

export interface RecordFilters {
  status?: string;
  city?: string;
  hour?: number;
  cursor?: number;
  page_size?: number;
}

export class ApiClient {
  constructor(
    private baseUrl: string,
    public account: string,
    public role: string = "planner",
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
    params?: Record<string, string | number | undefined>,
  ): Promise<T> {
    const url = new URL(path, this.baseUrl);
    for (const [key, value] of Object.entries(params ?? {})) {
      if (value !== undefined) url.searchParams.set(key, String(value));
    }
    const response = await fetch(url, {
      method,
      headers: {
        "Content-Type": "application/json",
        "X-Account-Id": this.account,
        "X-Account-Role": this.role,
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: Partial<ErrorBody> = {};
      try {
        payload = (await response.json()) as ErrorBody;
      } catch {
        // non-envelope error body; fall through with the status alone
      }
      throw new ApiError(
        response.status,
        payload.code ?? `HTTP${response.status}`,
        payload.message ?? response.statusText,
        payload.details ?? {},
      );
    }
    return (await response.json()) as T;
  }

  health() {
    return this.request<{ status: string; records: number }>("GET", "/api/health");
  }

  records(filters: RecordFilters = {}) {
    return this.request<RecordsPage>("GET", "/api/records", undefined, { ...filters });
  }

  nodes() {
    return this.request<{ nodes: NodeRow[] }>("GET", "/api/nodes");
  }

  factories() {
    return this.request<{ factories: Factory[] }>("GET", "/api/factories");
  }

  registerPanel(nodeId: string, hour: number) {
    return this.request<PanelCreated>("POST", "/api/panels", { node_id: nodeId, hour });
  }

  marketStep(hour: number) {
    return this.request<StepResult>("POST", "/api/market/step", { hour });
  }

  marketHours() {
    return this.request<{ hours: MarketHourRow[] }>("GET", "/api/market/hours");
  }

  summary() {
    return this.request<Summary>("GET", "/api/analytics/summary");
  }

  tradePreview(energyUnits: number) {
    return this.request<TradePreview>("GET", "/api/trades/preview", undefined, {
      energy_units: energyUnits,
    });
  }

  approveSpending(spender: string, amountWei: number) {
    return this.request<{ seq: number }>("POST", "/api/token/approve", {
      spender,
      amount_wei: amountWei,
    });
  }

  trade(factoryId: string | number, energyUnits: number) {
    return this.request<TradeReceipt>("POST", "/api/trades", {
      factory_id: factoryId,
      energy_units: energyUnits,
    });
  }

  rewards(owner: string) {
    return this.request<{
      owner: string;
      pending_wei: number;
      reward_balance_wei: number;
      last_claim: number | null;
      cooldown_s: number;
    }>("GET", `/api/rewards/${owner}`);
  }

  claim(now?: number) {
    return this.request<{ payout_wei: number; seq: number }>("POST", "/api/rewards/claim", {
      now,
    });
  }

  event(seq: number) {
    return this.request<{ seq: number; kind: string; payload: Record<string, unknown>; ts: number }>(
      "GET",
      `/api/events/${seq}`,
    );
  }
}
