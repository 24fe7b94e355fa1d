// Controller: holds screen state, talks to the API client, and re-renders
// whole screens from server responses. Optimistic updates are forbidden;
// every state change waits for the server's event sequence number.

import { ApiClient, ApiError } from "./api.js";
import type { Factory, MarketHourRow, RecordRow, Summary } from "./types.js";
import {
  renderFilterBar,
  renderInlineError,
  renderRegistrationModal,
  renderRegistrationResult,
  renderReviewTable,
  type ReviewFilters,
} from "./views/review.js";
import { renderPurchaseScreen, type PurchaseState } from "./views/purchase.js";
import { renderAnalytics } from "./views/analytics.js";

const EXCHANGE_SPENDER = "exchange";
const DEFAULT_APPROVAL_WEI = 1e21; // 1000 SOLR of spending allowance

type Screen = "review" | "purchase" | "analytics";

export class ConsoleApp {
  screen: Screen = "review";
  filters: ReviewFilters = { status: "", city: "", hour: "" };
  records: RecordRow[] = [];
  recordTotal = 0;
  cities: string[] = [];
  factories: Factory[] = [];
  purchase: PurchaseState = {
    selected: null,
    energyUnits: 0,
    preview: null,
    receipt: null,
    error: null,
  };
  summary: Summary | null = null;
  marketHours: MarketHourRow[] = [];
  nextHour = 0;
  notice = "";
  modal: RecordRow | null = null;

  constructor(
    public client: ApiClient,
    private root: HTMLElement,
  ) {}

  async start(): Promise<void> {
    const nodes = await this.client.nodes();
    this.cities = [...new Set(nodes.nodes.map((n) => n.city))];
    this.factories = (await this.client.factories()).factories;
    this.purchase.selected = this.factories[0]?.label ?? null;
    await this.loadRecords();
    this.bind();
    this.render();
  }

  async loadRecords(): Promise<void> {
    const page = await this.client.records({
      status: this.filters.status || undefined,
      city: this.filters.city || undefined,
      hour: this.filters.hour === "" ? undefined : Number(this.filters.hour),
      page_size: 500,
    });
    this.records = page.records;
    this.recordTotal = page.total;
  }

  async advanceHour(): Promise<void> {
    try {
      const step = await this.client.marketStep(this.nextHour);
      this.notice = `hour ${step.hour} applied (seq ${step.seq}, pool ${step.pool_energy_units} units)`;
      this.nextHour += 1;
    } catch (error) {
      this.notice = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      if (error instanceof ApiError && error.code === "HourAlreadyApplied") this.nextHour += 1;
    }
    this.marketHours = (await this.client.marketHours()).hours;
    this.render();
  }

  async refreshPreview(): Promise<void> {
    if (this.purchase.energyUnits > 0) {
      this.purchase.preview = await this.client.tradePreview(this.purchase.energyUnits);
    } else {
      this.purchase.preview = null;
    }
  }

  async confirmPurchase(): Promise<void> {
    if (this.purchase.selected === null) return;
    try {
      this.purchase.receipt = await this.client.trade(
        this.purchase.selected,
        this.purchase.energyUnits,
      );
      this.purchase.error = null;
      await this.refreshPreview();
    } catch (error) {
      this.purchase.error =
        error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    }
    this.render();
  }

  async loadAnalytics(): Promise<void> {
    try {
      this.summary = await this.client.summary();
      this.marketHours = (await this.client.marketHours()).hours;
      this.notice = "";
    } catch (error) {
      this.summary = null;
      this.notice = error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    }
    this.render();
  }

  private bind(): void {
    this.root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      const action = target.dataset["action"];
      if (!action) return;
      void this.dispatch(action, target);
    });
    this.root.addEventListener("change", (event) => {
      const target = event.target as HTMLInputElement | HTMLSelectElement;
      const action = target.dataset["action"];
      if (!action) return;
      if (action === "filter-status") this.filters.status = target.value;
      if (action === "filter-city") this.filters.city = target.value;
      if (action === "filter-hour") this.filters.hour = target.value;
      if (action.startsWith("filter-")) {
        void this.loadRecords().then(() => this.render());
      }
      if (action === "select-factory") {
        this.purchase.selected = target.value;
        this.render();
      }
      if (action === "energy-input") {
        this.purchase.energyUnits = Number(target.value) || 0;
        void this.refreshPreview().then(() => this.render());
      }
    });
  }

  private async dispatch(action: string, target: HTMLElement): Promise<void> {
    if (action === "tab-review") this.screen = "review";
    if (action === "tab-purchase") this.screen = "purchase";
    if (action === "tab-analytics") {
      this.screen = "analytics";
      await this.loadAnalytics();
      return;
    }
    if (action === "advance-hour") {
      await this.advanceHour();
      return;
    }
    if (action === "open-registration") {
      const node = target.dataset["node"]!;
      const hour = Number(target.dataset["hour"]);
      this.modal = this.records.find((r) => r.node_id === node && r.hour === hour) ?? null;
    }
    if (action === "close-modal") this.modal = null;
    if (action === "confirm-registration" && this.modal) {
      try {
        const created = await this.client.registerPanel(this.modal.node_id, this.modal.hour);
        this.notice = renderRegistrationResult(created.panel_id, created.seq);
        this.modal = null;
        await this.loadRecords();
      } catch (error) {
        this.notice =
          error instanceof ApiError
            ? renderInlineError(error.code, error.message, error.details)
            : String(error);
      }
    }
    if (action === "approve-spending") {
      try {
        await this.client.approveSpending(EXCHANGE_SPENDER, DEFAULT_APPROVAL_WEI);
        this.purchase.error = null;
      } catch (error) {
        this.purchase.error =
          error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
      }
    }
    if (action === "confirm-purchase") {
      await this.confirmPurchase();
      return;
    }
    this.render();
  }

  render(): void {
    const tabs = `
      <nav>
        <button data-action="tab-review"${this.screen === "review" ? ' class="active"' : ""}>Review</button>
        <button data-action="tab-purchase"${this.screen === "purchase" ? ' class="active"' : ""}>Purchase</button>
        <button data-action="tab-analytics"${this.screen === "analytics" ? ' class="active"' : ""}>Analytics</button>
        <button data-action="advance-hour">Advance hour (${this.nextHour})</button>
        <span class="account">acting as ${this.client.account} (${this.client.role})</span>
      </nav>`;

    let body = "";
    if (this.screen === "review") {
      body =
        renderFilterBar(this.filters, this.cities) +
        renderReviewTable(this.records, this.recordTotal) +
        (this.modal ? renderRegistrationModal(this.modal) : "");
    } else if (this.screen === "purchase") {
      body = renderPurchaseScreen(this.factories, this.purchase);
    } else if (this.summary) {
      body = renderAnalytics(this.summary, this.marketHours);
    } else {
      body = `<p class="empty">analytics needs all 24 market hours applied</p>`;
    }

    this.root.innerHTML = `${tabs}<div class="notice-bar">${this.notice}</div>${body}`;
  }
}
