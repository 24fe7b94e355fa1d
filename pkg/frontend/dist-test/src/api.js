// Typed fetch client. The console does no ledger arithmetic of its own; every
// number it shows comes back from these calls.
export class ApiError extends Error {
    constructor(status, code, message, details = {}) {
        super(message);
        this.status = status;
        this.code = code;
        this.details = details;
    }
}
export class ApiClient {
    constructor(baseUrl, account, role = "planner") {
        this.baseUrl = baseUrl;
        this.account = account;
        this.role = role;
    }
    async request(method, path, body, params) {
        const url = new URL(path, this.baseUrl);
        for (const [key, value] of Object.entries(params ?? {})) {
            if (value !== undefined)
                url.searchParams.set(key, String(value));
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
            let payload = {};
            try {
                payload = (await response.json());
            }
            catch {
                // non-envelope error body; fall through with the status alone
            }
            throw new ApiError(response.status, payload.code ?? `HTTP${response.status}`, payload.message ?? response.statusText, payload.details ?? {});
        }
        return (await response.json());
    }
    health() {
        return this.request("GET", "/api/health");
    }
    records(filters = {}) {
        return this.request("GET", "/api/records", undefined, { ...filters });
    }
    nodes() {
        return this.request("GET", "/api/nodes");
    }
    factories() {
        return this.request("GET", "/api/factories");
    }
    registerPanel(nodeId, hour) {
        return this.request("POST", "/api/panels", { node_id: nodeId, hour });
    }
    marketStep(hour) {
        return this.request("POST", "/api/market/step", { hour });
    }
    marketHours() {
        return this.request("GET", "/api/market/hours");
    }
    summary() {
        return this.request("GET", "/api/analytics/summary");
    }
    tradePreview(energyUnits) {
        return this.request("GET", "/api/trades/preview", undefined, {
            energy_units: energyUnits,
        });
    }
    approveSpending(spender, amountWei) {
        return this.request("POST", "/api/token/approve", {
            spender,
            amount_wei: amountWei,
        });
    }
    trade(factoryId, energyUnits) {
        return this.request("POST", "/api/trades", {
            factory_id: factoryId,
            energy_units: energyUnits,
        });
    }
    rewards(owner) {
        return this.request("GET", `/api/rewards/${owner}`);
    }
    claim(now) {
        return this.request("POST", "/api/rewards/claim", {
            now,
        });
    }
    event(seq) {
        return this.request("GET", `/api/events/${seq}`);
    }
}
