import { ApiClient } from "./api.js";
import { ConsoleApp } from "./app.js";

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app mount point");
  const params = new URLSearchParams(window.location.search);
  const account = params.get("account") ?? "planner-1";
  const role = params.get("role") ?? "planner";
  const client = new ApiClient(window.location.origin, account, role);
  const app = new ConsoleApp(client, root);
  void app.start();
}

window.addEventListener("DOMContentLoaded", boot);
