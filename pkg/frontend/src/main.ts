/** DOM wiring: the only module that touches `document`. */

import { ApiClient } from "./api.js";
import { renderDashboard } from "./dashboard.js";
import { renderChatView } from "./render.js";
import { ChatController } from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export function startApp(baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  const sessionId = `web-${Math.random().toString(36).slice(2, 10)}`;
  const expanded = new Set<string>();

  const chatView = el<HTMLDivElement>("chat-view");
  const input = el<HTMLInputElement>("chat-input");
  const sendButton = el<HTMLButtonElement>("chat-send");
  const resetButton = el<HTMLButtonElement>("chat-reset");

  const controller = new ChatController(api, sessionId, (state) => {
    chatView.innerHTML = renderChatView(state, expanded);
    sendButton.disabled = state.pending;
    input.disabled = state.pending;
  });

  chatView.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("expand") && target.dataset.doc) {
      expanded.add(target.dataset.doc);
      chatView.innerHTML = renderChatView(controller.state, expanded);
    }
  });

  async function submit(): Promise<void> {
    const query = input.value;
    const outcome = await controller.send(query);
    if (outcome.accepted && !controller.state.error) {
      input.value = "";
      expanded.clear();
    }
  }

  sendButton.addEventListener("click", () => void submit());
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") {
      void submit();
    }
  });
  resetButton.addEventListener("click", () => void controller.reset());

  // backtest dashboard
  const dashboardView = el<HTMLDivElement>("dashboard-view");
  const scenarioInput = el<HTMLInputElement>("scenario-id");
  const rfInput = el<HTMLInputElement>("rf-input");
  const fromInput = el<HTMLInputElement>("from-month");
  const toInput = el<HTMLInputElement>("to-month");
  const benchmarkToggle = el<HTMLInputElement>("benchmark-toggle");
  const runButton = el<HTMLButtonElement>("run-backtest");

  let lastReport: unknown = null;

  function renderReport(): void {
    if (lastReport !== null) {
      dashboardView.innerHTML = renderDashboard(lastReport, {
        showBenchmark: benchmarkToggle.checked,
      });
    }
  }

  runButton.addEventListener("click", async () => {
    runButton.disabled = true;
    try {
      lastReport = await api.backtest({
        scenario: scenarioInput.value || undefined,
        rf: rfInput.value ? Number(rfInput.value) : undefined,
        from_month: fromInput.value || undefined,
        to_month: toInput.value || undefined,
      });
      renderReport();
    } catch (error) {
      dashboardView.innerHTML = `<div class="error-banner">${String(error)}</div>`;
    } finally {
      runButton.disabled = false;
    }
  });
  benchmarkToggle.addEventListener("change", renderReport);
}

if (typeof document !== "undefined" && document.getElementById("chat-view")) {
  startApp();
}
