/** Pure HTML renderers: every view is a function of state, no DOM access. */

import { EvidenceItem } from "./api.js";
import { ChatViewState } from "./state.js";

/** Evidence snippets are truncated client-side; expanding is a UI concern. */
export const SNIPPET_LIMIT = 160;

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderTranscript(state: ChatViewState): string {
  if (state.turns.length === 0) {
    return '<div class="transcript empty">No turns yet.</div>';
  }
  const rows = state.turns
    .map(
      (turn, i) => `
  <div class="turn" data-turn="${i + 1}">
    <div class="query">${escapeHtml(turn.query)}</div>
    <div class="response">${escapeHtml(turn.response)}</div>
  </div>`,
    )
    .join("");
  return `<div class="transcript">${rows}\n</div>`;
}

export function renderEvidenceItem(item: EvidenceItem, expanded = false): string {
  const truncated = !expanded && item.payload.length > SNIPPET_LIMIT;
  const snippet = truncated
    ? `${item.payload.slice(0, SNIPPET_LIMIT)}…`
    : item.payload;
  const expandControl = truncated
    ? `<button class="expand" data-doc="${escapeHtml(item.doc_id)}">expand</button>`
    : "";
  return `
  <div class="evidence-item">
    <span class="doc-id">${escapeHtml(item.doc_id)}</span>
    <span class="granularity">${escapeHtml(item.granularity)}</span>
    <span class="score">${item.score.toFixed(4)}</span>
    <div class="payload">${escapeHtml(snippet)}</div>${expandControl}
  </div>`;
}

export function renderEvidencePanel(
  state: ChatViewState,
  expandedDocIds: ReadonlySet<string> = new Set(),
): string {
  if (state.evidence.length === 0) {
    return '<div class="evidence empty">No evidence for the latest response.</div>';
  }
  const rows = state.evidence
    .map((item) => renderEvidenceItem(item, expandedDocIds.has(item.doc_id)))
    .join("");
  return `<div class="evidence">${rows}\n</div>`;
}

export function renderErrorBanner(state: ChatViewState): string {
  if (!state.error) {
    return "";
  }
  return `<div class="error-banner">${escapeHtml(state.error)}</div>`;
}

export function renderChatView(
  state: ChatViewState,
  expandedDocIds: ReadonlySet<string> = new Set(),
): string {
  const pending = state.pending ? '<div class="pending">…waiting</div>' : "";
  return [
    renderErrorBanner(state),
    renderTranscript(state),
    pending,
    renderEvidencePanel(state, expandedDocIds),
  ]
    .filter((part) => part !== "")
    .join("\n");
}
