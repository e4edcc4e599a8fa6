/** Backtest dashboard: report validation, metric cards, and an SVG curve. */

import { escapeHtml } from "./render.js";

export interface BacktestMetrics {
  arr: number;
  aerr: number | null;
  anvol: number;
  sr: number | null;
  md: number;
  cr: number | null;
  mdd: number;
  acc: number | null;
}

export interface BacktestReport {
  metrics: BacktestMetrics;
  rf: number;
  window: { start: string; end: string; n_months: number };
  curve: { months: string[]; ar: number[]; monthly_returns: number[] };
  metadata?: { run_id?: string };
}

export class ReportSchemaError extends Error {}

const METRIC_KEYS: (keyof BacktestMetrics)[] = [
  "arr", "aerr", "anvol", "sr", "md", "cr", "mdd", "acc",
];

function isNumberOrNull(value: unknown): value is number | null {
  return value === null || typeof value === "number";
}

export function parseBacktestReport(payload: unknown): BacktestReport {
  if (typeof payload !== "object" || payload === null) {
    throw new ReportSchemaError("report must be a JSON object");
  }
  const record = payload as Record<string, unknown>;
  const metrics = record.metrics as Record<string, unknown> | undefined;
  if (!metrics) {
    throw new ReportSchemaError("report is missing the metrics block");
  }
  for (const key of METRIC_KEYS) {
    if (!(key in metrics) || !isNumberOrNull(metrics[key])) {
      throw new ReportSchemaError(`metrics.${key} is missing or not numeric`);
    }
  }
  const curve = record.curve as Record<string, unknown> | undefined;
  if (
    !curve ||
    !Array.isArray(curve.months) ||
    !Array.isArray(curve.ar) ||
    curve.months.length !== curve.ar.length
  ) {
    throw new ReportSchemaError("report curve must align months with ar values");
  }
  if (typeof record.rf !== "number" || typeof record.window !== "object") {
    throw new ReportSchemaError("report is missing rf or window");
  }
  return payload as BacktestReport;
}

const METRIC_LABELS: Record<keyof BacktestMetrics, string> = {
  arr: "Annualized return",
  aerr: "Excess vs benchmark",
  anvol: "Annualized volatility",
  sr: "Sharpe ratio",
  md: "Max drawdown",
  cr: "Calmar ratio",
  mdd: "Longest drawdown (months)",
  acc: "Direction accuracy",
};

const PERCENT_METRICS = new Set(["arr", "aerr", "anvol", "md", "acc"]);

export function formatMetric(key: keyof BacktestMetrics, value: number | null): string {
  if (value === null) {
    return "n/a";
  }
  if (key === "mdd") {
    return String(value);
  }
  if (PERCENT_METRICS.has(key)) {
    return `${(value * 100).toFixed(1)}%`;
  }
  return value.toFixed(3);
}

export function renderMetricCards(
  report: BacktestReport,
  options: { showBenchmark?: boolean } = {},
): string {
  const showBenchmark = options.showBenchmark ?? true;
  const cards = METRIC_KEYS.filter((key) => showBenchmark || key !== "aerr")
    .map(
      (key) => `
  <div class="metric-card" data-metric="${key}">
    <div class="metric-label">${METRIC_LABELS[key]}</div>
    <div class="metric-value">${formatMetric(key, report.metrics[key])}</div>
  </div>`,
    )
    .join("");
  return `<div class="metric-cards">${cards}\n</div>`;
}

export function renderCurveSvg(
  months: string[],
  values: number[],
  width = 640,
  height = 240,
): string {
  if (months.length === 0) {
    return '<svg class="equity-curve" data-points="0"></svg>';
  }
  const low = Math.min(0, ...values);
  const high = Math.max(0, ...values);
  const span = high - low || 1;
  const step = months.length > 1 ? width / (months.length - 1) : 0;
  const points = values
    .map((value, i) => {
      const x = months.length > 1 ? i * step : width / 2;
      const y = height - ((value - low) / span) * height;
      return `${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
  const markers = values
    .map((value, i) => {
      const x = months.length > 1 ? i * step : width / 2;
      const y = height - ((value - low) / span) * height;
      return `<circle class="point" data-month="${escapeHtml(months[i])}" cx="${x.toFixed(1)}" cy="${y.toFixed(1)}" r="3"/>`;
    })
    .join("");
  return `<svg class="equity-curve" data-points="${months.length}" viewBox="0 0 ${width} ${height}">
  <polyline fill="none" stroke="currentColor" points="${points}"/>
  ${markers}
</svg>`;
}

export interface DashboardOptions {
  showBenchmark?: boolean;
}

export function renderDashboard(
  payload: unknown,
  options: DashboardOptions = {},
): string {
  let report: BacktestReport;
  try {
    report = parseBacktestReport(payload);
  } catch (error) {
    const message = error instanceof Error ? error.message : String(error);
    return `<div class="schema-error">Malformed backtest report: ${escapeHtml(message)}</div>`;
  }
  const header = `<div class="dashboard-window">${escapeHtml(report.window.start)} → ${escapeHtml(report.window.end)} (${report.window.n_months} months, rf ${report.rf})</div>`;
  return [
    header,
    renderMetricCards(report, options),
    renderCurveSvg(report.curve.months, report.curve.ar),
  ].join("\n");
}
