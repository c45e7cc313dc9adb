/**
 * Sample-level view: natural-language summary, VIFI stacked bars, and the
 * two relation graphs (token-to-token links, token-to-similarity
 * contributions). Both graphs carry three labeled column headers naming each
 * sample and its label.
 */

import { METRIC_COLORS } from "./palette.js";
import type { ExplanationPayload, GraphColumn } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const GRAPH_WIDTH = 660;
const ROW_HEIGHT = 22;
const HEADER_HEIGHT = 30;
const COLUMN_X: Record<GraphColumn["role"], number> = {
  closest: 90,
  query: 330,
  contrast: 570,
};

function svgText(x: number, y: number, text: string, className: string): SVGTextElement {
  const node = document.createElementNS(SVG_NS, "text");
  node.setAttribute("x", String(x));
  node.setAttribute("y", String(y));
  node.setAttribute("text-anchor", "middle");
  node.setAttribute("class", className);
  node.textContent = text;
  return node;
}

function tokenY(index: number): number {
  return HEADER_HEIGHT + 18 + index * ROW_HEIGHT;
}

function columnHeaders(svg: SVGSVGElement, columns: GraphColumn[]): void {
  for (const column of columns) {
    const header = svgText(COLUMN_X[column.role], 16, column.header, "column-header");
    header.dataset.role = column.role;
    svg.appendChild(header);
  }
}

function graphHeight(columns: GraphColumn[]): number {
  const rows = Math.max(...columns.map((c) => c.tokens.length));
  return HEADER_HEIGHT + 24 + rows * ROW_HEIGHT;
}

/** Token-to-token links: an edge per pair with cosine weight >= tau. */
export function renderTokenGraph(container: HTMLElement, payload: ExplanationPayload): void {
  const { columns, edges } = payload.graph;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "relation-graph token-graph");
  svg.setAttribute("width", String(GRAPH_WIDTH));
  svg.setAttribute("height", String(graphHeight(columns)));
  columnHeaders(svg, columns);
  const byRole = new Map(columns.map((c) => [c.role, c]));
  for (const edge of edges) {
    const otherRole = edge.pair === "query_closest" ? "closest" : "contrast";
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(COLUMN_X.query));
    line.setAttribute("y1", String(tokenY(edge.query_index) - 5));
    line.setAttribute("x2", String(COLUMN_X[otherRole]));
    line.setAttribute("y2", String(tokenY(edge.other_index) - 5));
    line.setAttribute("class", "token-edge");
    line.setAttribute("stroke", "#7f7f7f");
    line.setAttribute("stroke-width", String(0.5 + 2.5 * Math.max(0, edge.weight)));
    line.setAttribute("opacity", "0.55");
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = `cosine ${edge.weight.toFixed(3)}`;
    line.appendChild(title);
    svg.appendChild(line);
  }
  for (const column of columns) {
    column.tokens.forEach((token, i) => {
      const label = svgText(COLUMN_X[column.role], tokenY(i), token, "token-label");
      label.dataset.role = column.role;
      svg.appendChild(label);
    });
  }
  void byRole;
  container.appendChild(svg);
}

/** Token-to-similarity: per-token contribution bars toward each pair. */
export function renderSimilarityGraph(container: HTMLElement, payload: ExplanationPayload): void {
  const { columns, contributions, pair_similarity: pairSimilarity } = payload.graph;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("class", "relation-graph similarity-graph");
  svg.setAttribute("width", String(GRAPH_WIDTH));
  svg.setAttribute("height", String(graphHeight(columns) + 20));
  columnHeaders(svg, columns);

  const series: [GraphColumn["role"], number[], number][] = [
    ["closest", contributions.closest ?? [], -1],
    ["query", contributions.query_closest ?? [], -1],
    ["query", contributions.query_contrast ?? [], 1],
    ["contrast", contributions.contrast ?? [], 1],
  ];
  const maxAbs = Math.max(
    1e-9,
    ...series.flatMap(([, values]) => values.map((v) => Math.abs(v))),
  );
  for (const [role, values, direction] of series) {
    values.forEach((value, i) => {
      const bar = document.createElementNS(SVG_NS, "rect");
      const width = (Math.abs(value) / maxAbs) * 60;
      const x0 = COLUMN_X[role] + (direction < 0 ? -70 - width : 70);
      bar.setAttribute("x", String(x0));
      bar.setAttribute("y", String(tokenY(i) - 13));
      bar.setAttribute("width", String(width));
      bar.setAttribute("height", "10");
      bar.setAttribute("class", "contribution-bar");
      bar.setAttribute("fill", value >= 0 ? "#59a14f" : "#e15759");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = `contribution ${value.toFixed(4)}`;
      bar.appendChild(title);
      svg.appendChild(bar);
    });
  }
  for (const column of columns) {
    column.tokens.forEach((token, i) => {
      const label = svgText(COLUMN_X[column.role], tokenY(i), token, "token-label");
      label.dataset.role = column.role;
      svg.appendChild(label);
    });
  }
  const footer = svgText(
    GRAPH_WIDTH / 2,
    graphHeight(columns) + 12,
    `pooled cosine: closest ${(pairSimilarity.query_closest ?? 0).toFixed(3)}, ` +
      `contrast ${(pairSimilarity.query_contrast ?? 0).toFixed(3)}`,
    "similarity-footer",
  );
  svg.appendChild(footer);
  container.appendChild(svg);
}

/** VIFI: one stacked bar per token, one segment per metric. */
export function renderImportanceBars(container: HTMLElement, payload: ExplanationPayload): void {
  const { metrics, vectors } = payload.importance;
  const tokens = payload.query.tokens;
  const box = document.createElement("div");
  box.className = "vifi";

  const legend = document.createElement("div");
  legend.className = "vifi-legend";
  metrics.forEach((metric, m) => {
    const entry = document.createElement("span");
    entry.className = "legend-entry";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = METRIC_COLORS[m % METRIC_COLORS.length];
    entry.appendChild(swatch);
    entry.appendChild(document.createTextNode(metric));
    entry.title = `normalized ${metric} importance; segments sum to 1 over tokens`;
    legend.appendChild(entry);
  });
  box.appendChild(legend);

  const totals = tokens.map((_, i) =>
    metrics.reduce((acc, metric) => acc + (vectors[metric]?.[i] ?? 0), 0),
  );
  const maxTotal = Math.max(1e-9, ...totals);
  tokens.forEach((token, i) => {
    const row = document.createElement("div");
    row.className = "vifi-row";
    const name = document.createElement("span");
    name.className = "vifi-token";
    name.textContent = token;
    row.appendChild(name);
    const bar = document.createElement("span");
    bar.className = "vifi-bar";
    metrics.forEach((metric, m) => {
      const segment = document.createElement("span");
      segment.className = "vifi-segment";
      const value = vectors[metric]?.[i] ?? 0;
      segment.style.width = `${(100 * value) / maxTotal / metrics.length}%`;
      segment.style.backgroundColor = METRIC_COLORS[m % METRIC_COLORS.length];
      segment.title = `${metric}: ${value.toFixed(4)}`;
      bar.appendChild(segment);
    });
    row.appendChild(bar);
    box.appendChild(row);
  });
  container.appendChild(box);
}

/** The whole sample panel: summary, bars, both graphs. */
export function renderSamplePanel(container: HTMLElement, payload: ExplanationPayload): void {
  container.textContent = "";
  const summary = document.createElement("p");
  summary.className = "nl-summary";
  summary.textContent = payload.summary.text;
  container.appendChild(summary);
  renderImportanceBars(container, payload);
  renderTokenGraph(container, payload);
  renderSimilarityGraph(container, payload);
}

/** Shown instead of the panel when token embeddings are unavailable. */
export function renderPanelError(container: HTMLElement, message: string): void {
  container.textContent = "";
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = `Sample-level graphs unavailable: ${message}`;
  container.appendChild(banner);
}
