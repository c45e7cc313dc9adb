/**
 * Comparison mode lists: shared items in the center column, side-specific
 * items on their sides, in the payload's |z| order (the engine already
 * sorted; the UI never reorders).
 */

import type { ComparePayload, DivergenceRow } from "./types.js";

function describe(descriptor: Record<string, unknown>): string {
  return Object.entries(descriptor)
    .map(([key, value]) => `${key}=${JSON.stringify(value)}`)
    .join(" ");
}

function itemRow(row: DivergenceRow): HTMLElement {
  const li = document.createElement("li");
  li.className = `divergence-item ${row.verdict}`;
  li.dataset.item = row.item;
  li.dataset.z = String(row.z);
  li.textContent = `${row.item} (${row.count_a}:${row.count_b}, z=${row.z.toFixed(2)})`;
  return li;
}

export function renderCompareLists(container: HTMLElement, payload: ComparePayload): void {
  container.textContent = "";
  const header = document.createElement("div");
  header.className = "compare-header";
  header.textContent =
    `A: ${describe(payload.side_a.descriptor)} (${payload.side_a.sample_ids.length} samples)` +
    ` vs B: ${describe(payload.side_b.descriptor)} (${payload.side_b.sample_ids.length} samples)`;
  container.appendChild(header);

  const grid = document.createElement("div");
  grid.className = "compare-columns";
  const columns: Record<"a_side" | "shared" | "b_side", HTMLUListElement> = {
    a_side: document.createElement("ul"),
    shared: document.createElement("ul"),
    b_side: document.createElement("ul"),
  };
  for (const [verdict, title] of [
    ["a_side", "more likely in A"],
    ["shared", "equally likely"],
    ["b_side", "more likely in B"],
  ] as const) {
    const column = document.createElement("div");
    column.className = `compare-column ${verdict}`;
    const heading = document.createElement("h3");
    heading.textContent = title;
    column.appendChild(heading);
    columns[verdict].className = "compare-items";
    column.appendChild(columns[verdict]);
    grid.appendChild(column);
  }
  for (const row of payload.items) {
    columns[row.verdict].appendChild(itemRow(row));
  }
  container.appendChild(grid);
}

export function renderCompareError(container: HTMLElement, message: string): void {
  container.textContent = "";
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = `Comparison unavailable: ${message}`;
  container.appendChild(banner);
}
