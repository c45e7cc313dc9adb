/**
 * Label-level view: the sortable confusion table and the label-cluster list.
 * Sorting always goes back to the engine (sort/secondary parameters); the
 * table itself never reorders rows client-side.
 */

import { clusterColor } from "./palette.js";
import type { ConfusionsPayload, LabelClustersPayload } from "./types.js";

export type SortKey = "freq" | "gold" | "pred";

export interface ConfusionTableCallbacks {
  onSort?(key: SortKey, secondary: SortKey | null): void;
  onSelectPair?(gold: string, pred: string): void;
}

export function renderConfusionTable(
  container: HTMLElement,
  payload: ConfusionsPayload,
  callbacks: ConfusionTableCallbacks = {},
  currentSort: SortKey = "freq",
): void {
  container.textContent = "";
  const table = document.createElement("table");
  table.className = "confusion-table";
  const head = document.createElement("tr");
  for (const [key, title] of [
    ["gold", "ground truth"],
    ["pred", "prediction"],
    ["freq", "frequency"],
  ] as [SortKey, string][]) {
    const th = document.createElement("th");
    th.textContent = title + (key === currentSort ? " *" : "");
    th.dataset.key = key;
    // Click: primary sort. Shift-click: secondary sort within current order.
    th.addEventListener("click", (event) =>
      (event as MouseEvent).shiftKey
        ? callbacks.onSort?.(currentSort, key)
        : callbacks.onSort?.(key, null),
    );
    head.appendChild(th);
  }
  table.appendChild(head);
  for (const entry of payload.entries) {
    const tr = document.createElement("tr");
    tr.className = "confusion-row";
    for (const value of [entry.gold, entry.pred, String(entry.frequency)]) {
      const td = document.createElement("td");
      td.textContent = value;
      tr.appendChild(td);
    }
    tr.addEventListener("click", () => callbacks.onSelectPair?.(entry.gold, entry.pred));
    table.appendChild(tr);
  }
  container.appendChild(table);
  const total = document.createElement("div");
  total.className = "total-errors";
  total.textContent = `${payload.total_errors} errors`;
  container.appendChild(total);
}

export interface ClusterListCallbacks {
  onSelectLabels?(labels: string[]): void;
}

export function renderClusterList(
  container: HTMLElement,
  payload: LabelClustersPayload,
  callbacks: ClusterListCallbacks = {},
): void {
  container.textContent = "";
  for (const cluster of payload.clusters) {
    const box = document.createElement("div");
    box.className = "label-cluster";
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.backgroundColor = clusterColor(cluster.color_index);
    box.appendChild(swatch);
    for (const label of cluster.members) {
      const chip = document.createElement("button");
      chip.className = "label-chip";
      chip.textContent = label;
      chip.addEventListener("click", () => callbacks.onSelectLabels?.([label]));
      box.appendChild(chip);
    }
    const all = document.createElement("button");
    all.className = "cluster-all";
    all.textContent = "select cluster";
    all.addEventListener("click", () => callbacks.onSelectLabels?.([...cluster.members]));
    box.appendChild(all);
    container.appendChild(box);
  }
}
