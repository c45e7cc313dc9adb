/**
 * The List panel: ranked words, concepts, and gold/predicted labels over the
 * currently visible samples, straight from the lists payload.
 */

import type { ListsPayload, RankedItem } from "./types.js";

function section(title: string, rows: RankedItem[], shareKey: "sample_share" | "share"): HTMLElement {
  const box = document.createElement("section");
  box.className = "list-section";
  const heading = document.createElement("h3");
  heading.textContent = title;
  box.appendChild(heading);
  const ul = document.createElement("ul");
  for (const row of rows.slice(0, 50)) {
    const li = document.createElement("li");
    const share = row[shareKey];
    li.textContent = `${row.item} · ${row.count}`;
    if (share !== undefined) {
      li.textContent += ` (${(share * 100).toFixed(1)}%)`;
    }
    li.dataset.item = row.item;
    ul.appendChild(li);
  }
  box.appendChild(ul);
  return box;
}

export function renderLists(container: HTMLElement, payload: ListsPayload): void {
  container.textContent = "";
  const count = document.createElement("div");
  count.className = "sample-count";
  count.textContent = `${payload.total_samples} samples`;
  container.appendChild(count);
  container.appendChild(section("Words", payload.words, "sample_share"));
  container.appendChild(section("Concepts", payload.concepts, "sample_share"));
  container.appendChild(section("Gold labels", payload.gold_labels, "share"));
  container.appendChild(section("Predicted labels", payload.pred_labels, "share"));
}
