// @vitest-environment jsdom
import { describe, expect, it } from "vitest";

import { renderCompareLists } from "../src/compare.js";
import type { ComparePayload, DivergenceRow } from "../src/types.js";

function makePayload(items: DivergenceRow[]): ComparePayload {
  return {
    item_kind: "word",
    items,
    side_a: {
      descriptor: { dataset: "demo", labels_pred: ["top_up"] },
      layout_id: "demo:tsne:42",
      sample_ids: ["s1", "s2"],
    },
    side_b: {
      descriptor: { dataset: "demo", labels_gold: ["top_up"] },
      layout_id: "demo:tsne:42",
      sample_ids: ["s1", "s3"],
    },
  };
}

describe("comparison lists", () => {
  it("A=B renders every item as shared in the center column", () => {
    const items: DivergenceRow[] = ["card", "cash", "the"].map((word) => ({
      item: word,
      kind: "word",
      count_a: 5,
      count_b: 5,
      z: 0,
      verdict: "shared",
    }));
    const container = document.createElement("div");
    renderCompareLists(container, makePayload(items));
    expect(container.querySelectorAll(".compare-column.shared .divergence-item")).toHaveLength(3);
    expect(container.querySelectorAll(".compare-column.a_side .divergence-item")).toHaveLength(0);
    expect(container.querySelectorAll(".compare-column.b_side .divergence-item")).toHaveLength(0);
  });

  it("side items land on their sides and DOM order follows payload |z| order", () => {
    const items: DivergenceRow[] = [
      { item: "card", kind: "word", count_a: 30, count_b: 4, z: 4.2, verdict: "a_side" },
      { item: "top", kind: "word", count_a: 2, count_b: 25, z: -3.1, verdict: "b_side" },
      { item: "up", kind: "word", count_a: 3, count_b: 20, z: -2.4, verdict: "b_side" },
      { item: "the", kind: "word", count_a: 9, count_b: 9, z: 0.1, verdict: "shared" },
    ];
    const container = document.createElement("div");
    renderCompareLists(container, makePayload(items));
    const bSide = [...container.querySelectorAll(".compare-column.b_side .divergence-item")];
    expect(bSide.map((n) => (n as HTMLElement).dataset.item)).toEqual(["top", "up"]);
    const zs = bSide.map((n) => Math.abs(Number((n as HTMLElement).dataset.z)));
    expect(zs).toEqual([...zs].sort((a, b) => b - a));
    expect(
      [...container.querySelectorAll(".compare-column.a_side .divergence-item")].map(
        (n) => (n as HTMLElement).dataset.item,
      ),
    ).toEqual(["card"]);
  });

  it("echoes both group descriptors with sample counts", () => {
    const container = document.createElement("div");
    renderCompareLists(container, makePayload([]));
    const header = container.querySelector(".compare-header")?.textContent ?? "";
    expect(header).toContain("labels_pred");
    expect(header).toContain("(2 samples)");
  });
});
