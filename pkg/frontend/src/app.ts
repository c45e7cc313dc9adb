/**
 * Application wiring: fetch engine payloads, render the coordinated views,
 * and keep the full view state in the URL fragment. All analytics stay on
 * the server; fetches go through a request gate so stale responses never
 * render.
 */

import { ApiClient, RequestGate } from "./api.js";
import { renderCompareError, renderCompareLists } from "./compare.js";
import { renderClusterList, renderConfusionTable, type SortKey } from "./labels.js";
import { renderLists } from "./lists.js";
import { MapView, type Canvas2D } from "./map.js";
import { renderPanelError, renderSamplePanel } from "./sample.js";
import { defaultState, parseState, serializeState, type ViewState } from "./state.js";
import type { PointRow } from "./types.js";

const MAP_WIDTH = 820;
const MAP_HEIGHT = 560;

class App {
  private readonly api = new ApiClient();
  private readonly gate = new RequestGate();
  private state: ViewState = defaultState();
  private map!: MapView;
  private lastPoints: PointRow[] = [];
  private labelColors = new Map<string, number>();
  private sort: SortKey = "freq";
  private secondary: SortKey | null = null;
  private region: number[] | undefined;

  private element<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  }

  private context(id: string): Canvas2D | null {
    const canvas = this.element<HTMLCanvasElement>(id);
    canvas.width = MAP_WIDTH;
    canvas.height = MAP_HEIGHT;
    return canvas.getContext("2d") as Canvas2D | null;
  }

  async start(): Promise<void> {
    this.state = parseState(location.hash);
    const listing = await this.api.datasets();
    if (!listing.datasets.length) {
      this.element("map-panel").textContent = "No datasets loaded.";
      return;
    }
    if (!this.state.dataset) {
      this.state.dataset = listing.datasets[0].id;
    }
    const select = this.element<HTMLSelectElement>("dataset-select");
    select.textContent = "";
    for (const info of listing.datasets) {
      const option = document.createElement("option");
      option.value = info.id;
      option.textContent = `${info.id} (${info.sample_count} samples, ${info.label_count} labels)`;
      select.appendChild(option);
    }
    select.value = this.state.dataset;
    select.addEventListener("change", () => {
      this.state = defaultState(select.value);
      void this.refreshAll();
    });

    this.map = new MapView(MAP_WIDTH, MAP_HEIGHT, {
      onSelectSample: (id) => void this.selectSample(id),
      onLasso: (region) => {
        this.region = region;
        void this.refreshLists();
        void this.refreshWords();
      },
      onCameraChange: (camera) => {
        this.state.camera = { ...camera };
        this.pushState();
      },
    });
    this.bindMapEvents();
    this.bindControls();
    await this.refreshAll();
    this.renderLoop();
  }

  private pushState(): void {
    history.replaceState(null, "", serializeState(this.state));
  }

  private bindMapEvents(): void {
    const canvas = this.element<HTMLCanvasElement>("map-canvas");
    let dragging = false;
    let lasso = false;
    let last: [number, number] = [0, 0];
    canvas.addEventListener("mousedown", (event) => {
      last = [event.offsetX, event.offsetY];
      if (event.shiftKey) {
        lasso = true;
        this.map.beginLasso(event.offsetX, event.offsetY);
      } else {
        dragging = true;
      }
    });
    canvas.addEventListener("mousemove", (event) => {
      if (lasso) {
        this.map.extendLasso(event.offsetX, event.offsetY);
      } else if (dragging) {
        this.map.pan(event.offsetX - last[0], event.offsetY - last[1]);
        last = [event.offsetX, event.offsetY];
      }
    });
    canvas.addEventListener("mouseup", (event) => {
      if (lasso) {
        lasso = false;
        this.map.endLasso();
      } else if (dragging) {
        dragging = false;
        const moved = Math.hypot(event.offsetX - last[0], event.offsetY - last[1]);
        if (moved < 3) {
          this.map.pick(event.offsetX, event.offsetY);
        }
      }
    });
    canvas.addEventListener("wheel", (event) => {
      event.preventDefault();
      this.map.zoomAt(event.offsetX, event.offsetY, event.deltaY < 0 ? 1.15 : 1 / 1.15);
    });
  }

  private bindControls(): void {
    const freq = this.element<HTMLInputElement>("freq-slider");
    const locality = this.element<HTMLInputElement>("locality-slider");
    const mode = this.element<HTMLSelectElement>("mode-select");
    const stopwords = this.element<HTMLInputElement>("stopword-toggle");
    const errors = this.element<HTMLInputElement>("errors-toggle");
    freq.value = String(this.state.overlay.freq);
    locality.value = String(this.state.overlay.locality);
    freq.addEventListener("input", () => {
      this.state.overlay.freq = Number(freq.value);
      this.element("freq-value").textContent = freq.value;
      this.pushState();
      void this.refreshWords();
    });
    locality.addEventListener("input", () => {
      this.state.overlay.locality = Number(locality.value);
      this.element("locality-value").textContent = locality.value;
      this.pushState();
      void this.refreshWords();
    });
    mode.addEventListener("change", () => {
      this.state.overlay.mode = mode.value as "words" | "concepts";
      this.pushState();
      void this.refreshWords();
    });
    stopwords.addEventListener("change", () => {
      this.state.overlay.stopwords = stopwords.checked ? "ignore" : "keep";
      this.pushState();
      void this.refreshWords();
    });
    errors.addEventListener("change", () => {
      this.state.filters.errorsOnly = errors.checked;
      this.pushState();
      void this.refreshPoints();
      void this.refreshLists();
    });
    this.element("compare-run").addEventListener("click", () => void this.runCompare());
  }

  private async refreshAll(): Promise<void> {
    this.pushState();
    await Promise.all([
      this.refreshClusters(),
      this.refreshPoints(),
      this.refreshConfusions(),
      this.refreshLists(),
      this.refreshWords(),
    ]);
    if (this.state.selectedSample) {
      await this.selectSample(this.state.selectedSample);
    }
  }

  private async refreshClusters(): Promise<void> {
    const payload = await this.gate.run("clusters", () =>
      this.api.labelClusters(this.state.dataset),
    );
    if (!payload) return;
    this.labelColors = new Map();
    for (const cluster of payload.clusters) {
      for (const label of cluster.members) {
        this.labelColors.set(label, cluster.color_index);
      }
    }
    renderClusterList(this.element("cluster-list"), payload, {
      onSelectLabels: (labels) => {
        this.state.filters.labels = labels;
        this.pushState();
        void this.refreshPoints();
        void this.refreshLists();
        void this.refreshHulls();
      },
    });
  }

  private async refreshPoints(): Promise<void> {
    const payload = await this.gate.run("points", () =>
      this.api.points(this.state.dataset, this.state.filters),
    );
    if (!payload) return;
    this.lastPoints = payload.points;
    this.map.setPoints(payload.points, this.labelColors);
    this.map.setHighlightedLabels(this.state.filters.labels);
    this.element("point-count").textContent = `${payload.sample_count} samples`;
    if (this.state.camera.zoom === 1 && this.state.camera.cx === 0 && this.state.camera.cy === 0) {
      this.map.fitToPoints();
    } else {
      this.map.camera = { ...this.state.camera };
    }
  }

  private async refreshHulls(): Promise<void> {
    if (!this.state.filters.labels.length) {
      this.map.setHulls([]);
      return;
    }
    const payload = await this.gate.run("hulls", () =>
      this.api.hulls(this.state.dataset, this.state.filters.labels),
    );
    if (payload) this.map.setHulls(payload.hulls);
  }

  private async refreshWords(): Promise<void> {
    if (!this.state.overlay.show) {
      this.map.setWords([]);
      return;
    }
    const payload = await this.gate.run("words", () =>
      this.api.localWords(this.state.dataset, this.state.overlay, this.region),
    );
    if (payload) this.map.setWords(payload.words);
  }

  private async refreshLists(): Promise<void> {
    const payload = await this.gate.run("lists", () =>
      this.api.lists(this.state.dataset, this.state.filters, this.region),
    );
    if (payload) renderLists(this.element("list-panel"), payload);
  }

  private async refreshConfusions(): Promise<void> {
    const payload = await this.gate.run("confusions", () =>
      this.api.confusions(this.state.dataset, this.sort, this.secondary ?? undefined),
    );
    if (!payload) return;
    renderConfusionTable(this.element("confusion-panel"), payload, {
      onSort: (key, secondary) => {
        this.sort = key;
        this.secondary = secondary;
        void this.refreshConfusions();
      },
      onSelectPair: (gold, pred) => {
        this.state.filters.labels = [gold, pred];
        this.state.filters.errorsOnly = false;
        this.pushState();
        void this.refreshPoints();
        void this.refreshLists();
        void this.refreshHulls();
      },
    }, this.sort);
  }

  private async selectSample(id: string): Promise<void> {
    this.state.selectedSample = id;
    this.map.setSelected(id);
    this.pushState();
    try {
      const payload = await this.gate.run("explanation", () =>
        this.api.explanation(this.state.dataset, id),
      );
      if (payload) renderSamplePanel(this.element("sample-panel"), payload);
    } catch (error) {
      renderPanelError(this.element("sample-panel"), String(error));
    }
  }

  private async runCompare(): Promise<void> {
    const sideA = this.element<HTMLInputElement>("compare-side-a").value;
    const sideB = this.element<HTMLInputElement>("compare-side-b").value;
    const kind = this.element<HTMLSelectElement>("compare-kind").value;
    try {
      const selectorA = { dataset: this.state.dataset, ...JSON.parse(sideA || "{}") };
      const selectorB = { dataset: this.state.dataset, ...JSON.parse(sideB || "{}") };
      this.state.compare = {
        active: true,
        sideA: selectorA,
        sideB: selectorB,
        itemKind: kind as "word" | "concept" | "label",
      };
      this.pushState();
      const payload = await this.gate.run("compare", () =>
        this.api.compare(selectorA, selectorB, kind),
      );
      if (!payload) return;
      renderCompareLists(this.element("compare-panel"), payload);
      this.renderDualMaps(payload.side_a.sample_ids, payload.side_b.sample_ids);
    } catch (error) {
      renderCompareError(this.element("compare-panel"), String(error));
    }
  }

  /** Two separate scatter plots over the shared layout, one per group. */
  private renderDualMaps(idsA: string[], idsB: string[]): void {
    const half = MAP_WIDTH / 2 - 10;
    const height = MAP_HEIGHT / 2;
    for (const [canvasId, ids] of [
      ["compare-canvas-a", idsA],
      ["compare-canvas-b", idsB],
    ] as const) {
      const wanted = new Set(ids);
      const view = new MapView(half, height);
      view.setPoints(
        this.lastPoints.filter((p) => wanted.has(p.id)),
        this.labelColors,
      );
      view.fitToPoints();
      const canvas = this.element<HTMLCanvasElement>(canvasId);
      canvas.width = half;
      canvas.height = height;
      const ctx = canvas.getContext("2d") as Canvas2D | null;
      if (ctx) view.render(ctx);
    }
  }

  private renderLoop(): void {
    const ctx = this.context("map-canvas");
    const frame = (): void => {
      if (ctx) this.map.render(ctx);
      requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
  }
}

new App().start().catch((error) => {
  const banner = document.createElement("div");
  banner.className = "error-banner";
  banner.textContent = `Failed to start: ${error}`;
  document.body.prepend(banner);
});
