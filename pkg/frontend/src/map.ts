/**
 * The Map view: canvas scatter of the projected corpus with pan/zoom, lasso
 * selection, label hulls, and the local-word overlay. Rendering goes through
 * a minimal 2D-context interface so the pipeline is testable headless.
 */

import { clusterColor } from "./palette.js";
import { Quadtree } from "./quadtree.js";
import type { CameraState } from "./state.js";
import type { HullRow, LocalWordRow, PointRow } from "./types.js";

/** The subset of CanvasRenderingContext2D the map actually uses. */
export interface Canvas2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  globalAlpha: number;
  font: string;
  textAlign: CanvasTextAlign;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  fillText(text: string, x: number, y: number): void;
}

export interface MapCallbacks {
  onSelectSample?(id: string): void;
  onLasso?(region: number[]): void;
  onCameraChange?(camera: CameraState): void;
}

const POINT_RADIUS = 3;
const HIT_RADIUS_PX = 8;

export class MapView {
  camera: CameraState = { cx: 0, cy: 0, zoom: 1 };

  private points: PointRow[] = [];
  private labelColor = new Map<string, string>();
  private hulls: HullRow[] = [];
  private words: LocalWordRow[] = [];
  private tree: Quadtree = new Quadtree([]);
  private highlighted = new Set<string>();
  private selectedId: string | null = null;
  private lassoPath: [number, number][] | null = null;

  constructor(
    private readonly width: number,
    private readonly height: number,
    private readonly callbacks: MapCallbacks = {},
  ) {}

  setPoints(points: PointRow[], labelToColorIndex: Map<string, number>): void {
    this.points = points;
    this.labelColor = new Map(
      [...labelToColorIndex.entries()].map(([label, idx]) => [label, clusterColor(idx)]),
    );
    this.tree = new Quadtree(points.map((p, i) => ({ x: p.x, y: p.y, index: i })));
  }

  setHulls(hulls: HullRow[]): void {
    this.hulls = hulls;
  }

  /** Replace the word overlay with exactly the engine-provided rows. */
  setWords(words: LocalWordRow[]): void {
    this.words = words;
  }

  overlayWords(): string[] {
    return this.words.map((w) => w.word);
  }

  setHighlightedLabels(labels: Iterable<string>): void {
    this.highlighted = new Set(labels);
  }

  setSelected(id: string | null): void {
    this.selectedId = id;
  }

  /** Fit the camera so all points are visible. */
  fitToPoints(): void {
    if (!this.points.length) return;
    let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
    for (const p of this.points) {
      x0 = Math.min(x0, p.x);
      y0 = Math.min(y0, p.y);
      x1 = Math.max(x1, p.x);
      y1 = Math.max(y1, p.y);
    }
    const spanX = Math.max(x1 - x0, 1e-9);
    const spanY = Math.max(y1 - y0, 1e-9);
    this.camera = {
      cx: (x0 + x1) / 2,
      cy: (y0 + y1) / 2,
      zoom: 0.9 * Math.min(this.width / spanX, this.height / spanY),
    };
    this.callbacks.onCameraChange?.(this.camera);
  }

  worldToScreen(x: number, y: number): [number, number] {
    return [
      (x - this.camera.cx) * this.camera.zoom + this.width / 2,
      (this.camera.cy - y) * this.camera.zoom + this.height / 2,
    ];
  }

  screenToWorld(sx: number, sy: number): [number, number] {
    return [
      (sx - this.width / 2) / this.camera.zoom + this.camera.cx,
      this.camera.cy - (sy - this.height / 2) / this.camera.zoom,
    ];
  }

  pan(dxPx: number, dyPx: number): void {
    this.camera.cx -= dxPx / this.camera.zoom;
    this.camera.cy += dyPx / this.camera.zoom;
    this.callbacks.onCameraChange?.(this.camera);
  }

  zoomAt(sx: number, sy: number, factor: number): void {
    const [wx, wy] = this.screenToWorld(sx, sy);
    this.camera.zoom *= factor;
    // Keep the cursor's world point fixed on screen.
    this.camera.cx = wx - (sx - this.width / 2) / this.camera.zoom;
    this.camera.cy = wy + (sy - this.height / 2) / this.camera.zoom;
    this.callbacks.onCameraChange?.(this.camera);
  }

  /** Point-pick at screen coordinates; notifies onSelectSample on a hit. */
  pick(sx: number, sy: number): string | null {
    const [wx, wy] = this.screenToWorld(sx, sy);
    const hit = this.tree.nearest(wx, wy, HIT_RADIUS_PX / this.camera.zoom);
    if (hit === null) return null;
    const id = this.points[hit.index].id;
    this.callbacks.onSelectSample?.(id);
    return id;
  }

  beginLasso(sx: number, sy: number): void {
    this.lassoPath = [[sx, sy]];
  }

  extendLasso(sx: number, sy: number): void {
    this.lassoPath?.push([sx, sy]);
  }

  /** Close the lasso and emit it as a flat world-coordinate polygon. */
  endLasso(): number[] | null {
    if (!this.lassoPath || this.lassoPath.length < 3) {
      this.lassoPath = null;
      return null;
    }
    const region: number[] = [];
    for (const [sx, sy] of this.lassoPath) {
      const [wx, wy] = this.screenToWorld(sx, sy);
      region.push(wx, wy);
    }
    this.lassoPath = null;
    this.callbacks.onLasso?.(region);
    return region;
  }

  /** Draw one frame. Pure function of current state; safe to call at 60 Hz. */
  render(ctx: Canvas2D): void {
    ctx.clearRect(0, 0, this.width, this.height);
    const margin = POINT_RADIUS + 1;

    ctx.globalAlpha = 0.12;
    for (const hull of this.hulls) {
      if (!hull.vertices.length) continue;
      ctx.beginPath();
      const [hx, hy] = this.worldToScreen(hull.vertices[0][0], hull.vertices[0][1]);
      ctx.moveTo(hx, hy);
      for (let i = 1; i < hull.vertices.length; i++) {
        const [x, y] = this.worldToScreen(hull.vertices[i][0], hull.vertices[i][1]);
        ctx.lineTo(x, y);
      }
      ctx.closePath();
      ctx.fillStyle = this.labelColor.get(hull.label) ?? "#888888";
      ctx.fill();
      ctx.globalAlpha = 0.6;
      ctx.strokeStyle = this.labelColor.get(hull.label) ?? "#888888";
      ctx.lineWidth = 1;
      ctx.stroke();
      ctx.globalAlpha = 0.12;
    }

    ctx.globalAlpha = 1;
    for (const p of this.points) {
      const [sx, sy] = this.worldToScreen(p.x, p.y);
      if (sx < -margin || sx > this.width + margin || sy < -margin || sy > this.height + margin) {
        continue;
      }
      const highlighted = this.highlighted.size === 0 || this.highlighted.has(p.gold_label) || this.highlighted.has(p.pred_label);
      ctx.globalAlpha = highlighted ? 0.9 : 0.15;
      ctx.fillStyle = this.labelColor.get(p.gold_label) ?? "#666666";
      ctx.beginPath();
      ctx.arc(sx, sy, POINT_RADIUS, 0, Math.PI * 2);
      ctx.fill();
      if (!p.correct) {
        ctx.strokeStyle = "#d62728";
        ctx.lineWidth = 1;
        ctx.stroke();
      }
      if (p.id === this.selectedId) {
        ctx.strokeStyle = "#111111";
        ctx.lineWidth = 2;
        ctx.beginPath();
        ctx.arc(sx, sy, POINT_RADIUS + 3, 0, Math.PI * 2);
        ctx.stroke();
      }
    }

    ctx.globalAlpha = 1;
    ctx.textAlign = "center";
    for (const word of this.words) {
      const [sx, sy] = this.worldToScreen(word.x, word.y);
      if (sx < -60 || sx > this.width + 60 || sy < -20 || sy > this.height + 20) {
        continue;
      }
      const size = Math.min(26, Math.max(11, 8 + 3 * word.scale_hint));
      ctx.font = `${size.toFixed(0)}px sans-serif`;
      ctx.fillStyle = "#1a1a1a";
      ctx.fillText(word.word, sx, sy);
    }

    if (this.lassoPath && this.lassoPath.length > 1) {
      ctx.beginPath();
      ctx.moveTo(this.lassoPath[0][0], this.lassoPath[0][1]);
      for (let i = 1; i < this.lassoPath.length; i++) {
        ctx.lineTo(this.lassoPath[i][0], this.lassoPath[i][1]);
      }
      ctx.strokeStyle = "#333333";
      ctx.lineWidth = 1;
      ctx.stroke();
    }
  }
}
