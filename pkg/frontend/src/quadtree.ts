/**
 * Static point quadtree for hit-testing thousands of canvas points without
 * scanning them all on every mouse move.
 */

export interface IndexedPoint {
  x: number;
  y: number;
  index: number;
}

interface Node {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  points: IndexedPoint[];
  children: Node[] | null;
}

const CAPACITY = 16;
const MAX_DEPTH = 12;

export class Quadtree {
  private readonly root: Node;

  constructor(points: IndexedPoint[]) {
    let x0 = Infinity;
    let y0 = Infinity;
    let x1 = -Infinity;
    let y1 = -Infinity;
    for (const p of points) {
      x0 = Math.min(x0, p.x);
      y0 = Math.min(y0, p.y);
      x1 = Math.max(x1, p.x);
      y1 = Math.max(y1, p.y);
    }
    if (!points.length) {
      x0 = y0 = 0;
      x1 = y1 = 1;
    }
    this.root = { x0, y0, x1: x1 + 1e-9, y1: y1 + 1e-9, points: [], children: null };
    for (const p of points) {
      this.insert(this.root, p, 0);
    }
  }

  private insert(node: Node, point: IndexedPoint, depth: number): void {
    if (node.children === null) {
      node.points.push(point);
      if (node.points.length > CAPACITY && depth < MAX_DEPTH) {
        this.split(node);
        const moved = node.points;
        node.points = [];
        for (const p of moved) {
          this.insert(this.childFor(node, p), p, depth + 1);
        }
      }
      return;
    }
    this.insert(this.childFor(node, point), point, depth + 1);
  }

  private split(node: Node): void {
    const mx = (node.x0 + node.x1) / 2;
    const my = (node.y0 + node.y1) / 2;
    node.children = [
      { x0: node.x0, y0: node.y0, x1: mx, y1: my, points: [], children: null },
      { x0: mx, y0: node.y0, x1: node.x1, y1: my, points: [], children: null },
      { x0: node.x0, y0: my, x1: mx, y1: node.y1, points: [], children: null },
      { x0: mx, y0: my, x1: node.x1, y1: node.y1, points: [], children: null },
    ];
  }

  private childFor(node: Node, point: IndexedPoint): Node {
    const mx = (node.x0 + node.x1) / 2;
    const my = (node.y0 + node.y1) / 2;
    const col = point.x >= mx ? 1 : 0;
    const row = point.y >= my ? 2 : 0;
    return node.children![col + row];
  }

  /** Nearest point within `radius` of (x, y), or null. */
  nearest(x: number, y: number, radius: number): IndexedPoint | null {
    let best: IndexedPoint | null = null;
    let bestDist = radius * radius;
    const visit = (node: Node): void => {
      if (
        x < node.x0 - radius ||
        x > node.x1 + radius ||
        y < node.y0 - radius ||
        y > node.y1 + radius
      ) {
        return;
      }
      for (const p of node.points) {
        const d = (p.x - x) * (p.x - x) + (p.y - y) * (p.y - y);
        if (d <= bestDist) {
          bestDist = d;
          best = p;
        }
      }
      if (node.children) {
        for (const child of node.children) visit(child);
      }
    };
    visit(this.root);
    return best;
  }

  /** All point indexes inside the axis-aligned rectangle (inclusive). */
  within(x0: number, y0: number, x1: number, y1: number): number[] {
    const out: number[] = [];
    const visit = (node: Node): void => {
      if (x1 < node.x0 || x0 > node.x1 || y1 < node.y0 || y0 > node.y1) {
        return;
      }
      for (const p of node.points) {
        if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1) {
          out.push(p.index);
        }
      }
      if (node.children) {
        for (const child of node.children) visit(child);
      }
    };
    visit(this.root);
    return out;
  }
}
