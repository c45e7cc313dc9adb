"""Geometric primitives shared by the views: convex hulls, geometric medians,
and point-in-region filters over a projected layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .errors import InputError

WEISZFELD_MAX_ITER = 100
WEISZFELD_TOL = 1e-6
COINCIDENCE_EPS = 1e-9


def convex_hull(points: Sequence[Sequence[float]]) -> list[tuple[float, float]]:
    """Counter-clockwise convex hull via the monotone chain scan.

    Collinear interior points are excluded. One or two distinct input points
    come back unchanged as a degenerate polygon.
    """
    if len(points) == 0:
        raise InputError("convex_hull requires at least one point")
    pts = sorted({(float(p[0]), float(p[1])) for p in points})
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    # Collinear inputs collapse to the two extremes here.
    return lower[:-1] + upper[:-1]


def geometric_median(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Weiszfeld iteration for the point minimizing the sum of distances.

    Starts at the centroid; exact coincidence with a data point is broken by a
    tiny perturbation. Returns the best iterate seen, so the objective never
    exceeds the centroid's.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InputError("geometric_median requires a non-empty point array")
    if pts.shape[0] == 1:
        return pts[0].copy()

    def objective(m):
        return float(np.linalg.norm(pts - m, axis=1).sum())

    current = pts.mean(axis=0)
    best = current
    best_obj = objective(current)
    for _ in range(WEISZFELD_MAX_ITER):
        dists = np.linalg.norm(pts - current, axis=1)
        if (dists < COINCIDENCE_EPS).any():
            current = current + COINCIDENCE_EPS
            dists = np.linalg.norm(pts - current, axis=1)
        weights = 1.0 / dists
        nxt = (pts * weights[:, None]).sum(axis=0) / weights.sum()
        obj = objective(nxt)
        if obj < best_obj:
            best, best_obj = nxt, obj
        if np.linalg.norm(nxt - current) < WEISZFELD_TOL:
            break
        current = nxt
    return best


@dataclass(frozen=True)
class RegionSelector:
    """A spatial filter over the layout: everything, a rectangle, or a lasso."""

    kind: Literal["all", "viewport_rect", "lasso_polygon"] = "all"
    vertices: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        if self.kind == "viewport_rect" and len(self.vertices) != 2:
            raise InputError("viewport_rect needs exactly 2 corner points")
        if self.kind == "lasso_polygon" and len(self.vertices) < 3:
            raise InputError("lasso_polygon needs at least 3 vertices")
        if self.kind == "all" and self.vertices:
            raise InputError("'all' selector takes no vertices")


def point_in_polygon(x: float, y: float, vertices: Sequence[tuple[float, float]]) -> bool:
    """Even-odd rule with inclusive boundary."""
    n = len(vertices)
    inside = False
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        # Boundary check: point on the closed segment counts as inside.
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        if (
            abs(cross) < 1e-12
            and min(x1, x2) - 1e-12 <= x <= max(x1, x2) + 1e-12
            and min(y1, y2) - 1e-12 <= y <= max(y1, y2) + 1e-12
        ):
            return True
        if (y1 > y) != (y2 > y):
            x_at_y = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x_at_y > x:
                inside = not inside
    return inside


def select_positions(positions: np.ndarray, selector: RegionSelector) -> frozenset[int]:
    """Indices of positions falling inside the selector (boundary-inclusive)."""
    if selector.kind == "all":
        return frozenset(range(positions.shape[0]))
    if selector.kind == "viewport_rect":
        (x1, y1), (x2, y2) = selector.vertices
        lo_x, hi_x = min(x1, x2), max(x1, x2)
        lo_y, hi_y = min(y1, y2), max(y1, y2)
        mask = (
            (positions[:, 0] >= lo_x)
            & (positions[:, 0] <= hi_x)
            & (positions[:, 1] >= lo_y)
            & (positions[:, 1] <= hi_y)
        )
        return frozenset(np.flatnonzero(mask).tolist())
    return frozenset(
        i
        for i in range(positions.shape[0])
        if point_in_polygon(positions[i, 0], positions[i, 1], selector.vertices)
    )


def select_region(layout, selector: RegionSelector) -> frozenset[int]:
    """Sample indices of a ProjectedLayout inside the selector."""
    return select_positions(layout.positions, selector)
