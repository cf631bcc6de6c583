"""Axis-aligned boxes in normalized image coordinates.

Convention used everywhere in this package: coordinates lie in [0, 1],
origin at the top-left corner, y increases downward. "Above" therefore
means smaller y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class BBox:
    """Normalized box with corners (x0, y0) top-left and (x1, y1) bottom-right."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        for name in ("x0", "y0", "x1", "y1"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or math.isnan(v):
                raise ValueError(f"{name} must be a real number, got {v!r}")
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if not self.x0 < self.x1:
            raise ValueError(f"x0={self.x0} must be < x1={self.x1}")
        if not self.y0 < self.y1:
            raise ValueError(f"y0={self.y0} must be < y1={self.y1}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def cx(self) -> float:
        return (self.x0 + self.x1) / 2.0

    @property
    def cy(self) -> float:
        return (self.y0 + self.y1) / 2.0

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def to_list(self) -> list[float]:
        return [self.x0, self.y0, self.x1, self.y1]

    @classmethod
    def from_list(cls, xs) -> "BBox":
        if not isinstance(xs, (list, tuple)) or len(xs) != 4:
            raise ValueError(f"box must be a 4-element list, got {xs!r}")
        return cls(float(xs[0]), float(xs[1]), float(xs[2]), float(xs[3]))


def intersection_area(a: BBox, b: BBox) -> float:
    """Overlap area of two boxes; 0.0 when disjoint."""
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def ioa(inner: BBox, outer: BBox) -> float:
    """Intersection over the *inner* box's own area.

    1.0 iff ``inner`` is contained in ``outer``; 0.0 iff disjoint.
    """
    return intersection_area(inner, outer) / inner.area


def iou(a: BBox, b: BBox) -> float:
    inter = intersection_area(a, b)
    union = a.area + b.area - inter
    return inter / union if union > 0.0 else 0.0


def center_distance(a: BBox, b: BBox) -> float:
    return math.hypot(b.cx - a.cx, b.cy - a.cy)


def horizontal_overlap(a: BBox, b: BBox) -> float:
    return max(0.0, min(a.x1, b.x1) - max(a.x0, b.x0))
