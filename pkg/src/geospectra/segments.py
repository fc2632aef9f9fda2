"""Planar point/segment distance and intersection predicates."""
from __future__ import annotations

import math

import numpy as np


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def closest_param(p, a, b) -> float:
    """Parameter ``t`` in [0, 1] of the point on ``[a, b]`` closest to ``p``."""
    a = np.asarray(a, dtype=float)
    ab = np.asarray(b, dtype=float) - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return 0.0
    t = float((np.asarray(p, dtype=float) - a) @ ab) / denom
    return min(1.0, max(0.0, t))


def point_segment_distance(p, a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = closest_param(p, a, b)
    q = a + t * (b - a)
    return float(np.linalg.norm(np.asarray(p, dtype=float) - q))


def proper_intersection(a, b, c, d, tol: float = 0.0):
    """Intersection point of ``[a,b]`` and ``[c,d]`` if their interiors cross.

    Touching configurations, where an endpoint lies within ``tol`` of the
    other segment, and collinear overlaps return ``None``; in the plane
    those are always witnessed by a point-to-segment distance instead.
    """
    d1 = _cross(c, d, a)
    d2 = _cross(c, d, b)
    d3 = _cross(a, b, c)
    d4 = _cross(a, b, d)
    if not ((d1 > 0 > d2 or d1 < 0 < d2) and (d3 > 0 > d4 or d3 < 0 < d4)):
        return None
    if tol > 0:
        for p, s0, s1 in ((a, c, d), (b, c, d), (c, a, b), (d, a, b)):
            if point_segment_distance(p, s0, s1) <= tol:
                return None
    t = d1 / (d1 - d2)
    a = np.asarray(a, dtype=float)
    return a + t * (np.asarray(b, dtype=float) - a)


def segment_distance(a, b, c, d, tol: float = 0.0) -> float:
    """Euclidean distance between closed segments ``[a,b]`` and ``[c,d]``."""
    if proper_intersection(a, b, c, d, tol) is not None:
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def scene_diameter(coords) -> float:
    coords = np.asarray(coords, dtype=float)
    if len(coords) < 2:
        return 0.0
    span = coords.max(axis=0) - coords.min(axis=0)
    return float(math.hypot(*span)) if span.size == 2 else float(np.linalg.norm(span))
