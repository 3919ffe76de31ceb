"""2D polygon math shared by scoring, metrics, and the executor.

All coordinates are meters in block space, in plain float64. Footprints in
this domain are small simple polygons (rectangles, L-shapes), so an absolute
coincidence epsilon is adequate; no exact arithmetic. Valid up to coordinate
spans of a few kilometers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

COINCIDENCE_EPS = 1e-9   # meters (and m^2 for cross products at this scale)
SLIVER_AREA_EPS = 1e-6   # m^2; clip fragments below this are numeric noise

Coord = tuple[float, float]


class DegenerateEdge(ValueError):
    """Polygon edge shorter than the coincidence epsilon."""


class TriangulationFailure(ValueError):
    """Ear clipping could not consume the polygon (not simple, or degenerate)."""


def coords_of(polygon) -> list[Coord]:
    """Coerce a polygon-like object to a list of (x, y) tuples.

    Accepts anything with a ``vertices`` attribute (program footprints) or a
    bare sequence of 2-sequences / objects with ``x``/``y``.
    """
    verts = getattr(polygon, "vertices", polygon)
    out: list[Coord] = []
    for v in verts:
        if hasattr(v, "x"):
            out.append((float(v.x), float(v.y)))
        else:
            out.append((float(v[0]), float(v[1])))
    return out


@dataclass(frozen=True)
class AABB:
    """Axis-aligned bounding box in meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"inverted AABB: {self}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    def contains_point(self, x: float, y: float, eps: float = 0.0) -> bool:
        return (self.x_min - eps <= x <= self.x_max + eps
                and self.y_min - eps <= y <= self.y_max + eps)


@dataclass(frozen=True)
class EdgeFrame:
    """One polygon edge with its placement frame.

    For a CCW polygon the outward normal is the edge direction rotated -90
    degrees, i.e. it points away from the interior.
    """

    start: Coord
    end: Coord
    length: float
    direction: Coord
    outward_normal: Coord

    @property
    def midpoint(self) -> Coord:
        return ((self.start[0] + self.end[0]) / 2.0,
                (self.start[1] + self.end[1]) / 2.0)


def signed_area(polygon) -> float:
    """Shoelace area; positive for counter-clockwise vertex order."""
    pts = coords_of(polygon)
    if len(pts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    acc = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        acc += x0 * y1 - x1 * y0
    return acc / 2.0


def polygon_area(polygon) -> float:
    return abs(signed_area(polygon))


def centroid(polygon) -> Coord:
    """Area centroid (first moment over signed area)."""
    pts = coords_of(polygon)
    a = signed_area(pts)
    if abs(a) < SLIVER_AREA_EPS:
        # Fall back to the vertex mean for near-degenerate shapes.
        n = len(pts)
        return (sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n)
    cx = cy = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        w = x0 * y1 - x1 * y0
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    return (cx / (6.0 * a), cy / (6.0 * a))


def _orient(a: Coord, b: Coord, c: Coord) -> float:
    """Twice the signed area of triangle abc (>0 when c is left of a->b)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _in_box(a: Coord, b: Coord, p: Coord, eps: float) -> bool:
    return (min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
            and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps)


def segments_intersect(p1: Coord, p2: Coord, p3: Coord, p4: Coord,
                       eps: float = COINCIDENCE_EPS) -> bool:
    """True if closed segments p1-p2 and p3-p4 share any point."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if (((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps))
            and ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps))):
        return True
    if abs(d1) <= eps and _in_box(p3, p4, p1, eps):
        return True
    if abs(d2) <= eps and _in_box(p3, p4, p2, eps):
        return True
    if abs(d3) <= eps and _in_box(p1, p2, p3, eps):
        return True
    if abs(d4) <= eps and _in_box(p1, p2, p4, eps):
        return True
    return False


def is_simple(polygon) -> bool:
    """True iff the polygon has no improper edge intersections.

    Non-adjacent edges may not touch at all; adjacent edges may share only
    their common endpoint (a doubled-back collinear spur is rejected).
    O(n^2), fine for footprint-sized polygons.
    """
    pts = coords_of(polygon)
    n = len(pts)
    if n < 3:
        return False
    eps = COINCIDENCE_EPS
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        if math.hypot(a2[0] - a1[0], a2[1] - a1[1]) <= eps:
            return False  # zero-length edge
        for j in range(i + 1, n):
            b1, b2 = pts[j], pts[(j + 1) % n]
            adjacent = (j == i + 1) or (i == 0 and j == n - 1)
            if adjacent:
                # Shared endpoint allowed; a collinear overlap is not.
                if j == i + 1:
                    shared, pa, pb = a2, a1, b2
                else:
                    shared, pa, pb = a1, a2, b1
                if abs(_orient(pa, shared, pb)) <= eps:
                    dot = ((pa[0] - shared[0]) * (pb[0] - shared[0])
                           + (pa[1] - shared[1]) * (pb[1] - shared[1]))
                    if dot > 0:
                        return False
                continue
            if segments_intersect(a1, a2, b1, b2, eps):
                return False
    return True


def aabb_of(polygon) -> AABB:
    """Tight bounds over the polygon vertices."""
    pts = coords_of(polygon)
    if not pts:
        raise ValueError("empty polygon")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return AABB(min(xs), max(xs), min(ys), max(ys))


def aabb_intersection_area(a: AABB, b: AABB) -> float:
    dx = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    dy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if dx <= 0.0 or dy <= 0.0:
        return 0.0
    return dx * dy


def is_convex(polygon) -> bool:
    """True for convex vertex loops (collinear runs allowed), any orientation."""
    pts = coords_of(polygon)
    n = len(pts)
    if n < 3:
        return False
    sign = 0.0
    for i in range(n):
        cross = _orient(pts[i], pts[(i + 1) % n], pts[(i + 2) % n])
        if abs(cross) <= COINCIDENCE_EPS:
            continue
        if sign == 0.0:
            sign = cross
        elif cross * sign < 0.0:
            return False
    return True


def clip_convex(subject: Sequence[Coord], clip: Sequence[Coord]) -> list[Coord]:
    """Sutherland-Hodgman clip of ``subject`` against a convex CCW ``clip``."""
    output = list(subject)
    m = len(clip)
    for i in range(m):
        if not output:
            return []
        c1, c2 = clip[i], clip[(i + 1) % m]
        acc: list[Coord] = []
        prev = output[-1]
        prev_in = _orient(c1, c2, prev) >= -COINCIDENCE_EPS
        for cur in output:
            cur_in = _orient(c1, c2, cur) >= -COINCIDENCE_EPS
            if cur_in != prev_in:
                acc.append(_line_intersection(c1, c2, prev, cur))
            if cur_in:
                acc.append(cur)
            prev, prev_in = cur, cur_in
        output = acc
    return output


def _line_intersection(a1: Coord, a2: Coord, b1: Coord, b2: Coord) -> Coord:
    """Intersection of infinite lines a1-a2 and b1-b2 (caller ensures non-parallel)."""
    da = (a2[0] - a1[0], a2[1] - a1[1])
    db = (b2[0] - b1[0], b2[1] - b1[1])
    denom = da[0] * db[1] - da[1] * db[0]
    if abs(denom) < 1e-30:
        return b1
    t = ((b1[0] - a1[0]) * db[1] - (b1[1] - a1[1]) * db[0]) / denom
    return (a1[0] + t * da[0], a1[1] + t * da[1])


def _ccw(pts: list[Coord]) -> list[Coord]:
    return pts if signed_area(pts) >= 0 else list(reversed(pts))


def polygon_intersection_area(a, b) -> float:
    """Area of the boolean intersection of two simple polygons.

    Convex pairs clip directly (Sutherland-Hodgman). If either input is
    concave it is ear-clipped into triangles and the convex pieces are
    intersected pairwise; the triangles partition their polygon, so the
    piecewise areas sum exactly. Slivers below SLIVER_AREA_EPS collapse to 0.
    """
    pa = _ccw(coords_of(a))
    pb = _ccw(coords_of(b))
    if aabb_intersection_area(aabb_of(pa), aabb_of(pb)) <= 0.0:
        return 0.0
    if is_convex(pa) and is_convex(pb):
        region = clip_convex(pa, pb)
        if len(region) < 3:
            return 0.0
        area = abs(signed_area(region))
        return area if area >= SLIVER_AREA_EPS else 0.0
    parts_a = _convex_pieces(pa)
    parts_b = _convex_pieces(pb)
    total = 0.0
    for ta in parts_a:
        box_a = aabb_of(ta)
        for tb in parts_b:
            if aabb_intersection_area(box_a, aabb_of(tb)) <= 0.0:
                continue
            region = clip_convex(ta, tb)
            if len(region) >= 3:
                total += abs(signed_area(region))
    return total if total >= SLIVER_AREA_EPS else 0.0


def _convex_pieces(pts: list[Coord]) -> list[list[Coord]]:
    if is_convex(pts):
        return [pts]
    return [[pts[i], pts[j], pts[k]] for i, j, k in triangulate(pts)]


def triangulate(polygon) -> list[tuple[int, int, int]]:
    """Ear-clipping triangulation of a simple CCW polygon.

    Returns index triples into the input vertex list. O(n^2); footprints
    stay tiny so that is fine. Raises TriangulationFailure when no ear can
    be found (non-simple or fully degenerate input).
    """
    pts = coords_of(polygon)
    n = len(pts)
    if n < 3:
        raise TriangulationFailure("fewer than 3 vertices")
    if n == 3:
        return [(0, 1, 2)]
    active = list(range(n))
    tris: list[tuple[int, int, int]] = []
    guard = n * n + 8
    while len(active) > 3 and guard > 0:
        guard -= 1
        clipped = False
        m = len(active)
        for i in range(m):
            ia, ib, ic = active[(i - 1) % m], active[i], active[(i + 1) % m]
            a, b, c = pts[ia], pts[ib], pts[ic]
            if _orient(a, b, c) <= COINCIDENCE_EPS:
                continue  # reflex or collinear corner
            if any(_point_in_triangle(pts[active[j]], a, b, c)
                   for j in range(m)
                   if active[j] not in (ia, ib, ic)):
                continue
            tris.append((ia, ib, ic))
            active.pop(i)
            clipped = True
            break
        if not clipped:
            raise TriangulationFailure("no ear found; polygon is not simple CCW")
    if len(active) == 3:
        tris.append((active[0], active[1], active[2]))
    # A wrong cover betrays a non-simple input: triangle areas must add up
    # to the shoelace area of the loop.
    covered = sum(abs(_orient(pts[i], pts[j], pts[k])) / 2.0 for i, j, k in tris)
    target = signed_area(pts)
    if abs(covered - target) > max(1e-6, 1e-9 * covered):
        raise TriangulationFailure("triangle cover mismatch; polygon is not simple CCW")
    return tris


def _point_in_triangle(p: Coord, a: Coord, b: Coord, c: Coord) -> bool:
    d1 = _orient(a, b, p)
    d2 = _orient(b, c, p)
    d3 = _orient(c, a, p)
    neg = d1 < -COINCIDENCE_EPS or d2 < -COINCIDENCE_EPS or d3 < -COINCIDENCE_EPS
    pos = d1 > COINCIDENCE_EPS or d2 > COINCIDENCE_EPS or d3 > COINCIDENCE_EPS
    return not (neg and pos)


def point_in_polygon(p: Coord, polygon) -> bool:
    """Even-odd ray cast; boundary points count as inside."""
    pts = coords_of(polygon)
    n = len(pts)
    x, y = p
    inside = False
    for i in range(n):
        (x0, y0), (x1, y1) = pts[i], pts[(i + 1) % n]
        if distance_point_to_segment(p, (x0, y0), (x1, y1)) <= COINCIDENCE_EPS:
            return True
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xi > x:
                inside = not inside
    return inside


def distance_point_to_segment(p: Coord, a: Coord, b: Coord) -> float:
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg_sq = dx * dx + dy * dy
    if seg_sq <= 0.0:
        return math.hypot(p[0] - ax, p[1] - ay)
    t = ((p[0] - ax) * dx + (p[1] - ay) * dy) / seg_sq
    t = max(0.0, min(1.0, t))
    return math.hypot(p[0] - (ax + t * dx), p[1] - (ay + t * dy))


def distance_to_boundary(p: Coord, polygon) -> float:
    """Distance from a point to the polygon outline (0 on the boundary)."""
    pts = coords_of(polygon)
    n = len(pts)
    return min(distance_point_to_segment(p, pts[i], pts[(i + 1) % n])
               for i in range(n))


def edge_frames(polygon) -> list[EdgeFrame]:
    """Per-edge length/direction/outward-normal frames, in vertex order.

    Requires a CCW polygon; the outward normal is the direction rotated -90
    degrees, so for the bottom edge of a CCW square it points toward -y.
    """
    pts = coords_of(polygon)
    n = len(pts)
    frames: list[EdgeFrame] = []
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        length = math.hypot(b[0] - a[0], b[1] - a[1])
        if length < COINCIDENCE_EPS:
            raise DegenerateEdge(f"edge {i} has length {length}")
        ux, uy = (b[0] - a[0]) / length, (b[1] - a[1]) / length
        frames.append(EdgeFrame(start=a, end=b, length=length,
                                direction=(ux, uy), outward_normal=(uy, -ux)))
    return frames
