"""Triangle meshes and footprint extrusion.

World frame is Z-up: footprints live in the XY ground plane and buildings
extrude along +z. All triangles wind counter-clockwise seen from outside,
so closed meshes have outward normals and a positive divergence-theorem
volume. Face groups tag triangle ranges ("shell", "window:3", ...) so a
building's watertight shell stays separable from its facade attachments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .. import geometry
from ..programs import BlockElement

DEGENERATE_TRI_EPS = 1e-12  # m^2


class NotABuilding(ValueError):
    """Extrusion requested for a non-building element."""


class TriangulationFailure(ValueError):
    """Cap triangulation failed (non-simple footprint)."""


class NonManifold(ValueError):
    """Mesh violates the closed 2-manifold edge condition."""


@dataclass
class Mesh:
    """Indexed triangle mesh with per-face material tags and named groups."""

    vertices: np.ndarray                 # (n, 3) float64
    triangles: np.ndarray                # (m, 3) int32
    face_materials: list[str]
    face_groups: list[tuple[str, int, int]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)
        if len(self.face_materials) != len(self.triangles):
            raise ValueError("one material tag per triangle required")
        if len(self.triangles) and self.triangles.max(initial=-1) >= len(self.vertices):
            raise ValueError("triangle index out of range")
        if not self.face_groups and len(self.triangles):
            self.face_groups = [("default", 0, len(self.triangles))]

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        if not len(self.vertices):
            zero = np.zeros(3)
            return zero, zero
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def height(self) -> float:
        lo, hi = self.aabb()
        return float(hi[2] - lo[2])

    def translated(self, offset: Sequence[float]) -> "Mesh":
        return Mesh(self.vertices + np.asarray(offset, dtype=np.float64),
                    self.triangles.copy(), list(self.face_materials),
                    list(self.face_groups))

    def submesh(self, group_names: Iterable[str]) -> "Mesh":
        """Extract the triangles of the named groups (vertices reindexed)."""
        wanted = set(group_names)
        rows: list[int] = []
        groups: list[tuple[str, int, int]] = []
        for name, start, end in self.face_groups:
            if name in wanted or name.split(":", 1)[0] in wanted:
                groups.append((name, len(rows), len(rows) + (end - start)))
                rows.extend(range(start, end))
        tris = self.triangles[rows]
        used = np.unique(tris) if len(tris) else np.empty(0, dtype=np.int32)
        remap = {int(v): i for i, v in enumerate(used)}
        new_tris = np.array([[remap[int(v)] for v in tri] for tri in tris],
                            dtype=np.int32).reshape(-1, 3)
        return Mesh(self.vertices[used] if len(used) else np.empty((0, 3)),
                    new_tris, [self.face_materials[r] for r in rows], groups)

    def volume(self) -> float:
        """Signed volume by the divergence theorem (positive when outward)."""
        v = self.vertices
        t = self.triangles
        a, b, c = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        return float(np.einsum("ij,ij->i", a, np.cross(b, c)).sum() / 6.0)

    def is_closed_manifold(self) -> bool:
        """Every directed edge paired with exactly one opposite edge."""
        if not len(self.triangles):
            return False
        directed: dict[tuple[int, int], int] = {}
        for tri in self.triangles:
            i, j, k = (int(tri[0]), int(tri[1]), int(tri[2]))
            if i == j or j == k or k == i:
                return False
            for a, b in ((i, j), (j, k), (k, i)):
                directed[(a, b)] = directed.get((a, b), 0) + 1
        for (a, b), count in directed.items():
            if count != 1 or directed.get((b, a), 0) != 1:
                return False
        return not self.has_degenerate_triangles()

    def has_degenerate_triangles(self, eps: float = DEGENERATE_TRI_EPS) -> bool:
        v = self.vertices
        t = self.triangles
        if not len(t):
            return False
        cross = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
        areas = 0.5 * np.linalg.norm(cross, axis=1)
        return bool((areas <= eps).any())

    def euler_characteristic(self) -> int:
        verts = {int(v) for tri in self.triangles for v in tri}
        edges = set()
        for tri in self.triangles:
            i, j, k = (int(tri[0]), int(tri[1]), int(tri[2]))
            for a, b in ((i, j), (j, k), (k, i)):
                edges.add((min(a, b), max(a, b)))
        return len(verts) - len(edges) + len(self.triangles)


class MeshBuilder:
    """Accumulates triangles into a Mesh, tracking group boundaries."""

    def __init__(self) -> None:
        self._vertices: list[tuple[float, float, float]] = []
        self._triangles: list[tuple[int, int, int]] = []
        self._materials: list[str] = []
        self._groups: list[tuple[str, int, int]] = []

    def add_vertex(self, x: float, y: float, z: float) -> int:
        self._vertices.append((x, y, z))
        return len(self._vertices) - 1

    def add_triangle(self, i: int, j: int, k: int, material: str) -> None:
        self._triangles.append((i, j, k))
        self._materials.append(material)

    def append_mesh(self, mesh: Mesh, group: str) -> None:
        base = len(self._vertices)
        start = len(self._triangles)
        self._vertices.extend(map(tuple, mesh.vertices))
        for tri, mat in zip(mesh.triangles, mesh.face_materials):
            self._triangles.append((base + int(tri[0]), base + int(tri[1]),
                                    base + int(tri[2])))
            self._materials.append(mat)
        self._groups.append((group, start, len(self._triangles)))

    def open_group(self, name: str) -> int:
        return len(self._triangles)

    def close_group(self, name: str, start: int) -> None:
        if len(self._triangles) > start:
            self._groups.append((name, start, len(self._triangles)))

    def build(self) -> Mesh:
        return Mesh(np.array(self._vertices, dtype=np.float64).reshape(-1, 3),
                    np.array(self._triangles, dtype=np.int32).reshape(-1, 3),
                    self._materials, self._groups)


# ---------------------------------------------------------------------------
# primitive solids (all closed, outward-wound)


def box_mesh(size: Sequence[float], material: str,
             origin: Sequence[float] = (0.0, 0.0, 0.0)) -> Mesh:
    """Axis-aligned closed box; ``origin`` is the min corner."""
    sx, sy, sz = (float(s) for s in size)
    ox, oy, oz = (float(o) for o in origin)
    corners = [(ox + dx * sx, oy + dy * sy, oz + dz * sz)
               for dz in (0, 1) for dy in (0, 1) for dx in (0, 1)]
    # index: x + 2y + 4z over (dx, dy, dz)
    faces = [
        (0, 2, 3, 1),  # bottom (-z)
        (4, 5, 7, 6),  # top (+z)
        (0, 1, 5, 4),  # front (-y)
        (2, 6, 7, 3),  # back (+y)
        (0, 4, 6, 2),  # left (-x)
        (1, 3, 7, 5),  # right (+x)
    ]
    tris = []
    for a, b, c, d in faces:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return Mesh(np.array(corners), np.array(tris), [material] * 12)


def prism_mesh(coords_2d: Sequence[tuple[float, float]], z0: float, z1: float,
               side_material: str, cap_material: str,
               rings: int = 1) -> Mesh:
    """Closed extrusion of a simple CCW polygon from z0 to z1.

    ``rings`` splits the side walls into that many horizontal bands (all
    bands share ring vertices, keeping the solid a closed 2-manifold).
    """
    pts = [(float(x), float(y)) for x, y in coords_2d]
    n = len(pts)
    try:
        cap = geometry.triangulate(pts)
    except geometry.TriangulationFailure as exc:
        raise TriangulationFailure(str(exc)) from exc
    builder = MeshBuilder()
    for r in range(rings + 1):
        z = z0 + (z1 - z0) * r / rings
        for x, y in pts:
            builder.add_vertex(x, y, z)
    for r in range(rings):
        lo = r * n
        hi = (r + 1) * n
        for i in range(n):
            a, b = lo + i, lo + (i + 1) % n
            c, d = hi + (i + 1) % n, hi + i
            builder.add_triangle(a, b, c, side_material)
            builder.add_triangle(a, c, d, side_material)
    top = rings * n
    for i, j, k in cap:
        builder.add_triangle(i, k, j, cap_material)          # bottom faces -z
        builder.add_triangle(top + i, top + j, top + k, cap_material)
    return builder.build()


def cone_mesh(radius: float, height: float, material: str,
              segments: int = 8,
              origin: Sequence[float] = (0.0, 0.0, 0.0)) -> Mesh:
    """Closed cone, apex up."""
    ox, oy, oz = (float(o) for o in origin)
    builder = MeshBuilder()
    ring = [builder.add_vertex(ox + radius * math.cos(2 * math.pi * i / segments),
                               oy + radius * math.sin(2 * math.pi * i / segments),
                               oz)
            for i in range(segments)]
    apex = builder.add_vertex(ox, oy, oz + height)
    base = builder.add_vertex(ox, oy, oz)
    for i in range(segments):
        a, b = ring[i], ring[(i + 1) % segments]
        builder.add_triangle(a, b, apex, material)
        builder.add_triangle(b, a, base, material)
    return builder.build()


# ---------------------------------------------------------------------------
# footprint extrusion


def extrude_footprint(element: BlockElement, floor_height: float,
                      default_floor_count: int = 1,
                      wall_material: str = "concrete",
                      cap_material: str = "concrete") -> Mesh:
    """Extrude a building footprint into its closed prism shell.

    The prism rises ``floor_count x floor_height`` with walls split at
    every floor line; caps are ear-clipped. The result is a closed
    2-manifold with outward normals.
    """
    if element.is_greenspace:
        raise NotABuilding(f"element {element.id!r} is a greenspace")
    floors = element.floor_count or default_floor_count
    if floors < 1:
        raise NotABuilding(f"element {element.id!r} has floor_count < 1")
    mesh = prism_mesh(element.polygon.coords, 0.0, floors * float(floor_height),
                      side_material=wall_material, cap_material=cap_material,
                      rings=floors)
    mesh.face_groups = [("shell", 0, mesh.triangle_count)]
    return mesh


def subdivide4(mesh: Mesh) -> Mesh:
    """Uniform 1-to-4 midpoint subdivision (shared midpoints keep manifoldness)."""
    verts = [tuple(v) for v in mesh.vertices]
    midpoint_cache: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        key = (min(a, b), max(a, b))
        if key not in midpoint_cache:
            va, vb = mesh.vertices[a], mesh.vertices[b]
            verts.append(tuple((va + vb) / 2.0))
            midpoint_cache[key] = len(verts) - 1
        return midpoint_cache[key]

    tris: list[tuple[int, int, int]] = []
    mats: list[str] = []
    groups: list[tuple[str, int, int]] = []
    for name, start, end in mesh.face_groups or [("default", 0, mesh.triangle_count)]:
        g_start = len(tris)
        for row in range(start, end):
            i, j, k = (int(v) for v in mesh.triangles[row])
            m = mesh.face_materials[row]
            ij, jk, ki = midpoint(i, j), midpoint(j, k), midpoint(k, i)
            tris.extend([(i, ij, ki), (ij, j, jk), (ki, jk, k), (ij, jk, ki)])
            mats.extend([m] * 4)
        groups.append((name, g_start, len(tris)))
    return Mesh(np.array(verts), np.array(tris), mats, groups)


def projected_xy_vertices(mesh: Mesh, tol: float = 1e-6) -> set[tuple[float, float]]:
    """Unique XY projections of all mesh vertices, snapped to ``tol``.

    For a prism shell this is exactly the footprint vertex set, which makes
    footprint-equality checks trivial.
    """
    out: set[tuple[float, float]] = set()
    for v in mesh.vertices:
        out.add((round(float(v[0]) / tol) * tol, round(float(v[1]) / tol) * tol))
    return out
