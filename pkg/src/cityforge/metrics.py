"""Program- and mesh-quality metrics with machine-readable reports.

Covers the four evaluation axes: Format Accuracy (corpus fraction passing
the three-part verdict), Collision Rate (pairwise true-footprint overlap
over block area), ROS (length-weighted share of horizontal feature-edge
directions on the two dominant orthogonal axes), and OTR (actual triangle
count relative to the minimal-triangulation demand of planar patches,
where 1.0 is an ideally tessellated mesh and larger is wasteful).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import geometry
from .executor.assemble import ScenePackage
from .executor.meshes import Mesh, NonManifold
from .programs import BlockProgram, FormatVerdict, check_format

ROS_TOLERANCE_DEG = 5.0
_COPLANAR_DOT = 1.0 - 1e-9
_MIN_PROJECTED = 1e-9


class EmptyCorpus(ValueError):
    pass


class EmptyRegion(ValueError):
    pass


class DegenerateMesh(ValueError):
    """No horizontally projectable edges to measure."""


# ---------------------------------------------------------------------------
# program metrics


def collision_rate(program: BlockProgram) -> float:
    """Total pairwise footprint intersection area over block area."""
    area_l = program.region.area
    if area_l <= 0:
        raise EmptyRegion("block region has zero area")
    polys = [e.polygon.coords for e in program.elements]
    total = 0.0
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            total += geometry.polygon_intersection_area(polys[i], polys[j])
    return total / area_l


def format_accuracy(corpus: Sequence[Union[bytes, str]],
                    kind: str = "block") -> tuple[float, list[FormatVerdict]]:
    """Fraction of corpus items whose full format verdict passes."""
    if not corpus:
        raise EmptyCorpus("format accuracy needs at least one item")
    verdicts = [check_format(item, kind) for item in corpus]
    passing = sum(1 for v in verdicts if v.overall)
    return passing / len(verdicts), verdicts


# ---------------------------------------------------------------------------
# mesh metrics


def _edge_triangle_map(mesh: Mesh) -> dict[tuple[int, int], list[int]]:
    edges: dict[tuple[int, int], list[int]] = {}
    for row, tri in enumerate(mesh.triangles):
        i, j, k = (int(tri[0]), int(tri[1]), int(tri[2]))
        for a, b in ((i, j), (j, k), (k, i)):
            edges.setdefault((min(a, b), max(a, b)), []).append(row)
    return edges


def _triangle_normals(mesh: Mesh) -> np.ndarray:
    v = mesh.vertices
    t = mesh.triangles
    n = np.cross(v[t[:, 1]] - v[t[:, 0]], v[t[:, 2]] - v[t[:, 0]])
    lengths = np.linalg.norm(n, axis=1, keepdims=True)
    lengths[lengths == 0] = 1.0
    return n / lengths


def feature_edges(mesh: Mesh) -> list[tuple[int, int]]:
    """Edges on boundaries or between non-coplanar triangles.

    Triangulation-internal edges of flat faces carry no structural
    information, so they are excluded from direction statistics.
    """
    normals = _triangle_normals(mesh)
    out = []
    for (a, b), rows in _edge_triangle_map(mesh).items():
        if len(rows) == 1:
            out.append((a, b))
        elif len(rows) == 2:
            if float(np.dot(normals[rows[0]], normals[rows[1]])) < _COPLANAR_DOT:
                out.append((a, b))
        else:
            raise NonManifold(f"edge {(a, b)} shared by {len(rows)} triangles")
    return out


def ros(mesh: Mesh, tolerance_deg: float = ROS_TOLERANCE_DEG) -> float:
    """Rectilinearity: share of horizontal edge length on two orthogonal axes.

    Feature edges are projected to the ground plane (vertical edges drop
    out), their directions folded modulo 90 degrees, and the dominant axis
    is the fold angle capturing the most projected length within the
    angular tolerance. Rotating the mesh does not change the score.
    """
    pooled = ros_pool([mesh], tolerance_deg)
    return pooled


def _fold_angles_and_weights(meshes: Iterable[Mesh]) -> tuple[np.ndarray, np.ndarray]:
    angles: list[float] = []
    weights: list[float] = []
    for mesh in meshes:
        if not mesh.triangle_count:
            continue
        for a, b in feature_edges(mesh):
            d = mesh.vertices[b] - mesh.vertices[a]
            proj = math.hypot(float(d[0]), float(d[1]))
            if proj <= _MIN_PROJECTED:
                continue  # vertical edge
            theta = math.atan2(float(d[1]), float(d[0])) % (math.pi / 2.0)
            angles.append(theta)
            weights.append(proj)
    return np.asarray(angles), np.asarray(weights)


def ros_pool(meshes: Sequence[Mesh], tolerance_deg: float = ROS_TOLERANCE_DEG) -> float:
    """ROS over the pooled feature edges of several meshes."""
    angles, weights = _fold_angles_and_weights(meshes)
    if not len(angles):
        raise DegenerateMesh("no horizontally projectable feature edges")
    tol = math.radians(tolerance_deg)
    quarter = math.pi / 2.0
    # Candidate dominant angles: the distinct folded edge angles (binned
    # only to deduplicate; the exact angles stay the candidates).
    order = np.argsort(angles, kind="stable")
    angles = angles[order]
    weights = weights[order]
    candidates = [float(angles[0])]
    for a in angles[1:]:
        if a - candidates[-1] > 1e-7:
            candidates.append(float(a))
    total = float(weights.sum())
    best = 0.0
    for cand in candidates:
        diff = np.abs(angles - cand)
        circ = np.minimum(diff, quarter - diff)
        aligned = float(weights[circ <= tol + 1e-12].sum())
        if aligned > best:
            best = aligned
    return best / total


def _patches(mesh: Mesh) -> list[list[int]]:
    """Connected coplanar triangle groups (region growing over shared edges)."""
    normals = _triangle_normals(mesh)
    edge_map = _edge_triangle_map(mesh)
    neighbors: dict[int, list[int]] = {i: [] for i in range(mesh.triangle_count)}
    for rows in edge_map.values():
        if len(rows) == 2:
            a, b = rows
            if float(np.dot(normals[a], normals[b])) >= _COPLANAR_DOT:
                neighbors[a].append(b)
                neighbors[b].append(a)
        elif len(rows) > 2:
            raise NonManifold(f"edge shared by {len(rows)} triangles")
    seen = [False] * mesh.triangle_count
    patches = []
    for start in range(mesh.triangle_count):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        patch = []
        while stack:
            row = stack.pop()
            patch.append(row)
            for nxt in neighbors[row]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        patches.append(patch)
    return patches


def _patch_demand(mesh: Mesh, patch: list[int]) -> int:
    """Minimal triangle count for one planar patch.

    Walks the patch's boundary loops and counts corner vertices (collinear
    boundary vertices are free). A disk needs corners - 2 triangles; each
    extra loop (hole) adds 2. Falls back to the actual count when the
    boundary cannot be walked (non-disk corner contact).
    """
    in_patch = set(patch)
    directed: dict[int, int] = {}
    for row in patch:
        i, j, k = (int(v) for v in mesh.triangles[row])
        for a, b in ((i, j), (j, k), (k, i)):
            key = (min(a, b), max(a, b))
            # boundary when the opposite triangle is outside the patch
            directed_key = (a, b)
            directed[directed_key] = directed.get(directed_key, 0) + 1
    # A directed edge is on the boundary when its reverse is absent
    # within the patch.
    boundary = {e for e in directed if (e[1], e[0]) not in directed}
    if not boundary:
        return len(patch)  # closed surface patch (e.g. a sphere): earns itself
    succ: dict[int, list[tuple[int, int]]] = {}
    for a, b in boundary:
        succ.setdefault(a, []).append((a, b))
    for options in succ.values():
        options.sort()
    loops: list[list[int]] = []
    remaining = set(boundary)
    while remaining:
        start = min(remaining)
        loop_vertices = [start[0]]
        edge = start
        guard = len(boundary) + 1
        while guard:
            guard -= 1
            remaining.discard(edge)
            nxt_options = [e for e in succ.get(edge[1], ()) if e in remaining]
            if not nxt_options:
                break
            edge = nxt_options[0]
            loop_vertices.append(edge[0])
        if edge[1] != start[0]:
            return len(patch)  # walk failed; demand falls back to actual
        loops.append(loop_vertices)
    corners = 0
    v = mesh.vertices
    for loop in loops:
        n = len(loop)
        for idx in range(n):
            a = v[loop[(idx - 1) % n]]
            b = v[loop[idx]]
            c = v[loop[(idx + 1) % n]]
            ab = b - a
            bc = c - b
            cross = np.linalg.norm(np.cross(ab, bc))
            norm = np.linalg.norm(ab) * np.linalg.norm(bc)
            if norm == 0 or cross > 1e-9 * max(norm, 1.0):
                corners += 1
    demand = corners + 2 * (len(loops) - 1) - 2
    return max(1, min(demand, len(patch)))


def otr_counts(mesh: Mesh) -> tuple[int, int]:
    """(actual triangles, demanded triangles) for one mesh."""
    if not mesh.triangle_count:
        raise DegenerateMesh("empty mesh")
    actual = mesh.triangle_count
    demand = sum(_patch_demand(mesh, patch) for patch in _patches(mesh))
    return actual, demand


def otr(mesh: Mesh) -> float:
    """Over-tessellation ratio: actual / demanded triangles (1.0 is ideal)."""
    actual, demand = otr_counts(mesh)
    return actual / demand


# ---------------------------------------------------------------------------
# scene-level aggregation


def _scene_meshes(scene: ScenePackage, edge_set: str) -> list[Mesh]:
    if edge_set == "shells":
        return [mesh.submesh(["shell"]) for _, mesh in scene.buildings]
    if edge_set == "full":
        meshes = [mesh for _, mesh in scene.buildings]
        meshes += [mesh for _, mesh in scene.greenspaces]
        if scene.streets.triangle_count:
            meshes.append(scene.streets)
        return meshes
    raise ValueError(f"edge_set must be 'shells' or 'full', got {edge_set!r}")


def scene_ros(scene: ScenePackage, edge_set: str = "shells",
              tolerance_deg: float = ROS_TOLERANCE_DEG) -> float:
    meshes = [m for m in _scene_meshes(scene, edge_set) if m.triangle_count]
    if not meshes:
        raise DegenerateMesh("scene has no meshes to measure")
    return ros_pool(meshes, tolerance_deg)


def scene_otr(scene: ScenePackage, edge_set: str = "shells") -> float:
    actual = demand = 0
    for mesh in _scene_meshes(scene, edge_set):
        if not mesh.triangle_count:
            continue
        a, d = otr_counts(mesh)
        actual += a
        demand += d
    if demand == 0:
        raise DegenerateMesh("scene has no meshes to measure")
    return actual / demand


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ReportItem:
    id: str
    collision_rate: Optional[float] = None
    format: Optional[FormatVerdict] = None
    ros: Optional[float] = None
    otr: Optional[float] = None


@dataclass(frozen=True)
class QualityReport:
    format_accuracy: Optional[float]
    collision_rate: Optional[float]
    ros: Optional[float]
    otr: Optional[float]
    per_item: tuple[ReportItem, ...]

    def to_jsonable(self) -> dict:
        return {
            "summary": {
                "format_accuracy": self.format_accuracy,
                "collision_rate": self.collision_rate,
                "ros": self.ros,
                "otr": self.otr,
                "items": len(self.per_item),
            },
            "items": [
                {
                    "id": item.id,
                    "collision_rate": item.collision_rate,
                    "format": item.format.to_jsonable() if item.format else None,
                    "ros": item.ros,
                    "otr": item.otr,
                }
                for item in self.per_item
            ],
        }


def _mean(values: list[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def report(programs: Sequence[tuple[str, Union[bytes, str]]],
           scenes: Optional[Mapping[str, ScenePackage]] = None,
           edge_set: str = "shells") -> QualityReport:
    """Aggregate all metrics over programs and (optionally) their scenes.

    Items are keyed by id; rows are sorted canonically by id regardless of
    input order.
    """
    if not programs and not scenes:
        raise EmptyCorpus("report needs at least one program or scene")
    scenes = scenes or {}
    from .programs import parse_block_program

    items: list[ReportItem] = []
    for item_id, text in programs:
        verdict = check_format(text, kind="block")
        collision = None
        if verdict.overall:
            collision = collision_rate(parse_block_program(text))
        ros_value = otr_value = None
        if item_id in scenes:
            try:
                ros_value = scene_ros(scenes[item_id], edge_set)
            except DegenerateMesh:
                ros_value = None
            try:
                otr_value = scene_otr(scenes[item_id], edge_set)
            except DegenerateMesh:
                otr_value = None
        items.append(ReportItem(id=item_id, collision_rate=collision,
                                format=verdict, ros=ros_value, otr=otr_value))
    program_ids = {item_id for item_id, _ in programs}
    for item_id in sorted(set(scenes) - program_ids):
        items.append(ReportItem(
            id=item_id,
            ros=scene_ros(scenes[item_id], edge_set),
            otr=scene_otr(scenes[item_id], edge_set)))
    items.sort(key=lambda item: item.id)

    verdicts = [i.format for i in items if i.format is not None]
    return QualityReport(
        format_accuracy=(sum(1 for v in verdicts if v.overall) / len(verdicts)
                         if verdicts else None),
        collision_rate=_mean([i.collision_rate for i in items
                              if i.collision_rate is not None]),
        ros=_mean([i.ros for i in items if i.ros is not None]),
        otr=_mean([i.otr for i in items if i.otr is not None]),
        per_item=tuple(items))


CSV_HEADER = "id,collision_rate,json_ok,geom_ok,fields_ok,ros,otr"


def report_csv(quality: QualityReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for item in quality.per_item:
        fmt = item.format
        writer.writerow([
            item.id,
            _csv_num(item.collision_rate),
            "" if fmt is None else int(fmt.json_parsable),
            "" if fmt is None else int(fmt.geometry_valid),
            "" if fmt is None else int(fmt.fields_complete),
            _csv_num(item.ros),
            _csv_num(item.otr),
        ])
    return buf.getvalue()


def _csv_num(value: Optional[float]) -> str:
    return "" if value is None else format(value, ".6g")


def write_report(quality: QualityReport, json_path: Union[str, Path],
                 csv_path: Union[str, Path]) -> None:
    Path(json_path).write_text(
        json.dumps(quality.to_jsonable(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    Path(csv_path).write_text(report_csv(quality), encoding="utf-8")
