"""Scene assembly: programs in, full city block geometry out.

Every building becomes a watertight shell plus facade components and a
roof; greenspaces become thin slabs with a deterministic tree grid; a
street ring with streetlights surrounds the block region. Output ordering
follows program element order and all sampling is seeded, so identical
inputs yield identical scenes byte for byte.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .. import geometry
from ..programs import BlockElement, BlockProgram, BuildingProgram, serialize
from .components import ParametricComponent, component_mesh, realize_component
from .config import ExecutorConfig
from .facade import apply_placement, layout_facade
from .meshes import Mesh, MeshBuilder, box_mesh, cone_mesh, extrude_footprint, prism_mesh


@dataclass
class ScenePackage:
    buildings: list[tuple[str, Mesh]]
    greenspaces: list[tuple[str, Mesh]]
    streets: Mesh
    props: list[tuple[str, tuple[float, float, float]]]
    metadata: dict
    warnings: list[str] = field(default_factory=list)


class AssemblyError(RuntimeError):
    """Mesh construction failed for a specific element."""

    def __init__(self, element_id: str, cause: Exception):
        super().__init__(f"element {element_id!r}: {cause}")
        self.element_id = element_id
        self.cause = cause


_FACADE_MATERIAL_KEYWORDS = [
    ("glass", "glass"),
    ("wood", "wood"), ("wooden", "wood"), ("timber", "wood"),
    ("steel", "metal"), ("metal", "metal"), ("aluminum", "metal"),
]


def wall_material_from_facade(facade: Optional[str]) -> str:
    """Map recognized material words in the facade text to a wall tag."""
    if facade:
        text = facade.lower()
        for keyword, tag in _FACADE_MATERIAL_KEYWORDS:
            if keyword in text:
                return tag
    return "concrete"


def _gable_roof(coords, z_base: float, rise: float, material: str) -> Mesh:
    """Closed gable prism over a 4-vertex CCW footprint."""
    a, b, c, d = (np.array([x, y, z_base]) for x, y in coords)
    if np.linalg.norm(b - a) >= np.linalg.norm(c - b):
        r1 = (d + a) / 2.0
        r2 = (b + c) / 2.0
    else:  # ridge along the other axis: relabel so AB is long
        a, b, c, d = b, c, d, a
        r1 = (d + a) / 2.0
        r2 = (b + c) / 2.0
    r1 = r1 + np.array([0.0, 0.0, rise])
    r2 = r2 + np.array([0.0, 0.0, rise])
    builder = MeshBuilder()
    ia, ib, ic, id_, ir1, ir2 = (builder.add_vertex(*v)
                                 for v in (a, b, c, d, r1, r2))
    for tri in [(ia, ic, ib), (ia, id_, ic),          # bottom, faces -z
                (ia, ib, ir2), (ia, ir2, ir1),        # slope over AB
                (ic, id_, ir1), (ic, ir1, ir2),       # slope over CD
                (ib, ic, ir2), (id_, ia, ir1)]:       # gable ends
        builder.add_triangle(*tri, material)
    return builder.build()


def _build_roof(element: BlockElement, roof: ParametricComponent,
                height: float) -> Mesh:
    coords = element.polygon.coords
    thickness = float(roof.param("thickness", 0.3))
    profile = roof.param("profile", "flat")
    if profile == "pitched" and len(coords) == 4:
        box = element.polygon.aabb()
        rise = min(float(roof.param("pitch_rise", 2.0)),
                   0.5 * min(box.width, box.height))
        return _gable_roof(coords, height, rise, roof.material_tag)
    # Pitched roofs are only defined on rectangles; everything else is a slab.
    return prism_mesh(coords, height, height + thickness,
                      roof.material_tag, roof.material_tag)


def build_building_mesh(element: BlockElement,
                        program: Optional[BuildingProgram],
                        config: ExecutorConfig) -> Mesh:
    """Shell + facade components + roof for one building element."""
    wall = wall_material_from_facade(element.facade)
    shell = extrude_footprint(element, config.floor_height,
                              config.default_floor_count, wall_material=wall)
    builder = MeshBuilder()
    builder.append_mesh(shell, "shell")
    if program is not None:
        floors = element.floor_count or config.default_floor_count
        frames = geometry.edge_frames(element.polygon.coords)
        longest = max(range(len(frames)), key=lambda i: frames[i].length)
        for i, frame in enumerate(frames):
            for comp, transform in layout_facade(
                    frame, floors, config.floor_height, program, config,
                    with_door=(i == longest)):
                placed = apply_placement(component_mesh(comp), transform)
                builder.append_mesh(placed, comp.component_type)
        roof = program.component("roof")
        if roof is not None:
            realized = realize_component(roof, config.components_path)
            builder.append_mesh(
                _build_roof(element, realized, floors * config.floor_height),
                "roof")
    return builder.build()


def build_greenspace_mesh(element: BlockElement, config: ExecutorConfig) -> Mesh:
    mesh = prism_mesh(element.polygon.coords, 0.0, config.greenspace_thickness,
                      "greenery", "greenery")
    mesh.face_groups = [("greenspace", 0, mesh.triangle_count)]
    return mesh


def sample_tree_positions(element: BlockElement, config: ExecutorConfig,
                          seed: int) -> list[tuple[float, float, float]]:
    """Deterministic tree grid inside a greenspace polygon.

    Global lattice at tree_spacing, kept when at least tree_inset from the
    boundary; a seeded jitter is applied only when the jittered point still
    satisfies the inset.
    """
    coords = element.polygon.coords
    box = element.polygon.aabb()
    spacing = config.tree_spacing
    rng = random.Random(f"{seed}:{element.id}")
    positions: list[tuple[float, float, float]] = []
    i0 = math.ceil(box.x_min / spacing)
    i1 = math.floor(box.x_max / spacing)
    j0 = math.ceil(box.y_min / spacing)
    j1 = math.floor(box.y_max / spacing)
    for j in range(j0, j1 + 1):
        for i in range(i0, i1 + 1):
            x, y = i * spacing, j * spacing
            if not _inside_with_inset(x, y, coords, config.tree_inset):
                continue
            jx = x + rng.uniform(-config.tree_jitter, config.tree_jitter)
            jy = y + rng.uniform(-config.tree_jitter, config.tree_jitter)
            if _inside_with_inset(jx, jy, coords, config.tree_inset):
                x, y = jx, jy
            positions.append((round(x, 6), round(y, 6), 0.0))
    return positions


def _inside_with_inset(x: float, y: float, coords, inset: float) -> bool:
    return (geometry.point_in_polygon((x, y), coords)
            and geometry.distance_to_boundary((x, y), coords) >= inset)


def build_street_ring(program: BlockProgram, config: ExecutorConfig) -> Mesh:
    """Four flat slabs surrounding the block region."""
    r = program.region
    w = config.street_width
    t = config.street_thickness
    builder = MeshBuilder()
    strips = [
        ((r.x_min - w, r.y_max), (r.x_max + w, r.y_max + w)),      # north
        ((r.x_min - w, r.y_min - w), (r.x_max + w, r.y_min)),      # south
        ((r.x_min - w, r.y_min), (r.x_min, r.y_max)),              # west
        ((r.x_max, r.y_min), (r.x_max + w, r.y_max)),              # east
    ]
    for (x0, y0), (x1, y1) in strips:
        rect = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        builder.append_mesh(prism_mesh(rect, 0.0, t, "asphalt", "asphalt"),
                            "street")
    return builder.build()


def streetlight_positions(program: BlockProgram,
                          config: ExecutorConfig) -> list[tuple[float, float, float]]:
    """Evenly spaced along the ring centerline, walking CCW from the SW corner."""
    r = program.region
    inset = config.street_width / 2.0
    x0, y0 = r.x_min - inset, r.y_min - inset
    x1, y1 = r.x_max + inset, r.y_max + inset
    loop = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    perimeter = 2 * ((x1 - x0) + (y1 - y0))
    count = max(4, int(perimeter // config.streetlight_spacing))
    step = perimeter / count
    positions = []
    for k in range(count):
        dist = k * step
        for i in range(4):
            a, b = loop[i], loop[(i + 1) % 4]
            seg = math.hypot(b[0] - a[0], b[1] - a[1])
            if dist <= seg or i == 3:
                f = min(dist / seg, 1.0)
                positions.append((round(a[0] + f * (b[0] - a[0]), 6),
                                  round(a[1] + f * (b[1] - a[1]), 6), 0.0))
                break
            dist -= seg
    return positions


def tree_mesh() -> Mesh:
    builder = MeshBuilder()
    builder.append_mesh(box_mesh((0.3, 0.3, 2.0), "wood",
                                 origin=(-0.15, -0.15, 0.0)), "trunk")
    builder.append_mesh(cone_mesh(1.2, 2.6, "greenery", segments=8,
                                  origin=(0.0, 0.0, 1.8)), "crown")
    return builder.build()


def streetlight_mesh() -> Mesh:
    builder = MeshBuilder()
    builder.append_mesh(box_mesh((0.15, 0.15, 4.5), "metal",
                                 origin=(-0.075, -0.075, 0.0)), "pole")
    builder.append_mesh(box_mesh((0.6, 0.25, 0.25), "metal",
                                 origin=(-0.3, -0.125, 4.5)), "head")
    return builder.build()


def program_digest(program) -> str:
    return hashlib.sha256(serialize(program).encode("utf-8")).hexdigest()


def assemble_scene(block: BlockProgram,
                   buildings: Optional[Mapping[str, BuildingProgram]] = None,
                   config: ExecutorConfig = ExecutorConfig()) -> ScenePackage:
    """Execute the programs into a full scene package.

    Building programs are optional per element; a missing one produces a
    bare shell and a warning. Errors during mesh construction are annotated
    with the offending element id.
    """
    buildings = buildings or {}
    building_meshes: list[tuple[str, Mesh]] = []
    greenspace_meshes: list[tuple[str, Mesh]] = []
    props: list[tuple[str, tuple[float, float, float]]] = []
    warnings: list[str] = []

    for element in block.elements:
        try:
            if element.is_greenspace:
                greenspace_meshes.append(
                    (element.id, build_greenspace_mesh(element, config)))
                for pos in sample_tree_positions(element, config, config.seed):
                    props.append(("tree", pos))
            else:
                program = buildings.get(element.id)
                if program is None:
                    warnings.append(
                        f"element {element.id!r}: no building program, bare shell")
                building_meshes.append(
                    (element.id, build_building_mesh(element, program, config)))
        except Exception as exc:
            raise AssemblyError(element.id, exc) from exc

    streets = build_street_ring(block, config)
    for pos in streetlight_positions(block, config):
        props.append(("streetlight", pos))

    metadata = {
        "block_program_sha256": program_digest(block),
        "building_programs_sha256": {
            eid: program_digest(p) for eid, p in sorted(buildings.items())},
        "floor_height": config.floor_height,
        "seed": config.seed,
    }
    return ScenePackage(buildings=building_meshes, greenspaces=greenspace_meshes,
                        streets=streets, props=props, metadata=metadata,
                        warnings=warnings)
