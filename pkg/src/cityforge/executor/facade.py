"""Facade component placement along footprint edges.

Windows fill a uniform bay grid per floor; one door replaces the ground
slot nearest the midpoint of the building's longest edge. Components face
outward (+y local axis onto the edge's outward normal, a rotation about
the vertical axis) and sit a protrusion epsilon off the wall so they never
pierce it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import EdgeFrame
from ..programs import BuildingProgram
from .components import ParametricComponent, component_mesh, realize_component
from .config import ExecutorConfig
from .meshes import Mesh


class EdgeTooShort(ValueError):
    """Edge below the minimum bay width (callers usually just skip)."""


@dataclass(frozen=True)
class PlacementTransform:
    """Scale, then rotate about the vertical (z) axis, then translate."""

    rotation: float                      # radians about +z
    translation: tuple[float, float, float]
    scale: tuple[float, float, float]

    def __post_init__(self) -> None:
        if min(self.scale) <= 0:
            raise ValueError(f"scale components must be positive: {self.scale}")

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        return rot @ np.diag(self.scale)


def apply_placement(mesh: Mesh, transform: PlacementTransform) -> Mesh:
    m = transform.matrix()
    verts = mesh.vertices @ m.T + np.asarray(transform.translation)
    return Mesh(verts, mesh.triangles.copy(), list(mesh.face_materials),
                list(mesh.face_groups))


def _facing_rotation(outward_normal: tuple[float, float]) -> float:
    """Angle about +z mapping the local +y axis onto the outward normal."""
    nx, ny = outward_normal
    return math.atan2(-nx, ny)


def layout_facade(edge: EdgeFrame, floors: int, floor_height: float,
                  program: BuildingProgram,
                  config: ExecutorConfig = ExecutorConfig(),
                  with_door: bool = False,
                  ) -> list[tuple[ParametricComponent, PlacementTransform]]:
    """Window grid (one row per floor) and optionally the door on this edge.

    Edges shorter than the minimum bay width yield an empty list. Window
    centers divide the edge interior (length minus both margins) into
    floor(interior / bay_width) even bays; on a door edge the ground-floor
    slot nearest the edge midpoint becomes the door.
    """
    placements: list[tuple[ParametricComponent, PlacementTransform]] = []
    if edge.length < config.min_bay_width:
        return placements
    window = program.component("window")
    door = program.component("door") if with_door else None
    if window is None and door is None:
        return placements

    interior = edge.length - 2.0 * config.edge_margin
    slots = int(interior // config.bay_width) if interior > 0 else 0
    pitch = interior / slots if slots else 0.0
    centers = [config.edge_margin + (k + 0.5) * pitch for k in range(slots)]
    rotation = _facing_rotation(edge.outward_normal)

    def anchor(along: float, z: float) -> tuple[float, float, float]:
        x = edge.start[0] + edge.direction[0] * along + edge.outward_normal[0] * config.protrusion
        y = edge.start[1] + edge.direction[1] * along + edge.outward_normal[1] * config.protrusion
        return (x, y, z)

    door_slot = None
    if door is not None and slots:
        mid = edge.length / 2.0
        door_slot = min(range(slots), key=lambda k: abs(centers[k] - mid))

    if window is not None:
        realized = realize_component(window, config.components_path)
        w = float(realized.param("width", 1.2))
        h = min(float(realized.param("height", 1.4)), 0.8 * floor_height)
        w = min(w, max(0.5, pitch - 0.2)) if slots else w
        for floor in range(floors):
            z_center = (floor + 0.5) * floor_height
            for k, along in enumerate(centers):
                if floor == 0 and door_slot is not None and k == door_slot:
                    continue
                placements.append((realized, PlacementTransform(
                    rotation=rotation,
                    translation=anchor(along, z_center),
                    scale=(w, 1.0, h))))

    if door is not None and door_slot is not None:
        realized = realize_component(door, config.components_path)
        w = float(realized.param("width", 1.1))
        h = min(float(realized.param("height", 2.2)),
                max(1.8, 0.9 * floors * floor_height))
        placements.append((realized, PlacementTransform(
            rotation=rotation,
            translation=anchor(centers[door_slot], h / 2.0),
            scale=(w, 1.0, h))))
    return placements


def placed_component_mesh(component: ParametricComponent,
                          transform: PlacementTransform) -> Mesh:
    return apply_placement(component_mesh(component), transform)
