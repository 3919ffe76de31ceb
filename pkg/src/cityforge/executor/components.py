"""Parametric facade components realized from description keywords.

Component descriptions are free text ("sleek, modern, glass, automatic");
a shipped keyword table (data/components.json) maps recognized tokens to
parameter overrides on top of per-type defaults. The mapping is a total
function: unknown tokens fall through, an empty description yields the
type default. Overrides apply in sorted-keyword order, so token order
never matters.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from ..programs import BuildingComponent
from .meshes import Mesh, MeshBuilder, box_mesh, prism_mesh

MATERIAL_TAGS = ("glass", "concrete", "wood", "greenery", "asphalt", "metal")


@dataclass(frozen=True)
class ParametricComponent:
    """A concrete component: type, resolved parameters, material tag.

    The local-space mesh is bounded by a 1 x 1 x depth canonical box:
    x and z in [-0.5, 0.5], y in [0, depth] with +y facing out of the wall.
    """

    component_type: str
    parameters: tuple[tuple[str, object], ...]  # sorted (name, value) pairs
    material_tag: str

    def param(self, name: str, default=None):
        for key, value in self.parameters:
            if key == name:
                return value
        return default


@lru_cache(maxsize=8)
def _load_table(path: Optional[str]) -> dict:
    if path is None:
        text = resources.files("cityforge.data").joinpath("components.json") \
            .read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def description_tokens(description: str) -> set[str]:
    """Lowercased phrase and word tokens of a component description."""
    tokens: set[str] = set()
    for phrase in description.lower().split(","):
        phrase = phrase.strip()
        if not phrase:
            continue
        tokens.add(phrase)
        tokens.update(w for w in re.split(r"[\s/]+", phrase) if w)
    return tokens


def realize_component(component: BuildingComponent,
                      table_path: Optional[str] = None) -> ParametricComponent:
    """Resolve a component description into concrete parameters.

    Matched keywords apply in sorted order, making the result independent
    of token order in the description; types absent from the table get a
    minimal boxy default.
    """
    table = _load_table(table_path)
    spec = table.get(component.component_type,
                     {"defaults": {"width": 1.0, "height": 1.0, "depth": 0.1,
                                   "material": "concrete"},
                      "keywords": {}})
    params = dict(spec["defaults"])
    tokens = description_tokens(component.description)
    for keyword in sorted(spec.get("keywords", {})):
        if keyword in tokens:
            params.update(spec["keywords"][keyword])
    material = params.get("material", "concrete")
    if material not in MATERIAL_TAGS:
        material = "concrete"
    return ParametricComponent(component_type=component.component_type,
                               parameters=tuple(sorted(params.items())),
                               material_tag=str(material))


# ---------------------------------------------------------------------------
# local-space meshes


def _swap_yz(mesh: Mesh) -> Mesh:
    """Map (x, y, z) -> (x, z, y), rewinding triangles to stay outward."""
    verts = mesh.vertices[:, [0, 2, 1]]
    tris = mesh.triangles[:, [0, 2, 1]]
    return Mesh(verts, tris, list(mesh.face_materials), list(mesh.face_groups))


def component_mesh(component: ParametricComponent) -> Mesh:
    """Closed local-space mesh inside the 1 x 1 x depth canonical box."""
    depth = float(component.param("depth", component.param("thickness", 0.1)))
    material = component.material_tag
    if component.param("arch") == "rounded":
        # Shorter body plus a wedge cap, all inside the canonical box.
        body = box_mesh((1.0, depth, 0.75), material, origin=(-0.5, 0.0, -0.5))
        wedge_profile = [(-0.5, 0.25), (0.5, 0.25), (0.0, 0.5)]
        wedge = _swap_yz(prism_mesh(wedge_profile, 0.0, depth, material, material))
        builder = MeshBuilder()
        builder.append_mesh(body, "body")
        builder.append_mesh(wedge, "arch")
        return builder.build()
    return box_mesh((1.0, depth, 1.0), material, origin=(-0.5, 0.0, -0.5))
