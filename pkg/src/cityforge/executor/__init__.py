"""Program execution: meshes, facade components, assembly, export."""

from .assemble import (
    AssemblyError,
    ScenePackage,
    assemble_scene,
    build_building_mesh,
    build_greenspace_mesh,
    build_street_ring,
    sample_tree_positions,
    streetlight_positions,
    wall_material_from_facade,
)
from .components import (
    MATERIAL_TAGS,
    ParametricComponent,
    component_mesh,
    realize_component,
)
from .config import ExecutorConfig, config_from_file
from .export import (
    ImportedScene,
    IoFailure,
    UnsupportedFormat,
    export_scene,
    import_glb,
    import_obj,
    scene_to_glb_bytes,
)
from .facade import EdgeTooShort, PlacementTransform, apply_placement, layout_facade
from .meshes import (
    Mesh,
    MeshBuilder,
    NonManifold,
    NotABuilding,
    TriangulationFailure,
    box_mesh,
    cone_mesh,
    extrude_footprint,
    prism_mesh,
    projected_xy_vertices,
    subdivide4,
)

__all__ = [
    "AssemblyError",
    "EdgeTooShort",
    "ExecutorConfig",
    "ImportedScene",
    "IoFailure",
    "MATERIAL_TAGS",
    "Mesh",
    "MeshBuilder",
    "NonManifold",
    "NotABuilding",
    "ParametricComponent",
    "PlacementTransform",
    "ScenePackage",
    "TriangulationFailure",
    "UnsupportedFormat",
    "apply_placement",
    "assemble_scene",
    "box_mesh",
    "build_building_mesh",
    "build_greenspace_mesh",
    "build_street_ring",
    "component_mesh",
    "cone_mesh",
    "config_from_file",
    "export_scene",
    "extrude_footprint",
    "import_glb",
    "import_obj",
    "layout_facade",
    "prism_mesh",
    "projected_xy_vertices",
    "realize_component",
    "sample_tree_positions",
    "scene_to_glb_bytes",
    "streetlight_positions",
    "subdivide4",
    "wall_material_from_facade",
]
