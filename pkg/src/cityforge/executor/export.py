"""Scene export: Wavefront OBJ (+MTL) and binary glTF 2.0.

Both writers are deterministic: fixed float formatting, sorted material
tables, and no timestamps, so identical scenes produce identical bytes.
The matching importers exist for round-trip verification and for clients
that want to inspect exported geometry.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .assemble import ScenePackage, streetlight_mesh, tree_mesh
from .meshes import Mesh

GLB_MAGIC = 0x46546C67
CHUNK_JSON = 0x4E4F534A
CHUNK_BIN = 0x004E4942

MATERIAL_COLORS: dict[str, tuple[float, float, float]] = {
    "glass": (0.55, 0.78, 0.91),
    "concrete": (0.72, 0.71, 0.68),
    "wood": (0.55, 0.35, 0.17),
    "greenery": (0.18, 0.62, 0.27),
    "asphalt": (0.24, 0.24, 0.25),
    "metal": (0.60, 0.64, 0.68),
}
_DEFAULT_COLOR = (0.80, 0.80, 0.80)


class UnsupportedFormat(ValueError):
    pass


class IoFailure(OSError):
    pass


def _scene_nodes(scene: ScenePackage) -> list[tuple[str, Mesh, tuple[float, float, float]]]:
    """Flatten the scene into named placed meshes, in deterministic order."""
    nodes: list[tuple[str, Mesh, tuple[float, float, float]]] = []
    for eid, mesh in scene.buildings:
        nodes.append((eid, mesh, (0.0, 0.0, 0.0)))
    for eid, mesh in scene.greenspaces:
        nodes.append((eid, mesh, (0.0, 0.0, 0.0)))
    if scene.streets.triangle_count:
        nodes.append(("streets", scene.streets, (0.0, 0.0, 0.0)))
    prototypes = {"tree": tree_mesh(), "streetlight": streetlight_mesh()}
    counters = {"tree": 0, "streetlight": 0}
    for kind, pos in scene.props:
        name = f"{kind}_{counters[kind]}"
        counters[kind] += 1
        nodes.append((name, prototypes[kind], pos))
    return nodes


def _materials_in(scene: ScenePackage) -> list[str]:
    tags = set()
    for _, mesh, _ in _scene_nodes(scene):
        tags.update(mesh.face_materials)
    return sorted(tags)


# ---------------------------------------------------------------------------
# OBJ


def export_obj(scene: ScenePackage, path: str | Path) -> Path:
    path = Path(path)
    mtl_path = path.with_suffix(".mtl")
    lines = [f"mtllib {mtl_path.name}"]
    offset = 1  # OBJ indices are 1-based
    for name, mesh, pos in _scene_nodes(scene):
        lines.append(f"o {name}")
        verts = mesh.vertices + np.asarray(pos)
        for v in verts:
            lines.append(f"v {v[0]:.6f} {v[1]:.6f} {v[2]:.6f}")
        current_mtl = None
        for tri, mat in zip(mesh.triangles, mesh.face_materials):
            if mat != current_mtl:
                lines.append(f"usemtl {mat}")
                current_mtl = mat
            lines.append(f"f {offset + tri[0]} {offset + tri[1]} {offset + tri[2]}")
        offset += len(verts)
    mtl_lines = []
    for tag in _materials_in(scene):
        r, g, b = MATERIAL_COLORS.get(tag, _DEFAULT_COLOR)
        mtl_lines += [f"newmtl {tag}", f"Kd {r:.4f} {g:.4f} {b:.4f}",
                      "Ks 0.0000 0.0000 0.0000", "d 1.0", ""]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        mtl_path.write_text("\n".join(mtl_lines), encoding="utf-8")
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return path


def import_obj(path: str | Path) -> dict[str, Mesh]:
    """Minimal OBJ reader for round-trip checks (v/f/o/usemtl only)."""
    objects: dict[str, Mesh] = {}
    all_verts: list[tuple[float, float, float]] = []
    name = "default"
    tris: list[tuple[int, int, int]] = []
    mats: list[str] = []
    current_mtl = "default"

    def flush() -> None:
        nonlocal tris, mats
        if tris:
            used = sorted({i for tri in tris for i in tri})
            remap = {v: i for i, v in enumerate(used)}
            objects[name] = Mesh(
                np.array([all_verts[i] for i in used], dtype=np.float64),
                np.array([[remap[a], remap[b], remap[c]] for a, b, c in tris],
                         dtype=np.int32),
                list(mats))
        tris, mats = [], []

    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "o":
            flush()
            name = parts[1]
        elif parts[0] == "v":
            all_verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
        elif parts[0] == "usemtl":
            current_mtl = parts[1]
        elif parts[0] == "f":
            idx = [int(p.split("/")[0]) - 1 for p in parts[1:4]]
            tris.append((idx[0], idx[1], idx[2]))
            mats.append(current_mtl)
    flush()
    return objects


# ---------------------------------------------------------------------------
# glTF 2.0 binary


def _pad(data: bytes, alignment: int, fill: bytes) -> bytes:
    remainder = len(data) % alignment
    return data if remainder == 0 else data + fill * (alignment - remainder)


def scene_to_glb_bytes(scene: ScenePackage) -> bytes:
    """Serialize the scene as a .glb: one child node per element.

    World geometry is Z-up; the root node carries a -90 degree X rotation
    so the exported city stands +Y-up as glTF viewers expect. Prop meshes
    (trees, streetlights) are shared and instanced by node translation.
    """
    materials = _materials_in(scene)
    material_index = {tag: i for i, tag in enumerate(materials)}

    binary = bytearray()
    buffer_views: list[dict] = []
    accessors: list[dict] = []
    meshes: list[dict] = []
    nodes: list[dict] = []

    def add_view(data: bytes, target: int) -> int:
        offset = len(binary)
        binary.extend(data)
        while len(binary) % 4:
            binary.append(0)
        buffer_views.append({"buffer": 0, "byteOffset": offset,
                             "byteLength": len(data), "target": target})
        return len(buffer_views) - 1

    mesh_cache: dict[int, int] = {}

    def add_mesh(name: str, mesh: Mesh) -> int:
        key = id(mesh)
        if key in mesh_cache:
            return mesh_cache[key]
        positions = mesh.vertices.astype("<f4")
        view = add_view(positions.tobytes(), 34962)
        accessors.append({
            "bufferView": view, "componentType": 5126,
            "count": int(len(positions)), "type": "VEC3",
            "min": [float(v) for v in positions.min(axis=0)],
            "max": [float(v) for v in positions.max(axis=0)],
        })
        pos_accessor = len(accessors) - 1
        primitives = []
        for tag in sorted(set(mesh.face_materials)):
            rows = [i for i, m in enumerate(mesh.face_materials) if m == tag]
            indices = mesh.triangles[rows].astype("<u4").ravel()
            iview = add_view(indices.tobytes(), 34963)
            accessors.append({"bufferView": iview, "componentType": 5125,
                              "count": int(indices.size), "type": "SCALAR"})
            primitives.append({
                "attributes": {"POSITION": pos_accessor},
                "indices": len(accessors) - 1,
                "material": material_index[tag],
                "mode": 4,
            })
        meshes.append({"name": name, "primitives": primitives})
        mesh_cache[key] = len(meshes) - 1
        return mesh_cache[key]

    child_ids = []
    for name, mesh, pos in _scene_nodes(scene):
        if not mesh.triangle_count:
            continue
        node: dict = {"name": name, "mesh": add_mesh(name, mesh)}
        if pos != (0.0, 0.0, 0.0):
            node["translation"] = [float(p) for p in pos]
        nodes.append(node)
        child_ids.append(len(nodes) - 1)

    half = math.sqrt(0.5)
    nodes.append({
        "name": "city",
        "rotation": [-half, 0.0, 0.0, half],  # Z-up block frame -> glTF +Y up
        "children": child_ids,
    })
    root = len(nodes) - 1

    doc = {
        "asset": {"version": "2.0", "generator": "cityforge"},
        "scene": 0,
        "scenes": [{"nodes": [root]}],
        "nodes": nodes,
        "meshes": meshes,
        "materials": [
            {"name": tag,
             "pbrMetallicRoughness": {
                 "baseColorFactor": list(MATERIAL_COLORS.get(tag, _DEFAULT_COLOR))
                                    + [1.0],
                 "metallicFactor": 0.1 if tag != "metal" else 0.8,
                 "roughnessFactor": 0.9 if tag != "glass" else 0.2,
             }}
            for tag in materials
        ],
        "bufferViews": buffer_views,
        "accessors": accessors,
        "buffers": [{"byteLength": len(binary)}],
        "extras": {"metadata": scene.metadata},
    }
    json_chunk = _pad(json.dumps(doc, sort_keys=True,
                                 separators=(",", ":")).encode("utf-8"),
                      4, b" ")
    bin_chunk = _pad(bytes(binary), 4, b"\x00")
    total = 12 + 8 + len(json_chunk) + 8 + len(bin_chunk)
    out = bytearray()
    out += struct.pack("<III", GLB_MAGIC, 2, total)
    out += struct.pack("<II", len(json_chunk), CHUNK_JSON) + json_chunk
    out += struct.pack("<II", len(bin_chunk), CHUNK_BIN) + bin_chunk
    return bytes(out)


def export_glb(scene: ScenePackage, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_bytes(scene_to_glb_bytes(scene))
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    return path


def export_scene(scene: ScenePackage, fmt: str, path: str | Path) -> Path:
    """Write the scene as ``obj`` (with MTL sibling) or ``glb``."""
    if fmt == "obj":
        return export_obj(scene, path)
    if fmt == "glb":
        return export_glb(scene, path)
    raise UnsupportedFormat(f"format must be 'obj' or 'glb', got {fmt!r}")


@dataclass
class ImportedNode:
    name: str
    translation: tuple[float, float, float]
    mesh: Mesh


@dataclass
class ImportedScene:
    nodes: dict[str, ImportedNode]
    root_rotation: tuple[float, float, float, float]
    metadata: dict = field(default_factory=dict)

    @property
    def total_triangles(self) -> int:
        return sum(n.mesh.triangle_count for n in self.nodes.values())


def import_glb(source: str | Path | bytes) -> ImportedScene:
    """Parse a cityforge .glb back into meshes (subset reader)."""
    blob = source if isinstance(source, bytes) else Path(source).read_bytes()
    magic, version, _length = struct.unpack_from("<III", blob, 0)
    if magic != GLB_MAGIC or version != 2:
        raise ValueError("not a glTF 2.0 binary")
    offset = 12
    doc: Optional[dict] = None
    binary = b""
    while offset < len(blob):
        chunk_len, chunk_type = struct.unpack_from("<II", blob, offset)
        offset += 8
        data = blob[offset:offset + chunk_len]
        offset += chunk_len
        if chunk_type == CHUNK_JSON:
            doc = json.loads(data.decode("utf-8"))
        elif chunk_type == CHUNK_BIN:
            binary = data

    assert doc is not None, "glb missing JSON chunk"

    def read_accessor(index: int) -> np.ndarray:
        acc = doc["accessors"][index]
        view = doc["bufferViews"][acc["bufferView"]]
        start = view.get("byteOffset", 0) + acc.get("byteOffset", 0)
        dtype = {5126: "<f4", 5125: "<u4", 5123: "<u2"}[acc["componentType"]]
        per = {"VEC3": 3, "SCALAR": 1}[acc["type"]]
        count = acc["count"] * per
        array = np.frombuffer(binary, dtype=dtype, count=count, offset=start)
        return array.reshape(-1, per) if per > 1 else array

    material_names = [m.get("name", f"material_{i}")
                      for i, m in enumerate(doc.get("materials", []))]
    nodes: dict[str, ImportedNode] = {}
    root_rotation = (0.0, 0.0, 0.0, 1.0)
    for node in doc.get("nodes", []):
        if "mesh" not in node:
            if "rotation" in node:
                root_rotation = tuple(node["rotation"])
            continue
        mesh_doc = doc["meshes"][node["mesh"]]
        verts: Optional[np.ndarray] = None
        tris: list[np.ndarray] = []
        mats: list[str] = []
        for prim in mesh_doc["primitives"]:
            verts = read_accessor(prim["attributes"]["POSITION"]).astype(np.float64)
            indices = read_accessor(prim["indices"]).astype(np.int32).reshape(-1, 3)
            tris.append(indices)
            tag = material_names[prim["material"]] if "material" in prim \
                else "default"
            mats.extend([tag] * len(indices))
        mesh = Mesh(verts if verts is not None else np.empty((0, 3)),
                    np.vstack(tris) if tris else np.empty((0, 3), dtype=np.int32),
                    mats)
        translation = tuple(node.get("translation", [0.0, 0.0, 0.0]))
        nodes[node["name"]] = ImportedNode(node["name"], translation, mesh)
    metadata = doc.get("extras", {}).get("metadata", {})
    return ImportedScene(nodes=nodes, root_rotation=root_rotation,
                         metadata=metadata)
