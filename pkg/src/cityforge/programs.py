"""Block and Building layout programs: types, parsing, validation, serialization.

A Block Program lays out one city block as an ordered list of elements
(buildings and greenspaces) with footprint polygons in meters. A Building
Program describes one building as typed components ("window", "door", ...)
with free-text descriptions. Both arrive as JSON in a few accepted shapes;
parsing normalizes gently (clockwise polygons are reversed, duplicate
closure vertices dropped) and rejects hard violations with a structured
error naming the first broken constraint and its JSON path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from . import geometry
from .geometry import AABB

GREENSPACE_TYPE = "greenspace"

# Documented vocabulary; unknown types are valid and treated as buildings.
KNOWN_ELEMENT_TYPES = frozenset({
    "residential", "commercial", "office", "school", "library",
    "mixed-use building", GREENSPACE_TYPE,
})

ZERO_AREA_EPS = 1e-9  # m^2; |signed area| below this is degenerate

Diagnostic = tuple[str, str]  # (json path, message)


# ---------------------------------------------------------------------------
# errors


class ProgramError(ValueError):
    """Base for structured parse/validation failures."""

    kind = "program-error"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


class MalformedJson(ProgramError):
    kind = "malformed-json"


class MissingField(ProgramError):
    """A required field is absent or has the wrong type."""

    kind = "missing-field"


class BadPolygon(ProgramError):
    kind = "bad-polygon"

    REASONS = ("too-few-vertices", "self-intersecting", "zero-area", "non-finite")

    def __init__(self, path: str, reason: str, message: str = ""):
        super().__init__(path, message or f"polygon is invalid: {reason}")
        self.reason = reason


class DuplicateId(ProgramError):
    kind = "duplicate-id"

    def __init__(self, path: str, element_id: str):
        super().__init__(path, f"duplicate element id {element_id!r}")
        self.element_id = element_id


class BadFloorCount(ProgramError):
    kind = "bad-floor-count"


class EmptyDescription(ProgramError):
    kind = "empty-description"

    def __init__(self, path: str, component_type: str):
        super().__init__(path, f"component {component_type!r} has an empty description")
        self.component_type = component_type


class UnknownForm(ProgramError):
    kind = "unknown-form"


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class Vertex2D:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vertex ({self.x}, {self.y})")


@dataclass(frozen=True)
class FootprintPolygon:
    """Simple, counter-clockwise footprint outline (implicit closure)."""

    vertices: tuple[Vertex2D, ...]

    @property
    def coords(self) -> list[tuple[float, float]]:
        return [(v.x, v.y) for v in self.vertices]

    def signed_area(self) -> float:
        return geometry.signed_area(self.coords)

    def area(self) -> float:
        return abs(self.signed_area())

    def aabb(self) -> AABB:
        return geometry.aabb_of(self.coords)

    def validate(self, path: str = "$.polygon") -> None:
        pts = self.coords
        if len(pts) < 3:
            raise BadPolygon(path, "too-few-vertices")
        for i in range(len(pts)):
            if pts[i] == pts[(i + 1) % len(pts)]:
                raise BadPolygon(path, "too-few-vertices",
                                 "repeated consecutive vertex")
        if not geometry.is_simple(pts):
            raise BadPolygon(path, "self-intersecting")
        if abs(geometry.signed_area(pts)) < ZERO_AREA_EPS:
            raise BadPolygon(path, "zero-area")
        if geometry.signed_area(pts) <= 0:
            raise BadPolygon(path, "self-intersecting",
                             "clockwise orientation (normalize before constructing)")


def footprint(coords: Iterable[tuple[float, float]]) -> FootprintPolygon:
    """Build a FootprintPolygon from (x, y) pairs (no validation)."""
    return FootprintPolygon(tuple(Vertex2D(float(x), float(y)) for x, y in coords))


@dataclass(frozen=True)
class BlockElement:
    id: str
    element_type: str
    polygon: FootprintPolygon
    floor_count: Optional[int] = None
    facade: Optional[str] = None

    @property
    def is_greenspace(self) -> bool:
        return self.element_type == GREENSPACE_TYPE

    @property
    def is_building(self) -> bool:
        return not self.is_greenspace


@dataclass(frozen=True)
class BlockRegion:
    """Axis-aligned block bounds; origin defaults to (0, 0)."""

    width: float
    height: float
    x_min: float = 0.0
    y_min: float = 0.0

    def __post_init__(self) -> None:
        if not (self.width > 0 and self.height > 0):
            raise ValueError("region must have positive extent")

    @property
    def x_max(self) -> float:
        return self.x_min + self.width

    @property
    def y_max(self) -> float:
        return self.y_min + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    def aabb(self) -> AABB:
        return AABB(self.x_min, self.x_max, self.y_min, self.y_max)

    def contains(self, x: float, y: float) -> bool:
        return (self.x_min - 1e-9 <= x <= self.x_max + 1e-9
                and self.y_min - 1e-9 <= y <= self.y_max + 1e-9)


@dataclass(frozen=True)
class BlockProgram:
    elements: tuple[BlockElement, ...]
    region: BlockRegion
    description: Optional[str] = None

    def element_by_id(self, element_id: str) -> BlockElement:
        for e in self.elements:
            if e.id == element_id:
                return e
        raise KeyError(element_id)

    def building_elements(self) -> list[BlockElement]:
        return [e for e in self.elements if e.is_building]

    def greenspace_elements(self) -> list[BlockElement]:
        return [e for e in self.elements if e.is_greenspace]

    def validate(self) -> None:
        """Re-check every invariant; raises ProgramError on the first violation."""
        seen: set[str] = set()
        for i, e in enumerate(self.elements):
            path = f"$.elements[{i}]"
            if not e.id or not isinstance(e.id, str):
                raise MissingField(f"{path}.id", "id must be a non-empty string")
            if e.id in seen:
                raise DuplicateId(f"{path}.id", e.id)
            seen.add(e.id)
            if not e.element_type:
                raise MissingField(f"{path}.type", "type must be a non-empty string")
            e.polygon.validate(f"{path}.polygon")
            if e.is_greenspace:
                if e.floor_count is not None:
                    raise BadFloorCount(f"{path}.floor_count",
                                        "floor_count is only valid on buildings")
                if e.facade is not None:
                    raise MissingField(f"{path}.facade",
                                       "facade is only valid on buildings")
            elif e.floor_count is not None:
                if isinstance(e.floor_count, bool) or not isinstance(e.floor_count, int):
                    raise BadFloorCount(f"{path}.floor_count", "must be an integer")
                if e.floor_count < 1:
                    raise BadFloorCount(f"{path}.floor_count", "must be >= 1")
            for j, v in enumerate(e.polygon.vertices):
                if not self.region.contains(v.x, v.y):
                    raise MissingField(
                        f"{path}.polygon[{j}]",
                        f"vertex ({v.x}, {v.y}) lies outside the block region")


@dataclass(frozen=True)
class BuildingComponent:
    component_type: str
    description: str


@dataclass(frozen=True)
class BuildingProgram:
    components: tuple[BuildingComponent, ...]
    source_facade: Optional[str] = None

    def component(self, component_type: str) -> Optional[BuildingComponent]:
        key = component_type.strip().lower()
        for c in self.components:
            if c.component_type == key:
                return c
        return None

    def validate(self) -> None:
        seen: set[str] = set()
        for i, c in enumerate(self.components):
            path = f"$[{i}]"
            if not c.component_type or not c.component_type.strip():
                raise MissingField(f"{path}.type", "type must be a non-empty string")
            if not c.description or not c.description.strip():
                raise EmptyDescription(f"{path}.description", c.component_type)
            key = c.component_type.strip().lower()
            if key in seen:
                raise MissingField(f"{path}.type",
                                   f"more than one {key!r} component after canonicalization")
            seen.add(key)


@dataclass(frozen=True)
class FormatVerdict:
    json_parsable: bool
    geometry_valid: bool
    fields_complete: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def overall(self) -> bool:
        return self.json_parsable and self.geometry_valid and self.fields_complete

    def to_jsonable(self) -> dict:
        return {
            "json_parsable": self.json_parsable,
            "geometry_valid": self.geometry_valid,
            "fields_complete": self.fields_complete,
            "overall": self.overall,
            "diagnostics": [{"path": p, "message": m} for p, m in self.diagnostics],
        }


# ---------------------------------------------------------------------------
# block program parsing


def _as_text(data: Union[bytes, str], diagnostics: Optional[list]) -> str:
    if isinstance(data, bytes):
        try:
            return data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise MalformedJson("$", f"not valid UTF-8: {exc}") from exc
    return data


def _load_json(data: Union[bytes, str]):
    text = _as_text(data, None)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedJson("$", f"invalid JSON: {exc.msg} at char {exc.pos}") from exc


def _note(diagnostics: Optional[list], path: str, message: str) -> None:
    if diagnostics is not None:
        diagnostics.append((path, message))


def _parse_vertices(raw, path: str, diagnostics: Optional[list]) -> list[tuple[float, float]]:
    if not isinstance(raw, list):
        raise MissingField(path, "polygon must be a list of [x, y] pairs")
    pts: list[tuple[float, float]] = []
    for i, item in enumerate(raw):
        if (not isinstance(item, (list, tuple)) or len(item) != 2
                or any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in item)):
            raise MissingField(f"{path}[{i}]", "vertex must be a [x, y] number pair")
        x, y = float(item[0]), float(item[1])
        if not (math.isfinite(x) and math.isfinite(y)):
            raise BadPolygon(f"{path}[{i}]", "non-finite")
        pts.append((x, y))
    # Implicit closure: a repeated first vertex at the end is dropped.
    if len(pts) >= 2 and pts[0] == pts[-1]:
        pts.pop()
        _note(diagnostics, path, "dropped duplicated closure vertex")
    deduped: list[tuple[float, float]] = []
    for p in pts:
        if deduped and p == deduped[-1]:
            _note(diagnostics, path, "dropped repeated consecutive vertex")
            continue
        deduped.append(p)
    return deduped


def _parse_polygon(raw, path: str, diagnostics: Optional[list]) -> FootprintPolygon:
    pts = _parse_vertices(raw, path, diagnostics)
    if len(pts) < 3:
        raise BadPolygon(path, "too-few-vertices")
    if not geometry.is_simple(pts):
        raise BadPolygon(path, "self-intersecting")
    area = geometry.signed_area(pts)
    if abs(area) < ZERO_AREA_EPS:
        raise BadPolygon(path, "zero-area")
    if area < 0:
        pts = list(reversed(pts))
        _note(diagnostics, path, "reversed clockwise polygon to counter-clockwise")
    return footprint(pts)


def _parse_element(raw, path: str, diagnostics: Optional[list]) -> BlockElement:
    if not isinstance(raw, dict):
        raise MissingField(path, "element must be a JSON object")
    if "id" not in raw or not isinstance(raw["id"], str) or not raw["id"]:
        raise MissingField(f"{path}.id", "required non-empty string")
    if "type" not in raw or not isinstance(raw["type"], str) or not raw["type"]:
        raise MissingField(f"{path}.type", "required non-empty string")
    if "polygon" not in raw:
        raise MissingField(f"{path}.polygon", "required field")
    element_type = raw["type"]
    polygon = _parse_polygon(raw["polygon"], f"{path}.polygon", diagnostics)
    floor_count = raw.get("floor_count")
    facade = raw.get("facade")
    if element_type == GREENSPACE_TYPE:
        if floor_count is not None:
            _note(diagnostics, f"{path}.floor_count", "dropped floor_count on greenspace")
            floor_count = None
        if facade is not None:
            _note(diagnostics, f"{path}.facade", "dropped facade on greenspace")
            facade = None
    else:
        if floor_count is not None:
            if isinstance(floor_count, bool) or not isinstance(floor_count, int):
                raise BadFloorCount(f"{path}.floor_count", "must be an integer")
            if floor_count < 1:
                raise BadFloorCount(f"{path}.floor_count", "must be >= 1")
        if facade is not None and not isinstance(facade, str):
            raise MissingField(f"{path}.facade", "facade must be a string")
    return BlockElement(id=raw["id"], element_type=element_type, polygon=polygon,
                        floor_count=floor_count, facade=facade)


def _snap_down(v: float, grid: float = 10.0) -> float:
    return math.floor(v / grid) * grid


def _snap_up(v: float, grid: float = 10.0) -> float:
    return math.ceil(v / grid) * grid


def infer_region(elements: Iterable[BlockElement]) -> BlockRegion:
    """Tight AABB of all elements, snapped outward to 10 m multiples.

    An empty program gets the minimal 10 m x 10 m region at the origin.
    """
    boxes = [e.polygon.aabb() for e in elements]
    if not boxes:
        return BlockRegion(width=10.0, height=10.0)
    x_min = _snap_down(min(b.x_min for b in boxes))
    y_min = _snap_down(min(b.y_min for b in boxes))
    x_max = _snap_up(max(b.x_max for b in boxes))
    y_max = _snap_up(max(b.y_max for b in boxes))
    return BlockRegion(width=max(x_max - x_min, 10.0),
                       height=max(y_max - y_min, 10.0),
                       x_min=x_min, y_min=y_min)


def _parse_region(raw, path: str) -> BlockRegion:
    if not isinstance(raw, dict):
        raise MissingField(path, "region must be an object")
    for key in ("width", "height"):
        v = raw.get(key)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
            raise MissingField(f"{path}.{key}", "must be a positive number")
    x_min = raw.get("x_min", 0.0)
    y_min = raw.get("y_min", 0.0)
    for key, v in (("x_min", x_min), ("y_min", y_min)):
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise MissingField(f"{path}.{key}", "must be a finite number")
    return BlockRegion(width=float(raw["width"]), height=float(raw["height"]),
                       x_min=float(x_min), y_min=float(y_min))


def _expand_region(region: BlockRegion, elements: Iterable[BlockElement],
                   diagnostics: Optional[list]) -> BlockRegion:
    boxes = [e.polygon.aabb() for e in elements]
    if not boxes:
        return region
    x_min = min(region.x_min, min(b.x_min for b in boxes))
    y_min = min(region.y_min, min(b.y_min for b in boxes))
    x_max = max(region.x_max, max(b.x_max for b in boxes))
    y_max = max(region.y_max, max(b.y_max for b in boxes))
    if (x_min, y_min, x_max, y_max) != (region.x_min, region.y_min,
                                        region.x_max, region.y_max):
        _note(diagnostics, "$.region",
              "expanded region to contain all element vertices")
        return BlockRegion(width=x_max - x_min, height=y_max - y_min,
                           x_min=x_min, y_min=y_min)
    return region


def parse_block_program(data: Union[bytes, str],
                        diagnostics: Optional[list] = None) -> BlockProgram:
    """Parse Block Program JSON in any accepted shape.

    Accepted top-level forms: a bare element array; the prompt wrapper
    ``{"description": ..., "layout": {"buildings": [...], "greenspaces":
    [...]}}`` (optionally inside a single-item array); and the canonical
    ``{"description"?, "region"?, "elements": [...]}`` that serialize emits.

    Soft normalizations (clockwise reversal, dropped closure duplicates,
    region expansion) are appended to ``diagnostics`` when a list is given;
    hard violations raise a ProgramError subclass.
    """
    doc = _load_json(data)
    description: Optional[str] = None
    region: Optional[BlockRegion] = None
    raw_elements: list
    base = "$"

    if isinstance(doc, list) and len(doc) == 1 and isinstance(doc[0], dict) \
            and "layout" in doc[0]:
        doc = doc[0]
        base = "$[0]"
    if isinstance(doc, dict):
        if "layout" in doc:
            layout = doc["layout"]
            if not isinstance(layout, dict):
                raise MissingField(f"{base}.layout", "layout must be an object")
            raw_elements = list(layout.get("buildings") or [])
            raw_elements += list(layout.get("greenspaces") or [])
            desc = doc.get("description")
            description = desc if isinstance(desc, str) else None
        elif "elements" in doc:
            if not isinstance(doc["elements"], list):
                raise MissingField(f"{base}.elements", "elements must be an array")
            raw_elements = doc["elements"]
            desc = doc.get("description")
            description = desc if isinstance(desc, str) else None
        else:
            raise MissingField(base, "expected an element array or a layout wrapper")
        if "region" in doc and doc["region"] is not None:
            region = _parse_region(doc["region"], f"{base}.region")
    elif isinstance(doc, list):
        raw_elements = doc
    else:
        raise MissingField(base, "expected an element array or a layout wrapper")

    elements: list[BlockElement] = []
    seen: set[str] = set()
    for i, raw in enumerate(raw_elements):
        path = f"{base}.elements[{i}]" if base != "$" or isinstance(doc, dict) \
            else f"$[{i}]"
        element = _parse_element(raw, path, diagnostics)
        if element.id in seen:
            raise DuplicateId(f"{path}.id", element.id)
        seen.add(element.id)
        elements.append(element)

    if region is None:
        region = infer_region(elements)
    else:
        region = _expand_region(region, elements, diagnostics)
    program = BlockProgram(elements=tuple(elements), region=region,
                           description=description)
    program.validate()
    return program


# ---------------------------------------------------------------------------
# building program parsing


def _canonical_component(raw_type, raw_desc, path: str) -> BuildingComponent:
    if not isinstance(raw_type, str) or not raw_type.strip():
        raise UnknownForm(f"{path}.type", "component type must be a non-empty string")
    key = raw_type.strip().lower()
    if not isinstance(raw_desc, str) or not raw_desc.strip():
        raise EmptyDescription(f"{path}.description", key)
    return BuildingComponent(component_type=key, description=raw_desc.strip())


def parse_building_program(data: Union[bytes, str],
                           diagnostics: Optional[list] = None) -> BuildingProgram:
    """Parse Building Program JSON.

    Accepted forms: a component list ``[{"type": ..., "description": ...}]``,
    the flat map ``{"window": "...", "door": "...", ...}``, and either of
    those under a facade wrapper (``{"facade": ..., "output": {...}}`` or
    ``{"facade": ..., "components": [...]}``). Duplicate component types
    canonicalize to the last occurrence with a diagnostic.
    """
    doc = _load_json(data)
    source_facade: Optional[str] = None
    base = "$"

    if isinstance(doc, list) and len(doc) == 1 and isinstance(doc[0], dict) \
            and ("output" in doc[0] or "facade" in doc[0]):
        doc = doc[0]
        base = "$[0]"
    if isinstance(doc, dict) and ("output" in doc or "components" in doc):
        facade = doc.get("facade")
        source_facade = facade if isinstance(facade, str) else None
        doc = doc.get("output", doc.get("components"))

    components: list[BuildingComponent] = []
    index: dict[str, int] = {}

    def _push(component: BuildingComponent, path: str) -> None:
        if component.component_type in index:
            _note(diagnostics, path,
                  f"duplicate {component.component_type!r} component; last wins")
            components[index[component.component_type]] = component
        else:
            index[component.component_type] = len(components)
            components.append(component)

    if isinstance(doc, list):
        for i, raw in enumerate(doc):
            path = f"{base}[{i}]"
            if not isinstance(raw, dict):
                raise UnknownForm(path, "component must be an object")
            _push(_canonical_component(raw.get("type"), raw.get("description"), path),
                  path)
    elif isinstance(doc, dict):
        for raw_type, raw_desc in doc.items():
            path = f"{base}.{raw_type}"
            if not isinstance(raw_desc, str):
                raise UnknownForm(path,
                                  "flat-map values must be description strings")
            _push(_canonical_component(raw_type, raw_desc, path), path)
    else:
        raise UnknownForm(base, "expected a component list or a flat map")

    program = BuildingProgram(components=tuple(components),
                              source_facade=source_facade)
    program.validate()
    return program


# ---------------------------------------------------------------------------
# serialization


def _num(x: float):
    """Emit integers exactly; other floats keep their shortest repr."""
    if isinstance(x, int):
        return x
    if x == int(x) and abs(x) < 1e15:
        return int(x)
    return x


def _element_to_jsonable(e: BlockElement) -> dict:
    out: dict = {
        "id": e.id,
        "type": e.element_type,
        "polygon": [[_num(v.x), _num(v.y)] for v in e.polygon.vertices],
    }
    if e.floor_count is not None:
        out["floor_count"] = e.floor_count
    if e.facade is not None:
        out["facade"] = e.facade
    return out


def block_program_to_jsonable(program: BlockProgram) -> Union[list, dict]:
    elements = [_element_to_jsonable(e) for e in program.elements]
    if program.description is None and program.region == infer_region(program.elements):
        return elements
    out: dict = {}
    if program.description is not None:
        out["description"] = program.description
    out["region"] = {
        "x_min": _num(program.region.x_min),
        "y_min": _num(program.region.y_min),
        "width": _num(program.region.width),
        "height": _num(program.region.height),
    }
    out["elements"] = elements
    return out


def building_program_to_jsonable(program: BuildingProgram) -> Union[list, dict]:
    components = [{"type": c.component_type, "description": c.description}
                  for c in program.components]
    if program.source_facade is None:
        return components
    return {"facade": program.source_facade, "components": components}


def serialize(program: Union[BlockProgram, BuildingProgram]) -> str:
    """Deterministic JSON text that re-parses to a structurally equal program."""
    if isinstance(program, BlockProgram):
        obj = block_program_to_jsonable(program)
    elif isinstance(program, BuildingProgram):
        obj = building_program_to_jsonable(program)
    else:
        raise TypeError(f"cannot serialize {type(program).__name__}")
    return json.dumps(obj, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------------------
# format verdict


def _block_field_and_geometry_checks(doc) -> tuple[bool, bool, list[Diagnostic]]:
    fields_ok = True
    geom_ok = True
    notes: list[Diagnostic] = []

    def field_issue(path: str, message: str) -> None:
        nonlocal fields_ok
        fields_ok = False
        notes.append((path, message))

    def geom_issue(path: str, message: str) -> None:
        nonlocal geom_ok
        geom_ok = False
        notes.append((path, message))

    base = "$"
    if isinstance(doc, list) and len(doc) == 1 and isinstance(doc[0], dict) \
            and "layout" in doc[0]:
        doc = doc[0]
        base = "$[0]"
    if isinstance(doc, dict):
        if "layout" in doc and isinstance(doc["layout"], dict):
            raw_elements = list(doc["layout"].get("buildings") or [])
            raw_elements += list(doc["layout"].get("greenspaces") or [])
        elif "elements" in doc and isinstance(doc["elements"], list):
            raw_elements = doc["elements"]
        else:
            field_issue(base, "expected an element array or a layout wrapper")
            return fields_ok, geom_ok, notes
    elif isinstance(doc, list):
        raw_elements = doc
    else:
        field_issue(base, "expected an element array or a layout wrapper")
        return fields_ok, geom_ok, notes

    if isinstance(doc, dict) and doc.get("region") is not None:
        try:
            _parse_region(doc["region"], f"{base}.region")
        except ProgramError as exc:
            field_issue(exc.path, exc.message)

    seen_ids: set[str] = set()
    for i, raw in enumerate(raw_elements):
        path = f"{base}.elements[{i}]"
        if not isinstance(raw, dict):
            field_issue(path, "element must be a JSON object")
            continue
        eid = raw.get("id")
        if not isinstance(eid, str) or not eid:
            field_issue(f"{path}.id", "required non-empty string")
        elif eid in seen_ids:
            field_issue(f"{path}.id", f"duplicate element id {eid!r}")
        else:
            seen_ids.add(eid)
        etype = raw.get("type")
        if not isinstance(etype, str) or not etype:
            field_issue(f"{path}.type", "required non-empty string")
        if "polygon" not in raw:
            field_issue(f"{path}.polygon", "required field")
        else:
            try:
                _parse_polygon(raw["polygon"], f"{path}.polygon", None)
            except BadPolygon as exc:
                geom_issue(exc.path, exc.message)
            except ProgramError as exc:
                field_issue(exc.path, exc.message)
        if etype != GREENSPACE_TYPE:
            fc = raw.get("floor_count")
            if fc is not None and (isinstance(fc, bool) or not isinstance(fc, int)
                                   or fc < 1):
                field_issue(f"{path}.floor_count", "must be an integer >= 1")
            fa = raw.get("facade")
            if fa is not None and not isinstance(fa, str):
                field_issue(f"{path}.facade", "must be a string")
    return fields_ok, geom_ok, notes


def _building_field_checks(doc) -> tuple[bool, list[Diagnostic]]:
    try:
        parse_building_program(json.dumps(doc))
        return True, []
    except ProgramError as exc:
        return False, [(exc.path, exc.message)]


def check_format(data: Union[bytes, str], kind: str = "block") -> FormatVerdict:
    """Classify arbitrary bytes for the three-part format verdict.

    JSON parsability, geometric validity, and field completeness are
    observed independently once the JSON parses; when it does not, all
    three are false. Never raises.
    """
    if kind not in ("block", "building"):
        raise ValueError(f"kind must be 'block' or 'building', got {kind!r}")
    try:
        doc = _load_json(data)
    except MalformedJson as exc:
        return FormatVerdict(False, False, False,
                             diagnostics=((exc.path, exc.message),))
    if kind == "block":
        fields_ok, geom_ok, notes = _block_field_and_geometry_checks(doc)
    else:
        fields_ok, notes = _building_field_checks(doc)
        geom_ok = True  # building programs carry no geometry
    return FormatVerdict(True, geom_ok, fields_ok, diagnostics=tuple(notes))
