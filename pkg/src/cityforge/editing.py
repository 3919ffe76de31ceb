"""Deterministic program edits driven by a structured command grammar.

Commands follow a small shell-like grammar::

    command  := verb WS target (WS argument)*
    argument := key "=" value | value
    value    := bare word | quoted string

with verbs ``set_floor_count``, ``scale_density``, ``set_style``,
``set_component``, ``add_element``, ``remove_element``, ``retype_element``.
The target is ``block`` (whole program), an element id, or ``building``
for edits applied directly to a Building Program.

Every edit returns the new program plus a replayable diff: applying the
diff to the old program's canonical JSON form reproduces the new one.
"""

from __future__ import annotations

import copy
import json
import math
import shlex
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from . import geometry
from .programs import (
    BlockElement,
    BlockProgram,
    BlockRegion,
    BuildingComponent,
    BuildingProgram,
    GREENSPACE_TYPE,
    FootprintPolygon,
    ProgramError,
    _element_to_jsonable,
    _parse_polygon,
    footprint,
)

VERBS = ("set_floor_count", "scale_density", "set_style", "set_component",
         "add_element", "remove_element", "retype_element")

Program = Union[BlockProgram, BuildingProgram]
DiffEntry = tuple[str, object, object]  # (path, before, after)


class EditError(ValueError):
    pass


class UnknownVerb(EditError):
    def __init__(self, verb: str):
        super().__init__(f"unknown verb {verb!r}; accepted verbs: "
                         + ", ".join(VERBS))
        self.verb = verb


class BadArguments(EditError):
    pass


class UnknownTarget(EditError):
    pass


class InvalidArgument(EditError):
    pass


class InfeasibleDensity(EditError):
    pass


@dataclass(frozen=True)
class EditCommand:
    target: str
    verb: str
    arguments: dict

    def __post_init__(self) -> None:
        if self.verb not in VERBS:
            raise UnknownVerb(self.verb)


@dataclass
class EditResult:
    program_after: Program
    diff: list[DiffEntry]
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# style lexicon


@lru_cache(maxsize=4)
def load_styles(path: Optional[str] = None) -> dict:
    if path is None:
        text = resources.files("cityforge.data").joinpath("styles.json") \
            .read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


# ---------------------------------------------------------------------------
# command parsing


def _int_arg(raw: str, name: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise BadArguments(f"{name} must be an integer, got {raw!r}") from exc


def _float_arg(raw: str, name: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise BadArguments(f"{name} must be a number, got {raw!r}") from exc
    if not math.isfinite(value):
        raise BadArguments(f"{name} must be finite")
    return value


def parse_edit_command(text: str) -> EditCommand:
    """Parse ``verb target [args...]`` into a validated EditCommand."""
    try:
        tokens = shlex.split(text)
    except ValueError as exc:
        raise BadArguments(f"unbalanced quoting: {exc}") from exc
    if not tokens:
        raise BadArguments("empty command")
    verb = tokens[0]
    if verb not in VERBS:
        raise UnknownVerb(verb)
    if len(tokens) < 2:
        raise BadArguments(f"{verb} needs a target (block or an element id)")
    target = tokens[1]
    rest = tokens[2:]
    positional = [t for t in rest if "=" not in t]
    keyed = dict(t.split("=", 1) for t in rest if "=" in t)

    args: dict = {}
    if verb == "set_floor_count":
        if len(positional) != 1:
            raise BadArguments("usage: set_floor_count <element_id> <floors>")
        args["floors"] = _int_arg(positional[0], "floors")
    elif verb == "scale_density":
        if len(positional) != 1:
            raise BadArguments("usage: scale_density block <target_density>")
        args["target_density"] = _float_arg(positional[0], "target_density")
        args["allow_move"] = keyed.get("allow_move", "false").lower() == "true"
    elif verb == "set_style":
        if len(positional) != 1:
            raise BadArguments("usage: set_style <block|element_id> <style>")
        args["style"] = positional[0]
    elif verb == "set_component":
        if len(positional) != 2:
            raise BadArguments(
                'usage: set_component <target> <type> "<description>"')
        args["component_type"] = positional[0]
        args["description"] = positional[1]
    elif verb == "add_element":
        for key in ("id", "type", "polygon"):
            if key not in keyed:
                raise BadArguments(f"add_element needs {key}=...")
        args["id"] = keyed["id"]
        args["type"] = keyed["type"]
        try:
            args["polygon"] = json.loads(keyed["polygon"])
        except json.JSONDecodeError as exc:
            raise BadArguments(f"polygon must be JSON: {exc}") from exc
        if "floor_count" in keyed:
            args["floor_count"] = _int_arg(keyed["floor_count"], "floor_count")
        if "facade" in keyed:
            args["facade"] = keyed["facade"]
    elif verb == "remove_element":
        if positional or keyed:
            raise BadArguments("usage: remove_element <element_id>")
    elif verb == "retype_element":
        if len(positional) != 1:
            raise BadArguments("usage: retype_element <element_id> <new_type>")
        args["new_type"] = positional[0]
    return EditCommand(target=target, verb=verb, arguments=args)


# ---------------------------------------------------------------------------
# diffable form and replay


def to_diffable(program: Program) -> dict:
    """Stable canonical JSON shape used for diff paths and replay."""
    if isinstance(program, BlockProgram):
        return {
            "description": program.description,
            "region": {"x_min": program.region.x_min,
                       "y_min": program.region.y_min,
                       "width": program.region.width,
                       "height": program.region.height},
            "elements": [_element_to_jsonable(e) for e in program.elements],
        }
    return {
        "facade": program.source_facade,
        "components": [{"type": c.component_type, "description": c.description}
                       for c in program.components],
    }


def apply_diff(doc: dict, diff: list[DiffEntry]) -> dict:
    """Replay a diff over a diffable document (insert / delete / set)."""
    doc = copy.deepcopy(doc)
    for path, before, after in diff:
        parts = [p for p in path.split("/") if p]
        parent = doc
        for p in parts[:-1]:
            parent = parent[int(p)] if isinstance(parent, list) else parent[p]
        key: Union[str, int] = parts[-1]
        if isinstance(parent, list):
            key = int(key)
        if after is None and before is not None:
            del parent[key]
        elif before is None and after is not None:
            if isinstance(parent, list):
                parent.insert(key, copy.deepcopy(after))
            else:
                parent[key] = copy.deepcopy(after)
        else:
            parent[key] = copy.deepcopy(after)
    return doc


def _element_diff_value(e: BlockElement) -> dict:
    return _element_to_jsonable(e)


def _poly_jsonable(polygon: FootprintPolygon) -> list:
    return _element_to_jsonable(
        BlockElement(id="_", element_type="_", polygon=polygon))["polygon"]


# ---------------------------------------------------------------------------
# edit application


def apply_edit(program: Program, command: EditCommand) -> EditResult:
    """Apply one command; the result re-validates against all invariants."""
    if isinstance(program, BuildingProgram):
        result = _apply_building_edit(program, command)
    else:
        result = _apply_block_edit(program, command)
    result.program_after.validate()
    return result


def _apply_building_edit(program: BuildingProgram,
                         command: EditCommand) -> EditResult:
    if command.verb == "set_component":
        return _set_component(program, command.arguments["component_type"],
                              command.arguments["description"])
    if command.verb == "set_style":
        return _style_building(program, command.arguments["style"])
    raise InvalidArgument(
        f"verb {command.verb!r} does not apply to a building program")


def _set_component(program: BuildingProgram, ctype: str,
                   description: str) -> EditResult:
    key = ctype.strip().lower()
    if not key:
        raise InvalidArgument("component type must be non-empty")
    if not description.strip():
        raise InvalidArgument("description must be non-empty")
    components = list(program.components)
    for i, comp in enumerate(components):
        if comp.component_type == key:
            if comp.description == description:
                return EditResult(program, [])
            components[i] = BuildingComponent(key, description)
            return EditResult(
                BuildingProgram(tuple(components), program.source_facade),
                [(f"/components/{i}/description", comp.description, description)])
    components.append(BuildingComponent(key, description))
    return EditResult(
        BuildingProgram(tuple(components), program.source_facade),
        [(f"/components/{len(components) - 1}", None,
          {"type": key, "description": description})])


def _style_building(program: BuildingProgram, style_name: str) -> EditResult:
    style = _lookup_style(style_name)
    result = EditResult(program, [])
    for ctype, description in sorted(style.get("components", {}).items()):
        step = _set_component(result.program_after, ctype, description)
        result.diff.extend(step.diff)
        result.program_after = step.program_after
    return result


def _lookup_style(style_name: str) -> dict:
    styles = load_styles()
    key = style_name.strip().lower()
    if key not in styles:
        raise InvalidArgument(f"unknown style {key!r}; known: "
                              + ", ".join(sorted(styles)))
    return styles[key]


def _apply_block_edit(program: BlockProgram, command: EditCommand) -> EditResult:
    verb = command.verb
    if verb == "set_floor_count":
        return _set_floor_count(program, command.target,
                                command.arguments["floors"])
    if verb == "retype_element":
        return _retype_element(program, command.target,
                               command.arguments["new_type"])
    if verb == "remove_element":
        return _remove_element(program, command.target)
    if verb == "add_element":
        return _add_element(program, command.arguments)
    if verb == "set_style":
        return _style_block(program, command.target, command.arguments["style"])
    if verb == "scale_density":
        return _scale_density(program, command.arguments["target_density"],
                              command.arguments.get("allow_move", False))
    if verb == "set_component":
        raise InvalidArgument(
            "set_component targets a building program, not the block")
    raise UnknownVerb(verb)


def _element_index(program: BlockProgram, element_id: str) -> int:
    for i, e in enumerate(program.elements):
        if e.id == element_id:
            return i
    raise UnknownTarget(f"no element with id {element_id!r}")


def _replace_element(program: BlockProgram, index: int,
                     element: BlockElement) -> BlockProgram:
    elements = list(program.elements)
    elements[index] = element
    return BlockProgram(tuple(elements), program.region, program.description)


def _set_floor_count(program: BlockProgram, target: str,
                     floors: int) -> EditResult:
    i = _element_index(program, target)
    e = program.elements[i]
    if e.is_greenspace:
        raise InvalidArgument(f"{target!r} is a greenspace; it has no floors")
    if floors < 1:
        raise InvalidArgument("floor count must be >= 1")
    if e.floor_count == floors:
        return EditResult(program, [])
    after = BlockElement(e.id, e.element_type, e.polygon, floors, e.facade)
    return EditResult(_replace_element(program, i, after),
                      [(f"/elements/{i}/floor_count", e.floor_count, floors)])


def _retype_element(program: BlockProgram, target: str,
                    new_type: str) -> EditResult:
    if not new_type:
        raise InvalidArgument("type must be non-empty")
    i = _element_index(program, target)
    e = program.elements[i]
    if e.element_type == new_type:
        return EditResult(program, [])
    diff: list[DiffEntry] = [(f"/elements/{i}/type", e.element_type, new_type)]
    warnings: list[str] = []
    floor_count, facade = e.floor_count, e.facade
    if new_type == GREENSPACE_TYPE:
        if floor_count is not None:
            diff.append((f"/elements/{i}/floor_count", floor_count, None))
            floor_count = None
            warnings.append(f"dropped floor_count of {target!r} (now greenspace)")
        if facade is not None:
            diff.append((f"/elements/{i}/facade", facade, None))
            facade = None
            warnings.append(f"dropped facade of {target!r} (now greenspace)")
    after = BlockElement(e.id, new_type, e.polygon, floor_count, facade)
    return EditResult(_replace_element(program, i, after), diff, warnings)


def _remove_element(program: BlockProgram, target: str) -> EditResult:
    i = _element_index(program, target)
    elements = list(program.elements)
    removed = elements.pop(i)
    return EditResult(
        BlockProgram(tuple(elements), program.region, program.description),
        [(f"/elements/{i}", _element_diff_value(removed), None)])


def _add_element(program: BlockProgram, args: dict) -> EditResult:
    element_id = args["id"]
    if any(e.id == element_id for e in program.elements):
        raise InvalidArgument(f"element id {element_id!r} already exists")
    warnings: list[str] = []
    notes: list = []
    try:
        polygon = _parse_polygon(args["polygon"], "$.polygon", notes)
    except ProgramError as exc:
        raise InvalidArgument(f"bad polygon: {exc}") from exc
    warnings.extend(m for _, m in notes)
    etype = args["type"]
    floor_count = args.get("floor_count")
    facade = args.get("facade")
    if etype == GREENSPACE_TYPE and (floor_count is not None or facade is not None):
        floor_count, facade = None, None
        warnings.append("dropped building-only fields on greenspace")
    if etype != GREENSPACE_TYPE and floor_count is not None and floor_count < 1:
        raise InvalidArgument("floor_count must be >= 1")
    element = BlockElement(element_id, etype, polygon, floor_count, facade)
    diff: list[DiffEntry] = []
    region = program.region
    box = polygon.aabb()
    if not all(region.contains(x, y) for x, y in polygon.coords):
        region = BlockRegion(
            x_min=min(region.x_min, box.x_min),
            y_min=min(region.y_min, box.y_min),
            width=max(region.x_max, box.x_max) - min(region.x_min, box.x_min),
            height=max(region.y_max, box.y_max) - min(region.y_min, box.y_min))
        diff.append(("/region",
                     {"x_min": program.region.x_min, "y_min": program.region.y_min,
                      "width": program.region.width, "height": program.region.height},
                     {"x_min": region.x_min, "y_min": region.y_min,
                      "width": region.width, "height": region.height}))
        warnings.append("expanded region to contain the new element")
    elements = list(program.elements) + [element]
    diff.append((f"/elements/{len(elements) - 1}", None,
                 _element_diff_value(element)))
    return EditResult(BlockProgram(tuple(elements), region, program.description),
                      diff, warnings)


def _style_block(program: BlockProgram, target: str, style_name: str) -> EditResult:
    style = _lookup_style(style_name)
    facade_text = style.get("facade")
    floor_cap = style.get("floor_cap")
    if target == "block":
        indices = [i for i, e in enumerate(program.elements) if e.is_building]
    else:
        i = _element_index(program, target)
        if program.elements[i].is_greenspace:
            raise InvalidArgument(f"{target!r} is a greenspace; styles apply "
                                  "to buildings")
        indices = [i]
    diff: list[DiffEntry] = []
    warnings: list[str] = []
    current = program
    for i in indices:
        e = current.elements[i]
        floor_count = e.floor_count
        if floor_cap is not None and floor_count is not None \
                and floor_count > floor_cap:
            diff.append((f"/elements/{i}/floor_count", floor_count, floor_cap))
            warnings.append(
                f"capped floor_count of {e.id!r} at {floor_cap} for "
                f"{style_name!r} style")
            floor_count = floor_cap
        facade = e.facade
        if facade_text is not None and facade != facade_text:
            diff.append((f"/elements/{i}/facade", facade, facade_text))
            facade = facade_text
        if floor_count != e.floor_count or facade != e.facade:
            current = _replace_element(
                current, i,
                BlockElement(e.id, e.element_type, e.polygon, floor_count, facade))
    return EditResult(current, diff, warnings)


# ---------------------------------------------------------------------------
# density scaling


def _scaled_polygon(polygon: FootprintPolygon, factor: float) -> FootprintPolygon:
    cx, cy = geometry.centroid(polygon.coords)
    return footprint([(cx + factor * (x - cx), cy + factor * (y - cy))
                      for x, y in polygon.coords])


def _snapped_into_region(polygon: FootprintPolygon,
                         region: BlockRegion) -> FootprintPolygon:
    """Minimal translation restoring region containment (size must fit)."""
    box = polygon.aabb()
    dx = dy = 0.0
    if box.x_min < region.x_min:
        dx = region.x_min - box.x_min
    elif box.x_max > region.x_max:
        dx = region.x_max - box.x_max
    if box.y_min < region.y_min:
        dy = region.y_min - box.y_min
    elif box.y_max > region.y_max:
        dy = region.y_max - box.y_max
    if dx == 0.0 and dy == 0.0:
        return polygon
    return footprint([(x + dx, y + dy) for x, y in polygon.coords])


def _pair_overlap(a: FootprintPolygon, b: FootprintPolygon) -> float:
    return geometry.polygon_intersection_area(a.coords, b.coords)


class _DensityPlanner:
    """Deterministic scale search for scale_density.

    Buildings scale about their centroids; a grown footprint that pokes out
    of the region is snapped back in by the minimal translation (a pure
    containment fix, not free relocation). The feasible set is explored as
    one global factor first, then per-element boosts in id order, so the
    result never depends on dict ordering.
    """

    def __init__(self, program: BlockProgram, allow_move: bool):
        self.program = program
        self.region = program.region
        self.idx = [i for i, e in enumerate(program.elements) if e.is_building]
        # Constrain every pair a scaled building participates in, including
        # pairs with greenspaces: they do not move, but collisions with
        # them count toward the layout's collision rate all the same.
        self.scaling = set(self.idx)
        n = len(program.elements)
        self.pre = {
            (i, j): _pair_overlap(program.elements[i].polygon,
                                  program.elements[j].polygon)
            for i in range(n) for j in range(i + 1, n)
            if i in self.scaling or j in self.scaling}
        self.caps = {}
        for i in self.idx:
            box = program.elements[i].polygon.aabb()
            self.caps[i] = min(self.region.width / max(box.width, 1e-9),
                               self.region.height / max(box.height, 1e-9))
        self.allow_move = allow_move
        self.moves: dict[int, tuple[float, float]] = {}

    def polygon_at(self, i: int, scale: float) -> FootprintPolygon:
        if i not in self.scaling:
            return self.program.elements[i].polygon
        poly = _scaled_polygon(self.program.elements[i].polygon, scale)
        dx, dy = self.moves.get(i, (0.0, 0.0))
        if dx or dy:
            poly = footprint([(x + dx, y + dy) for x, y in poly.coords])
        return _snapped_into_region(poly, self.region)

    def feasible(self, scales: dict[int, float]) -> bool:
        polys = {i: self.polygon_at(i, scales.get(i, 1.0))
                 for pair in self.pre for i in pair}
        return all(
            _pair_overlap(polys[i], polys[j]) <= pre + 1e-9
            for (i, j), pre in self.pre.items())

    def plan(self, base: float) -> dict[int, float]:
        if base <= 1.0:
            return self._plan_shrink(base)
        return self._plan_grow(base)

    def _plan_shrink(self, base: float) -> dict[int, float]:
        scales = {i: base for i in self.idx}
        if self.feasible(scales):
            return scales
        # Rare (non-star-shaped footprints): back off toward 1 globally.
        lo, hi = base, 1.0  # hi is always feasible
        for _ in range(40):
            mid = (lo + hi) / 2.0
            if self.feasible({i: mid for i in self.idx}):
                hi = mid
            else:
                lo = mid
        return {i: hi for i in self.idx}

    def _plan_grow(self, base: float) -> dict[int, float]:
        def at(factor: float) -> dict[int, float]:
            return {i: min(factor, self.caps[i]) for i in self.idx}

        # Global factor first: grow everything in lockstep while feasible.
        if self.feasible(at(base)):
            scales = at(base)
        else:
            lo, hi = 1.0, base
            for _ in range(40):
                mid = (lo + hi) / 2.0
                if self.feasible(at(mid)):
                    lo = mid
                else:
                    hi = mid
            scales = at(lo)
        # Then boost elements individually (ascending id for determinism).
        order = sorted(self.idx, key=lambda i: self.program.elements[i].id)
        for i in order:
            if scales[i] >= min(base, self.caps[i]) - 1e-12:
                continue
            if self.allow_move:
                self._nudge_apart(i, scales)
            lo, hi = scales[i], min(base, self.caps[i])
            trial = dict(scales)
            trial[i] = hi
            if self.feasible(trial):
                scales[i] = hi
                continue
            for _ in range(30):
                mid = (lo + hi) / 2.0
                trial[i] = mid
                if self.feasible(trial):
                    lo = mid
                else:
                    hi = mid
            scales[i] = lo
        return scales

    def _nudge_apart(self, i: int, scales: dict[int, float]) -> None:
        """allow-move only: step the element away from its nearest blocker."""
        poly_i = self.polygon_at(i, scales[i])
        ci = geometry.centroid(poly_i.coords)
        nearest = None
        nearest_d = math.inf
        for j in self.idx:
            if j == i:
                continue
            cj = geometry.centroid(self.polygon_at(j, scales[j]).coords)
            d = math.hypot(ci[0] - cj[0], ci[1] - cj[1])
            if d < nearest_d:
                nearest, nearest_d = cj, d
        if nearest is None or nearest_d < 1e-9:
            return
        dx = (ci[0] - nearest[0]) / nearest_d
        dy = (ci[1] - nearest[1]) / nearest_d
        old = self.moves.get(i, (0.0, 0.0))
        for step in (4.0, 2.0, 1.0):
            self.moves[i] = (old[0] + step * dx, old[1] + step * dy)
            if self.feasible(scales):
                return
        self.moves[i] = old


def _scale_density(program: BlockProgram, target: float,
                   allow_move: bool) -> EditResult:
    if not (0.0 < target < 1.0):
        raise InfeasibleDensity(f"target density must be in (0, 1), got {target}")
    building_idx = [i for i, e in enumerate(program.elements) if e.is_building]
    area_l = program.region.area
    current = sum(program.elements[i].polygon.aabb().area
                  for i in building_idx) / area_l
    if abs(target - current) < 1e-12:
        return EditResult(program, [])
    if not building_idx:
        raise InfeasibleDensity("no buildings to scale")
    if current <= 0:
        raise InfeasibleDensity("current coverage is zero; nothing to scale")

    planner = _DensityPlanner(program, allow_move)
    scales = planner.plan(math.sqrt(target / current))
    involved = set(building_idx) | {k for pair in planner.pre for k in pair}
    polys = {i: planner.polygon_at(i, scales.get(i, 1.0)) for i in involved}

    for (i, j), pre in planner.pre.items():
        if _pair_overlap(polys[i], polys[j]) > pre + 1e-9:
            raise InfeasibleDensity(
                "overlap repair failed; refusing to increase collisions")
    achieved = sum(polys[i].aabb().area for i in building_idx) / area_l
    if abs(achieved - current) < 1e-9:
        raise InfeasibleDensity(
            "cannot move coverage toward the target without creating overlaps")

    diff: list[DiffEntry] = []
    elements = list(program.elements)
    warnings = [f"coverage moved from {current:.4f} to {achieved:.4f} "
                f"(target {target:.4f})"]
    for i in building_idx:
        e = program.elements[i]
        after = polys[i]
        if after == e.polygon:
            continue
        diff.append((f"/elements/{i}/polygon",
                     _poly_jsonable(e.polygon), _poly_jsonable(after)))
        elements[i] = BlockElement(e.id, e.element_type, after,
                                   e.floor_count, e.facade)
    if not diff:
        raise InfeasibleDensity(
            "cannot move coverage toward the target without creating overlaps")
    return EditResult(BlockProgram(tuple(elements), program.region,
                                   program.description), diff, warnings)
