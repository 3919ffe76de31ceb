from __future__ import annotations

import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cityforge import programs
from cityforge.programs import (
    BadFloorCount,
    BadPolygon,
    DuplicateId,
    MalformedJson,
    MissingField,
    UnknownForm,
    check_format,
    parse_block_program,
    parse_building_program,
    serialize,
)

from .conftest import BOWTIE_BLOCK, SAMPLE_BLOCK_ELEMENTS, SAMPLE_BUILDING
from .oracles import is_simple_bruteforce, random_block_layout


class TestParseBlockProgram:
    def test_sample_block(self, sample_block_program):
        p = sample_block_program
        assert [e.id for e in p.elements] == ["mixed_1", "mixed_2", "park_1", "park_2"]
        mixed_1 = p.element_by_id("mixed_1")
        assert mixed_1.floor_count == 12
        assert mixed_1.polygon.signed_area() == pytest.approx(484.0)
        assert len(mixed_1.polygon.vertices) == 4
        assert mixed_1.element_type == "mixed-use building"

    def test_sample_region_inferred(self, sample_block_program):
        r = sample_block_program.region
        assert (r.x_min, r.y_min, r.width, r.height) == (0, 0, 60, 90)

    def test_empty_list_is_valid(self):
        p = parse_block_program(b"[]")
        assert p.elements == ()
        assert p.region.area > 0

    def test_bowtie_rejected_as_self_intersecting(self):
        text = json.dumps(BOWTIE_BLOCK)
        with pytest.raises(BadPolygon) as exc_info:
            parse_block_program(text)
        assert exc_info.value.reason == "self-intersecting"
        # Independent confirmation that the footprint really self-intersects.
        assert not is_simple_bruteforce(BOWTIE_BLOCK[0]["polygon"])

    def test_clockwise_polygon_reversed_with_diagnostic(self):
        el = {"id": "a", "type": "office",
              "polygon": [[0, 0], [0, 5], [5, 5], [5, 0]]}
        diags = []
        p = parse_block_program(json.dumps([el]), diagnostics=diags)
        assert p.elements[0].polygon.signed_area() > 0
        assert any("counter-clockwise" in m for _, m in diags)

    def test_closure_vertex_dropped(self):
        el = {"id": "a", "type": "office",
              "polygon": [[0, 0], [5, 0], [5, 5], [0, 5], [0, 0]]}
        diags = []
        p = parse_block_program(json.dumps([el]), diagnostics=diags)
        assert len(p.elements[0].polygon.vertices) == 4
        assert any("closure" in m for _, m in diags)

    def test_duplicate_id(self):
        els = [
            {"id": "a", "type": "office", "polygon": [[0, 0], [5, 0], [5, 5], [0, 5]]},
            {"id": "a", "type": "office", "polygon": [[10, 0], [15, 0], [15, 5], [10, 5]]},
        ]
        with pytest.raises(DuplicateId):
            parse_block_program(json.dumps(els))

    @pytest.mark.parametrize("bad", [0, -1, 2.5, "3", True])
    def test_bad_floor_count(self, bad):
        el = {"id": "a", "type": "office",
              "polygon": [[0, 0], [5, 0], [5, 5], [0, 5]], "floor_count": bad}
        with pytest.raises(BadFloorCount):
            parse_block_program(json.dumps([el]))

    def test_greenspace_floor_count_dropped(self):
        el = {"id": "g", "type": "greenspace",
              "polygon": [[0, 0], [5, 0], [5, 5], [0, 5]], "floor_count": 4}
        diags = []
        p = parse_block_program(json.dumps([el]), diagnostics=diags)
        assert p.elements[0].floor_count is None
        assert any("greenspace" in m for _, m in diags)

    def test_missing_polygon_names_path(self):
        with pytest.raises(MissingField) as exc_info:
            parse_block_program(json.dumps([{"id": "a", "type": "office"}]))
        assert "polygon" in exc_info.value.path

    def test_nonfinite_vertex(self):
        text = '[{"id": "a", "type": "office", "polygon": [[0, 0], [5, 0], [NaN, 5]]}]'
        with pytest.raises(BadPolygon) as exc_info:
            parse_block_program(text)
        assert exc_info.value.reason == "non-finite"

    def test_too_few_vertices(self):
        el = {"id": "a", "type": "office", "polygon": [[0, 0], [5, 0]]}
        with pytest.raises(BadPolygon) as exc_info:
            parse_block_program(json.dumps([el]))
        assert exc_info.value.reason == "too-few-vertices"

    def test_malformed_json(self):
        with pytest.raises(MalformedJson):
            parse_block_program(b"{nope")

    def test_prompt_wrapper_form(self):
        doc = [{
            "description": "two towers and a park",
            "layout": {
                "buildings": [
                    {"id": "res_1", "type": "resident building",
                     "polygon": [[0, 0], [20, 0], [20, 20], [0, 20]],
                     "floor_count": 16, "facade": "glass with wooden accents"},
                ],
                "greenspaces": [
                    {"id": "green_1", "type": "greenspace",
                     "polygon": [[30, 0], [50, 0], [50, 20], [30, 20]]},
                ],
            },
        }]
        p = parse_block_program(json.dumps(doc))
        assert p.description == "two towers and a park"
        assert [e.id for e in p.elements] == ["res_1", "green_1"]

    def test_explicit_region_expanded_when_too_small(self):
        doc = {
            "region": {"width": 10, "height": 10},
            "elements": [{"id": "a", "type": "office",
                          "polygon": [[0, 0], [30, 0], [30, 8], [0, 8]]}],
        }
        diags = []
        p = parse_block_program(json.dumps(doc), diagnostics=diags)
        assert p.region.x_max >= 30
        assert any("region" in path for path, _ in diags)

    def test_negative_coordinates_infer_covering_region(self):
        el = {"id": "a", "type": "office",
              "polygon": [[-12, -3], [8, -3], [8, 6], [-12, 6]]}
        p = parse_block_program(json.dumps([el]))
        assert p.region.x_min <= -12
        assert p.region.contains(-12, -3)


class TestParseBuildingProgram:
    def test_sample_flat_map(self, sample_building_program):
        p = sample_building_program
        assert len(p.components) == 3
        window = p.component("window")
        assert window is not None
        assert window.description == "expansive, glass, modern, blue-tinted"

    def test_empty_map_accepted(self):
        p = parse_building_program(b"{}")
        assert p.components == ()

    def test_list_form(self):
        doc = [{"type": "Window", "description": "slim aluminum frames"},
               {"type": "roof", "description": "flat slab, parapet edge"}]
        p = parse_building_program(json.dumps(doc))
        assert p.component("window").description == "slim aluminum frames"
        assert p.component("roof") is not None

    def test_duplicate_type_last_wins_with_diagnostic(self):
        doc = [{"type": "window", "description": "first"},
               {"type": "window", "description": "second"}]
        diags = []
        p = parse_building_program(json.dumps(doc), diagnostics=diags)
        assert len(p.components) == 1
        assert p.component("window").description == "second"
        assert any("last wins" in m for _, m in diags)

    def test_canonicalization_idempotent(self):
        doc = [{"type": "Window", "description": "first"},
               {"type": "window ", "description": "second"},
               {"type": "door", "description": "steel, blue"}]
        p1 = parse_building_program(json.dumps(doc))
        p2 = parse_building_program(serialize(p1))
        assert p1 == p2

    def test_empty_description_rejected(self):
        with pytest.raises(programs.EmptyDescription):
            parse_building_program(json.dumps({"window": "  "}))

    def test_facade_wrapper_form(self):
        doc = [{"facade": "light gray concrete, modernist",
                "output": SAMPLE_BUILDING}]
        p = parse_building_program(json.dumps(doc))
        assert p.source_facade == "light gray concrete, modernist"
        assert len(p.components) == 3

    def test_unknown_form(self):
        with pytest.raises(UnknownForm):
            parse_building_program(b"42")


class TestSerialize:
    def test_block_round_trip(self, sample_block_program):
        text = serialize(sample_block_program)
        assert parse_block_program(text) == sample_block_program

    def test_building_round_trip(self, sample_building_program):
        text = serialize(sample_building_program)
        assert parse_building_program(text) == sample_building_program

    def test_deterministic_bytes(self, sample_block_program):
        assert serialize(sample_block_program) == serialize(sample_block_program)

    def test_sample_emits_bare_array(self, sample_block_program):
        doc = json.loads(serialize(sample_block_program))
        assert isinstance(doc, list)
        assert doc[0]["id"] == "mixed_1"

    def test_explicit_region_survives_round_trip(self):
        doc = {"region": {"width": 200, "height": 200},
               "elements": SAMPLE_BLOCK_ELEMENTS}
        p = parse_block_program(json.dumps(doc))
        p2 = parse_block_program(serialize(p))
        assert p2.region == p.region
        assert p2 == p

    def test_fuzz_round_trip_1000(self):
        for seed in range(1000):
            layout = random_block_layout(seed)
            p = parse_block_program(json.dumps(layout))
            p2 = parse_block_program(serialize(p))
            assert p2 == p, f"round-trip mismatch at seed {seed}"


class TestCheckFormat:
    def test_valid_sample(self, sample_block_text):
        v = check_format(sample_block_text, kind="block")
        assert (v.json_parsable, v.geometry_valid, v.fields_complete) == (
            True, True, True)
        assert v.overall

    def test_random_bytes(self):
        v = check_format(b"\x00\xff garbage \x9c", kind="block")
        assert (v.json_parsable, v.geometry_valid, v.fields_complete) == (
            False, False, False)

    def test_bowtie_geometry_invalid_fields_complete(self, bowtie_block_text):
        v = check_format(bowtie_block_text, kind="block")
        assert (v.json_parsable, v.geometry_valid, v.fields_complete) == (
            True, False, True)
        with pytest.raises(BadPolygon):
            parse_block_program(bowtie_block_text)

    def test_independent_observations(self):
        doc = [{"type": "office",  # id missing
                "polygon": [[0, 0], [10, 10], [10, 0], [0, 10]]}]
        v = check_format(json.dumps(doc), kind="block")
        assert (v.json_parsable, v.geometry_valid, v.fields_complete) == (
            True, False, False)

    def test_building_kind(self, sample_building_text):
        assert check_format(sample_building_text, kind="building").overall
        assert not check_format(b"[1, 2]", kind="building").overall

    def test_overall_iff_parse_succeeds(self):
        corpora = [json.dumps(random_block_layout(s)) for s in range(40)]
        corpora += [b"{broken", json.dumps(BOWTIE_BLOCK),
                    json.dumps([{"id": "x"}]), b"[]", b"null"]
        for text in corpora:
            verdict = check_format(text, kind="block")
            try:
                parse_block_program(text)
                parsed = True
            except programs.ProgramError:
                parsed = False
            assert verdict.overall == parsed

    @given(st.binary(max_size=400))
    @settings(max_examples=300)
    def test_totality_on_arbitrary_bytes(self, data):
        check_format(data, kind="block")
        check_format(data, kind="building")

    @given(st.text(max_size=300))
    @settings(max_examples=200)
    def test_totality_on_text(self, text):
        check_format(text, kind="block")

    def test_mutated_sample_corpus_never_crashes(self, sample_block_text):
        rng = random.Random(5)
        raw = sample_block_text.encode()
        for _ in range(300):
            mutated = bytearray(raw)
            for _ in range(rng.randint(1, 6)):
                pos = rng.randrange(len(mutated))
                mutated[pos] = rng.randrange(256)
            check_format(bytes(mutated), kind="block")


class TestOrientationNormalization:
    def test_every_parsed_polygon_is_ccw(self):
        rng = random.Random(2)
        for seed in range(50):
            layout = random_block_layout(seed)
            # Randomly flip some polygons to clockwise on the way in.
            for el in layout["elements"]:
                if rng.random() < 0.5:
                    el["polygon"] = list(reversed(el["polygon"]))
            p = parse_block_program(json.dumps(layout))
            for e in p.elements:
                assert e.polygon.signed_area() > 0
