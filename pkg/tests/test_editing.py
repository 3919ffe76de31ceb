from __future__ import annotations

import json
import random

import pytest

from cityforge import parse_block_program
from cityforge.editing import (
    BadArguments,
    EditCommand,
    InfeasibleDensity,
    InvalidArgument,
    UnknownTarget,
    UnknownVerb,
    apply_diff,
    apply_edit,
    load_styles,
    parse_edit_command,
    to_diffable,
)
from cityforge.metrics import collision_rate
from cityforge.scoring import building_coverage

from .oracles import random_block_layout


class TestParseEditCommand:
    def test_set_floor_count(self):
        cmd = parse_edit_command("set_floor_count mixed_1 5")
        assert cmd.verb == "set_floor_count"
        assert cmd.target == "mixed_1"
        assert cmd.arguments == {"floors": 5}

    def test_scale_density(self):
        cmd = parse_edit_command("scale_density block 0.7")
        assert cmd.arguments["target_density"] == pytest.approx(0.7)
        assert cmd.arguments["allow_move"] is False

    def test_scale_density_allow_move(self):
        cmd = parse_edit_command("scale_density block 0.7 allow_move=true")
        assert cmd.arguments["allow_move"] is True

    def test_unknown_verb_lists_alternatives(self):
        with pytest.raises(UnknownVerb) as exc_info:
            parse_edit_command("fly_to_moon block")
        assert "set_floor_count" in str(exc_info.value)
        assert "scale_density" in str(exc_info.value)

    def test_quoted_description(self):
        cmd = parse_edit_command(
            'set_component mixed_1 window "arched, wooden shutters"')
        assert cmd.arguments["description"] == "arched, wooden shutters"

    def test_add_element_args(self):
        cmd = parse_edit_command(
            'add_element block id=new_1 type=office '
            'polygon="[[60, 60], [70, 60], [70, 70], [60, 70]]" floor_count=3')
        assert cmd.arguments["id"] == "new_1"
        assert cmd.arguments["polygon"][0] == [60, 60]

    def test_bad_arity(self):
        with pytest.raises(BadArguments):
            parse_edit_command("set_floor_count mixed_1")
        with pytest.raises(BadArguments):
            parse_edit_command("set_floor_count mixed_1 five")


class TestSetFloorCount:
    def test_changes_exactly_one_field(self, sample_block_program):
        cmd = parse_edit_command("set_floor_count mixed_1 5")
        result = apply_edit(sample_block_program, cmd)
        assert result.program_after.element_by_id("mixed_1").floor_count == 5
        assert result.diff == [("/elements/0/floor_count", 12, 5)]
        # Everything else untouched.
        for eid in ("mixed_2", "park_1", "park_2"):
            assert result.program_after.element_by_id(eid) == \
                sample_block_program.element_by_id(eid)

    def test_idempotent(self, sample_block_program):
        cmd = parse_edit_command("set_floor_count mixed_1 5")
        once = apply_edit(sample_block_program, cmd)
        twice = apply_edit(once.program_after, cmd)
        assert twice.program_after == once.program_after
        assert twice.diff == []

    def test_unknown_target(self, sample_block_program):
        with pytest.raises(UnknownTarget):
            apply_edit(sample_block_program,
                       parse_edit_command("set_floor_count nope 5"))

    def test_greenspace_rejected(self, sample_block_program):
        with pytest.raises(InvalidArgument):
            apply_edit(sample_block_program,
                       parse_edit_command("set_floor_count park_1 5"))

    def test_diff_replay(self, sample_block_program):
        cmd = parse_edit_command("set_floor_count mixed_2 3")
        result = apply_edit(sample_block_program, cmd)
        replayed = apply_diff(to_diffable(sample_block_program), result.diff)
        assert replayed == to_diffable(result.program_after)


class TestRetypeAndAddRemove:
    def test_retype_to_greenspace_drops_building_fields(self, sample_block_program):
        cmd = parse_edit_command("retype_element mixed_2 greenspace")
        result = apply_edit(sample_block_program, cmd)
        e = result.program_after.element_by_id("mixed_2")
        assert e.is_greenspace and e.floor_count is None and e.facade is None
        assert len(result.warnings) == 2

    def test_remove_element(self, sample_block_program):
        result = apply_edit(sample_block_program,
                            parse_edit_command("remove_element park_2"))
        assert len(result.program_after.elements) == 3
        replayed = apply_diff(to_diffable(sample_block_program), result.diff)
        assert replayed == to_diffable(result.program_after)

    def test_add_element(self, sample_block_program):
        cmd = parse_edit_command(
            'add_element block id=new_1 type=office '
            'polygon="[[0, 30], [10, 30], [10, 40], [0, 40]]" floor_count=6')
        result = apply_edit(sample_block_program, cmd)
        assert result.program_after.element_by_id("new_1").floor_count == 6
        replayed = apply_diff(to_diffable(sample_block_program), result.diff)
        assert replayed == to_diffable(result.program_after)

    def test_add_duplicate_id_rejected(self, sample_block_program):
        cmd = parse_edit_command(
            'add_element block id=mixed_1 type=office '
            'polygon="[[0, 30], [10, 30], [10, 40], [0, 40]]"')
        with pytest.raises(InvalidArgument):
            apply_edit(sample_block_program, cmd)

    def test_add_outside_region_expands_with_warning(self, sample_block_program):
        cmd = parse_edit_command(
            'add_element block id=far_1 type=office '
            'polygon="[[70, 0], [95, 0], [95, 10], [70, 10]]"')
        result = apply_edit(sample_block_program, cmd)
        assert result.program_after.region.x_max >= 95
        assert any("region" in w for w in result.warnings)


class TestSetComponent:
    def test_replace_description_minimal_diff(self, sample_building_program):
        cmd = parse_edit_command('set_component building window "narrow, wooden"')
        result = apply_edit(sample_building_program, cmd)
        assert result.diff == [("/components/0/description",
                                "expansive, glass, modern, blue-tinted",
                                "narrow, wooden")]

    def test_add_new_component(self, sample_building_program):
        cmd = parse_edit_command('set_component building balcony "iron railing"')
        result = apply_edit(sample_building_program, cmd)
        assert result.program_after.component("balcony") is not None
        replayed = apply_diff(to_diffable(sample_building_program), result.diff)
        assert replayed == to_diffable(result.program_after)

    def test_idempotent(self, sample_building_program):
        cmd = parse_edit_command('set_component building window "narrow, wooden"')
        once = apply_edit(sample_building_program, cmd)
        twice = apply_edit(once.program_after, cmd)
        assert twice.diff == []
        assert twice.program_after == once.program_after


class TestSetStyle:
    def test_chinese_caps_floors_and_retags_facades(self, sample_block_program):
        cap = load_styles()["chinese"]["floor_cap"]
        assert cap == 3
        result = apply_edit(sample_block_program,
                            parse_edit_command("set_style block chinese"))
        after = result.program_after
        after.validate()
        for e in after.building_elements():
            assert e.floor_count <= cap
            assert "chinese" in e.facade
        # Greenspaces untouched.
        assert after.element_by_id("park_1") == \
            sample_block_program.element_by_id("park_1")
        assert building_coverage(after) == pytest.approx(
            building_coverage(sample_block_program))

    def test_single_element_style(self, sample_block_program):
        result = apply_edit(sample_block_program,
                            parse_edit_command("set_style mixed_1 modern"))
        assert "glass" in result.program_after.element_by_id("mixed_1").facade
        assert result.program_after.element_by_id("mixed_2").facade == \
            sample_block_program.element_by_id("mixed_2").facade

    def test_style_on_building_program(self, sample_building_program):
        result = apply_edit(sample_building_program,
                            parse_edit_command("set_style building chinese"))
        assert "lattice" in result.program_after.component("window").description

    def test_unknown_style(self, sample_block_program):
        with pytest.raises(InvalidArgument):
            apply_edit(sample_block_program,
                       parse_edit_command("set_style block brutalist_dream"))

    def test_idempotent(self, sample_block_program):
        cmd = parse_edit_command("set_style block chinese")
        once = apply_edit(sample_block_program, cmd)
        twice = apply_edit(once.program_after, cmd)
        assert twice.diff == []


class TestScaleDensity:
    def test_identity_at_current_density(self, sample_block_program):
        d = building_coverage(sample_block_program)
        cmd = parse_edit_command(f"scale_density block {d}")
        result = apply_edit(sample_block_program, cmd)
        assert result.diff == []
        assert result.program_after == sample_block_program

    def test_shrink_moves_coverage_down(self, sample_block_program):
        before = building_coverage(sample_block_program)
        cmd = parse_edit_command("scale_density block 0.08")
        result = apply_edit(sample_block_program, cmd)
        after = building_coverage(result.program_after)
        assert after < before
        assert after == pytest.approx(0.08, abs=0.01)

    def test_grow_moves_coverage_up_without_collisions(self, sample_block_program):
        before = building_coverage(sample_block_program)
        pre_collision = collision_rate(sample_block_program)
        cmd = parse_edit_command("scale_density block 0.35")
        result = apply_edit(sample_block_program, cmd)
        after = building_coverage(result.program_after)
        assert before < after <= 0.36
        assert collision_rate(result.program_after) <= pre_collision + 1e-9

    def test_never_increases_collision_rate(self):
        rng = random.Random(77)
        checked = 0
        for seed in range(40):
            layout = random_block_layout(seed, n_min=3, n_max=6)
            p = parse_block_program(json.dumps(layout))
            if not p.building_elements():
                continue
            pre = collision_rate(p)
            target = rng.choice([0.1, 0.3, 0.5, 0.7])
            try:
                result = apply_edit(
                    p, parse_edit_command(f"scale_density block {target}"))
            except InfeasibleDensity:
                continue
            assert collision_rate(result.program_after) <= pre + 1e-9
            checked += 1
        assert checked >= 20

    def test_grow_respects_region(self, sample_block_program):
        result = apply_edit(sample_block_program,
                            parse_edit_command("scale_density block 0.9"))
        result.program_after.validate()  # would fail if polygons left region

    def test_invalid_target(self, sample_block_program):
        with pytest.raises(InfeasibleDensity):
            apply_edit(sample_block_program,
                       parse_edit_command("scale_density block 1.5"))

    def test_no_buildings_infeasible(self):
        p = parse_block_program(json.dumps([
            {"id": "g", "type": "greenspace",
             "polygon": [[0, 0], [10, 0], [10, 10], [0, 10]]}]))
        with pytest.raises(InfeasibleDensity):
            apply_edit(p, parse_edit_command("scale_density block 0.5"))

    def test_diff_replay(self, sample_block_program):
        cmd = parse_edit_command("scale_density block 0.1")
        result = apply_edit(sample_block_program, cmd)
        replayed = apply_diff(to_diffable(sample_block_program), result.diff)
        assert replayed == to_diffable(result.program_after)


def random_command(rng: random.Random, program) -> str:
    buildings = [e.id for e in program.building_elements()]
    ids = [e.id for e in program.elements]
    choices = []
    if buildings:
        choices += [
            f"set_floor_count {rng.choice(buildings)} {rng.randint(1, 25)}",
            f"set_style {rng.choice(buildings)} "
            f"{rng.choice(['chinese', 'modern', 'industrial', 'mediterranean'])}",
            f"scale_density block {rng.choice([0.15, 0.3, 0.5, 0.65, 0.75])}",
            "set_style block chinese",
        ]
    if ids:
        choices.append(f"remove_element {rng.choice(ids)}")
        choices.append(
            f"retype_element {rng.choice(ids)} "
            f"{rng.choice(['office', 'residential', 'greenspace', 'school'])}")
    x = rng.randint(0, 80)
    y = rng.randint(0, 80)
    w = rng.randint(4, 15)
    h = rng.randint(4, 15)
    poly = json.dumps([[x, y], [x + w, y], [x + w, y + h], [x, y + h]])
    choices.append(
        f"add_element block id=added_{rng.randint(0, 10 ** 6)} "
        f"type=office polygon='{poly}' floor_count={rng.randint(1, 20)}")
    return rng.choice(choices)


class TestClosureProperty:
    def test_closure_over_random_edits(self):
        """Every applicable edit yields a program passing full validation."""
        rng = random.Random(20260810)
        applied = 0
        attempts = 0
        while applied < 250 and attempts < 2000:
            attempts += 1
            layout = random_block_layout(rng.randrange(10 ** 6))
            program = parse_block_program(json.dumps(layout))
            text = random_command(rng, program)
            try:
                command = parse_edit_command(text)
                result = apply_edit(program, command)
            except (InfeasibleDensity, InvalidArgument, UnknownTarget):
                continue
            result.program_after.validate()
            replayed = apply_diff(to_diffable(program), result.diff)
            assert replayed == to_diffable(result.program_after), text
            applied += 1
        assert applied == 250
