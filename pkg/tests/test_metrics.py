from __future__ import annotations

import json
import math
import random

import numpy as np
import pytest

from cityforge import metrics, parse_block_program
from cityforge.executor import (
    ExecutorConfig,
    assemble_scene,
    box_mesh,
    extrude_footprint,
    subdivide4,
)
from cityforge.executor.meshes import Mesh, NonManifold
from cityforge.metrics import (
    CSV_HEADER,
    DegenerateMesh,
    EmptyCorpus,
    collision_rate,
    feature_edges,
    format_accuracy,
    otr,
    report,
    report_csv,
    ros,
    ros_pool,
    write_report,
)
from cityforge.programs import BlockElement, footprint

from .conftest import BOWTIE_BLOCK
from .oracles import random_block_layout, raster_polygon_pair_intersection_area


def element(poly, floors=1, eid="b0"):
    return BlockElement(id=eid, element_type="residential",
                        polygon=footprint(poly), floor_count=floors)


def rect(x, y, w, h):
    return [[x, y], [x + w, y], [x + w, y + h], [x, y + h]]


def make_program(elements, region=100.0):
    doc = {"region": {"width": region, "height": region}, "elements": elements}
    return parse_block_program(json.dumps(doc))


class TestCollisionRate:
    def test_disjoint_layout(self):
        p = make_program([
            {"id": "a", "type": "office", "polygon": rect(0, 0, 10, 10)},
            {"id": "b", "type": "office", "polygon": rect(30, 30, 10, 10)},
        ])
        assert collision_rate(p) == 0.0

    def test_coincident_pair(self):
        p = make_program([
            {"id": "a", "type": "office", "polygon": rect(10, 10, 10, 10)},
            {"id": "b", "type": "office", "polygon": rect(10, 10, 10, 10)},
        ])
        assert collision_rate(p) == pytest.approx(0.01)

    def test_matches_raster_oracle_on_random_layouts(self):
        for seed in (2, 5, 9):
            layout = random_block_layout(seed, n_min=8, n_max=8)
            p = parse_block_program(json.dumps(layout))
            got = collision_rate(p)
            polys = [e.polygon.coords for e in p.elements]
            raster = sum(
                raster_polygon_pair_intersection_area(polys[i], polys[j])
                for i in range(len(polys)) for j in range(i + 1, len(polys)))
            assert got == pytest.approx(raster / p.region.area, abs=0.01)

    def test_rigid_motion_invariance(self):
        base = [rect(10, 10, 20, 12), rect(22, 15, 18, 10), rect(5, 28, 15, 15)]

        def rotated(theta, dx, dy):
            c, s = math.cos(theta), math.sin(theta)
            els = []
            for i, poly in enumerate(base):
                pts = [[50 + c * (x - 50) - s * (y - 50) + dx,
                        50 + s * (x - 50) + c * (y - 50) + dy]
                       for x, y in poly]
                els.append({"id": f"e{i}", "type": "office", "polygon": pts})
            return make_program(els, region=200.0)

        reference = collision_rate(rotated(0.0, 0.0, 0.0))
        assert reference > 0
        for theta, dx, dy in ((0.4, 3, 7), (1.1, 20, 5), (2.7, 0, 40)):
            assert collision_rate(rotated(theta, dx, dy)) == pytest.approx(
                reference, rel=1e-9)


class TestFormatAccuracy:
    def test_all_valid(self):
        corpus = [json.dumps(random_block_layout(s)) for s in range(10)]
        fraction, verdicts = format_accuracy(corpus)
        assert fraction == 1.0
        assert len(verdicts) == 10

    def test_98_of_100(self):
        corpus = [json.dumps(random_block_layout(s)) for s in range(98)]
        corpus.append("{this is not json")
        corpus.append(json.dumps(BOWTIE_BLOCK))
        fraction, _ = format_accuracy(corpus)
        assert fraction == pytest.approx(0.98)

    def test_mutation_harness_zeroes_out(self):
        rng = random.Random(31)
        corpus = []
        for s in range(20):
            layout = random_block_layout(s, n_min=2, n_max=4)
            el = layout["elements"][rng.randrange(len(layout["elements"]))]
            del el["id"]  # corrupt one required field in each item
            corpus.append(json.dumps(layout))
        fraction, _ = format_accuracy(corpus)
        assert fraction == 0.0

    def test_duplication_invariance(self):
        corpus = [json.dumps(random_block_layout(s)) for s in range(9)]
        corpus.append("border{")
        f1, _ = format_accuracy(corpus)
        f2, _ = format_accuracy(corpus + corpus)
        assert f1 == f2

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            format_accuracy([])


def icosphere_mesh(radius=2.0, center=(40.0, 0.0, 0.0)) -> Mesh:
    phi = (1 + math.sqrt(5)) / 2
    raw = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
           (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
           (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    verts = []
    for v in raw:
        n = math.sqrt(sum(c * c for c in v))
        verts.append(tuple(center[i] + radius * v[i] / n for i in range(3)))
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    return Mesh(np.array(verts), np.array(faces), ["concrete"] * len(faces))


def ros_scan_oracle(meshes, tol_deg=5.0) -> float:
    """Independent ROS: dense dominant-axis scan over 0..90 degrees."""
    entries = []
    for mesh in meshes:
        for a, b in feature_edges(mesh):
            d = mesh.vertices[b] - mesh.vertices[a]
            proj = math.hypot(float(d[0]), float(d[1]))
            if proj < 1e-9:
                continue
            entries.append((math.atan2(float(d[1]), float(d[0])) % (math.pi / 2),
                            proj))
    total = sum(w for _, w in entries)
    tol = math.radians(tol_deg)
    quarter = math.pi / 2
    best = 0.0
    for k in range(9000):
        cand = quarter * k / 9000
        aligned = sum(w for a, w in entries
                      if min(abs(a - cand), quarter - abs(a - cand)) <= tol)
        best = max(best, aligned)
    return best / total


class TestRos:
    def test_axis_aligned_box_is_one(self):
        el = element(rect(0, 0, 10, 6), floors=3)
        mesh = extrude_footprint(el, 3.0)
        assert ros(mesh) == pytest.approx(1.0, abs=1e-9)

    def test_rotation_invariance(self):
        el = element(rect(0, 0, 10, 6), floors=2)
        mesh = extrude_footprint(el, 3.0)
        theta = math.radians(45.0)
        c, s = math.cos(theta), math.sin(theta)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
        rotated = Mesh(mesh.vertices @ rot.T, mesh.triangles.copy(),
                       list(mesh.face_materials))
        assert ros(rotated) == pytest.approx(1.0, abs=1e-9)
        for theta in (0.3, 1.0, 1.4):
            c, s = math.cos(theta), math.sin(theta)
            rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
            spun = Mesh(mesh.vertices @ rot.T, mesh.triangles.copy(),
                        list(mesh.face_materials))
            assert ros(spun) == pytest.approx(ros(mesh), abs=1e-9)

    def test_box_plus_icosphere_matches_scan_oracle(self):
        el = element(rect(0, 0, 12, 8), floors=3)
        box = extrude_footprint(el, 3.0)
        sphere = icosphere_mesh()
        got = ros_pool([box, sphere])
        want = ros_scan_oracle([box, sphere])
        assert got == pytest.approx(want, abs=1e-3)
        assert got < 1.0
        # Roughly the box's share of the pooled projected edge length.
        box_only = sum(
            math.hypot(*(box.vertices[b] - box.vertices[a])[:2])
            for a, b in feature_edges(box))
        both = box_only + sum(
            math.hypot(*(sphere.vertices[b] - sphere.vertices[a])[:2])
            for a, b in feature_edges(sphere))
        assert got == pytest.approx(box_only / both, abs=0.2)

    def test_triangulation_diagonals_do_not_count(self):
        box = box_mesh((4, 4, 4), "concrete")
        # Cap diagonals are coplanar-internal; all feature edges axis-aligned.
        assert ros(box) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_mesh(self):
        # A degenerate vertical strip projects to nothing on the ground plane.
        mesh = Mesh(np.array([[0, 0, 0], [0, 0, 1], [0, 0, 2]]),
                    np.array([[0, 1, 2]]), ["concrete"])
        with pytest.raises(DegenerateMesh):
            ros(mesh)


class TestOtr:
    def test_minimal_box_is_one(self):
        assert otr(box_mesh((2, 3, 4), "concrete")) == pytest.approx(1.0)

    def test_uniform_subdivision_multiplies_by_four(self):
        box = box_mesh((2, 3, 4), "concrete")
        assert otr(subdivide4(box)) == pytest.approx(4.0)
        assert otr(subdivide4(subdivide4(box))) == pytest.approx(16.0)

    def test_extrusion_vs_subdivided_strictly_ordered(self):
        el = element([(0, 0), (12, 0), (12, 4), (4, 4), (4, 10), (0, 10)],
                     floors=4)
        mesh = extrude_footprint(el, 3.0)
        assert otr(subdivide4(mesh)) > otr(mesh)

    def test_never_below_one(self):
        meshes = [box_mesh((1, 1, 1), "c"),
                  extrude_footprint(element(rect(0, 0, 9, 5), floors=6), 3.0),
                  subdivide4(box_mesh((2, 2, 2), "c")),
                  icosphere_mesh()]
        for mesh in meshes:
            assert otr(mesh) >= 1.0 - 1e-12

    def test_curved_surface_earns_its_triangles(self):
        assert otr(icosphere_mesh()) == pytest.approx(1.0)

    def test_nonmanifold_rejected(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
                          [0, -1, 0]])
        tris = np.array([[0, 1, 2], [0, 2, 1], [0, 1, 3], [0, 4, 1]])
        mesh = Mesh(verts, tris, ["c"] * 4)
        with pytest.raises(NonManifold):
            otr(mesh)


class TestReport:
    @pytest.fixture
    def inputs(self, sample_block_text, sample_block_program,
               sample_building_program):
        scene = assemble_scene(sample_block_program,
                               {"mixed_1": sample_building_program},
                               ExecutorConfig())
        return [("sample", sample_block_text)], {"sample": scene}

    def test_single_item_fully_populated(self, inputs):
        programs, scenes = inputs
        q = report(programs, scenes)
        assert len(q.per_item) == 1
        item = q.per_item[0]
        assert item.id == "sample"
        assert item.collision_rate == pytest.approx(0.0)
        assert item.format is not None and item.format.overall
        assert item.ros == pytest.approx(1.0)
        assert item.otr >= 1.0

    def test_deterministic_bytes(self, inputs, tmp_path):
        programs, scenes = inputs
        out = []
        for i in range(2):
            q = report(programs, scenes)
            jp, cp = tmp_path / f"r{i}.json", tmp_path / f"r{i}.csv"
            write_report(q, jp, cp)
            out.append(jp.read_bytes() + cp.read_bytes())
        assert out[0] == out[1]

    def test_csv_header_contract(self, inputs):
        programs, scenes = inputs
        q = report(programs, scenes)
        assert report_csv(q).splitlines()[0] == CSV_HEADER

    def test_items_sorted_by_id(self, sample_block_text):
        q = report([("zz", sample_block_text), ("aa", sample_block_text)])
        assert [i.id for i in q.per_item] == ["aa", "zz"]

    def test_invalid_program_has_no_collision(self):
        q = report([("bad", "{nope")])
        assert q.per_item[0].collision_rate is None
        assert q.format_accuracy == 0.0

    def test_scene_metrics_shells_vs_full(self, inputs):
        programs, scenes = inputs
        shells = report(programs, scenes, edge_set="shells")
        full = report(programs, scenes, edge_set="full")
        assert shells.per_item[0].ros == pytest.approx(1.0)
        assert full.per_item[0].otr is not None
